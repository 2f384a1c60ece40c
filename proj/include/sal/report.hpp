#pragma once

#include <string>
#include <vector>

#include "sal/mlp.hpp"
#include "sal/trainer.hpp"

namespace sal {

/// Scientific notation with 6 significant digits and a bare exponent,
/// e.g. 0.15 -> "1.50000e-1", 2 -> "2.00000e0".
std::string format_sci(double x);

/// RFC 4180 field quoting (only when needed).
std::string csv_field(const std::string& s);

/// Simple table: header plus rows of already formatted fields.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::string to_string() const;
};

void write_csv(const CsvTable& table, const std::string& path);

extern const std::vector<std::string> kSalColumns;  // grade,tau,epsilon,iterations,train_time_s,rse_train,rse_test
extern const std::vector<std::string> kSsgColumns;  // structure,alpha,epsilon,epoch,train_time_s,rse_train,rse_test

/// One row per grade plus a final "total_time" row.
CsvTable sal_table(const TrainReport& report);
CsvTable ssg_table(const SsgReport& report);

/// Column indices holding wall-clock values (masked when comparing runs).
std::vector<std::size_t> wall_time_columns(const std::vector<std::string>& header);

/// First point at which rse(train) <= threshold, with elapsed training time.
struct ThresholdHit {
  bool reached = false;
  int index = 0;  // grade or epoch
  double time_s = 0.0;
};
ThresholdHit sal_time_to(const TrainReport& report, double threshold);
ThresholdHit ssg_time_to(const SsgReport& report, double threshold);

}  // namespace sal
