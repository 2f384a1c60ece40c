#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sal/bench_data.hpp"
#include "sal/json_util.hpp"
#include "sal/mlp.hpp"
#include "sal/trainer.hpp"

namespace sal {

struct DataConfig {
  std::string target;  // "nondiff", "oscillatory" or "custom"
  double a = 0.0;
  double b = 0.0;
  double delta = 0.0;
  std::size_t m = 0;
  std::size_t m_test = 0;
  std::uint64_t seed = 1;
  std::string coeff_file;   // oscillatory; empty = shipped coefficients
  std::string custom_file;  // custom: CSV of x, y_1..y_t
};

struct SalSection {
  std::vector<GradeConfig> grades;
  std::uint64_t seed = 1;
  bool record_test_metrics = true;
  std::optional<SsgConfig> hybrid_head;
};

struct CompareConfig {
  std::vector<double> thresholds{1e-2, 1e-3, 1e-4};
};

struct OutputConfig {
  std::string dir = "out";
  std::string csv = "report.csv";
  std::string model_path = "model.json";
};

struct RunConfig {
  DataConfig data;
  std::optional<SalSection> sal;
  std::optional<SsgConfig> ssg;
  CompareConfig compare;
  OutputConfig output;
  /// Directory of the config file; relative data paths resolve against it.
  std::string base_dir = ".";
};

/// Parses and validates a config document. Unknown keys are rejected with
/// their path; missing optional values take the target's defaults.
RunConfig parse_config_text(const std::string& text, const std::string& origin = "config");
RunConfig parse_config(const std::string& path);

/// The fully resolved config (every default filled in).
ordered_json config_to_json(const RunConfig& cfg);

/// Replaces every seed in the config (data, sal, ssg, hybrid head).
void override_seed(RunConfig& cfg, std::uint64_t seed);

TargetFn build_target(const RunConfig& cfg);
Dataset build_train(const RunConfig& cfg, const TargetFn& target);
Dataset build_test(const RunConfig& cfg, const TargetFn& target);

TrainConfig to_train_config(const SalSection& sal);

}  // namespace sal
