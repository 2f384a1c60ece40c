#include "sal/report.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <string>

#include "sal/error.hpp"
#include "sal/json_util.hpp"

namespace sal {

const std::vector<std::string> kSalColumns{"grade", "tau", "epsilon", "iterations", "train_time_s", "rse_train", "rse_test"};
const std::vector<std::string> kSsgColumns{"structure", "alpha", "epsilon", "epoch", "train_time_s", "rse_train", "rse_test"};

std::string format_sci(double x) {
  if (!std::isfinite(x)) throw NumericError("format_sci: non-finite value");
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.5e", x);
  std::string s(buf);
  const std::size_t e = s.find('e');
  std::string mant = s.substr(0, e);
  std::string exp = s.substr(e + 1);
  bool neg = false;
  std::size_t i = 0;
  if (exp[i] == '+' || exp[i] == '-') neg = exp[i++] == '-';
  while (i + 1 < exp.size() && exp[i] == '0') ++i;
  exp = exp.substr(i);
  if (exp == "0") neg = false;
  return mant + "e" + (neg ? "-" : "") + exp;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string CsvTable::to_string() const {
  std::string out;
  auto line = [&out](const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i) out += ',';
      out += csv_field(fields[i]);
    }
    out += "\n";
  };
  line(header);
  for (const auto& r : rows) {
    if (r.size() != header.size()) throw ShapeError("csv: row width does not match the header");
    line(r);
  }
  return out;
}

void write_csv(const CsvTable& table, const std::string& path) { write_text_file(path, table.to_string()); }

CsvTable sal_table(const TrainReport& report) {
  CsvTable t{kSalColumns, {}};
  for (const GradeRecord& r : report.records)
    t.rows.push_back({std::to_string(r.grade), format_sci(r.tau), format_sci(r.epsilon), std::to_string(r.iterations),
                      format_sci(r.train_time_s), format_sci(r.rse_train), format_sci(r.rse_test)});
  t.rows.push_back({"total_time", "", "", "", format_sci(report.total_time_s), "", ""});
  return t;
}

CsvTable ssg_table(const SsgReport& report) {
  CsvTable t{kSsgColumns, {}};
  for (const SsgRecord& r : report.rows)
    t.rows.push_back({r.structure, format_sci(r.alpha), format_sci(r.epsilon), std::to_string(r.epoch),
                      format_sci(r.train_time_s), format_sci(r.rse_train), format_sci(r.rse_test)});
  return t;
}

std::vector<std::size_t> wall_time_columns(const std::vector<std::string>& header) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i].ends_with("time_s")) out.push_back(i);
  return out;
}

ThresholdHit sal_time_to(const TrainReport& report, double threshold) {
  ThresholdHit h;
  double elapsed = 0.0;
  for (const GradeRecord& r : report.records) {
    elapsed += r.train_time_s;
    if (r.rse_train <= threshold) {
      h.reached = true;
      h.index = static_cast<int>(r.grade);
      h.time_s = elapsed;
      return h;
    }
  }
  return h;
}

ThresholdHit ssg_time_to(const SsgReport& report, double threshold) {
  ThresholdHit h;
  for (std::size_t e = 0; e < report.rse_history.size(); ++e) {
    if (report.rse_history[e] <= threshold) {
      h.reached = true;
      h.index = static_cast<int>(e);
      h.time_s = report.time_history[e];
      return h;
    }
  }
  return h;
}

}  // namespace sal
