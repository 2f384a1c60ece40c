#include "sal/bench_data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

#include "sal/error.hpp"
#include "sal/rng.hpp"

#ifndef SAL_DATA_DIR
#define SAL_DATA_DIR "data"
#endif

namespace sal {

double SplitMix64::next_normal() {
  const double u1 = 1.0 - next_double();  // (0, 1]
  const double u2 = next_double();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

OscillatoryCoeffs OscillatoryCoeffs::generate(std::uint64_t seed) {
  SplitMix64 rng(seed);
  OscillatoryCoeffs c;
  for (double& v : c.a) v = 5.0 * rng.next_normal();
  for (double& v : c.b) v = -5.0 * rng.next_normal();
  for (double& v : c.c) v = 10.0 * rng.next_normal();
  return c;
}

std::string OscillatoryCoeffs::to_text() const {
  std::string out;
  char line[128];
  for (std::size_t k = 0; k < kCount; ++k) {
    std::snprintf(line, sizeof line, "%zu %.17g %.17g %.17g\n", k + 1, a[k], b[k], c[k]);
    out += line;
  }
  return out;
}

void OscillatoryCoeffs::save(const std::string& path) const {
  std::ofstream f(path);
  if (!f) throw Error("cannot write coefficient file '" + path + "'");
  f << to_text();
  if (!f) throw Error("error writing coefficient file '" + path + "'");
}

OscillatoryCoeffs OscillatoryCoeffs::load(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error("cannot open coefficient file '" + path + "'");
  OscillatoryCoeffs c;
  std::array<bool, kCount> seen{};
  std::string line;
  int lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream is(line);
    std::size_t k = 0;
    double a = 0, b = 0, cc = 0;
    if (!(is >> k >> a >> b >> cc) || k < 1 || k > kCount)
      throw Error(path + ":" + std::to_string(lineno) + ": expected 'k a_k b_k c_k' with 1 <= k <= 20");
    c.a[k - 1] = a;
    c.b[k - 1] = b;
    c.c[k - 1] = cc;
    seen[k - 1] = true;
  }
  for (std::size_t k = 0; k < kCount; ++k)
    if (!seen[k]) throw Error(path + ": missing coefficients for k=" + std::to_string(k + 1));
  return c;
}

std::string default_coeff_path() { return std::string(SAL_DATA_DIR) + "/oscillatory_coeffs.txt"; }

double target_nondiff(double x) {
  const double pi = std::numbers::pi;
  const double p1 = std::abs(std::cos(pi * (x - 0.3)) - 0.7);
  const double p2 = std::abs(std::cos(2.0 * pi * (p1 - 0.5)) - 0.5);
  const double p3 = -std::abs(p2 - 1.3) + 1.3;
  const double p4 = -std::abs(p3 - 0.9) + 0.9;
  return (x + 1.0) * p4;
}

std::vector<double> target_oscillatory(const OscillatoryCoeffs& coeffs, double x) {
  std::vector<double> y(OscillatoryCoeffs::kCount);
  const double s = std::sin(100.0 * x);
  for (std::size_t k = 0; k < OscillatoryCoeffs::kCount; ++k)
    y[k] = (coeffs.a[k] * x * x + coeffs.b[k] * x + coeffs.c[k]) * s;
  return y;
}

TargetFn TargetFn::nondiff() { return TargetFn(); }

TargetFn TargetFn::oscillatory(OscillatoryCoeffs coeffs) {
  TargetFn f;
  f.kind_ = Kind::Oscillatory;
  f.coeffs_ = coeffs;
  return f;
}

TargetFn TargetFn::custom(std::vector<double> xs, Matrix ys) {
  if (xs.size() < 2) throw Error("custom target: need at least two knots");
  if (ys.rows() != xs.size() || ys.cols() == 0) throw ShapeError("custom target: table shape does not match knots");
  for (std::size_t i = 1; i < xs.size(); ++i)
    if (!(xs[i] > xs[i - 1])) throw Error("custom target: knots must be strictly increasing");
  TargetFn f;
  f.kind_ = Kind::Custom;
  f.knots_ = std::move(xs);
  f.table_ = std::move(ys);
  return f;
}

TargetFn TargetFn::custom_from_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open custom target file '" + path + "'");
  std::vector<double> xs;
  std::vector<double> vals;
  std::size_t width = 0;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    bool numeric = true;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(cell, &used));
        if (cell.find_first_not_of(" \t", used) != std::string::npos) numeric = false;
      } catch (const std::exception&) {
        numeric = false;
      }
    }
    if (!numeric) {
      if (xs.empty() && lineno == 1) continue;  // header
      throw Error(path + ":" + std::to_string(lineno) + ": non-numeric field");
    }
    if (row.size() < 2) throw Error(path + ":" + std::to_string(lineno) + ": expected x and at least one y column");
    if (width == 0) width = row.size() - 1;
    if (row.size() - 1 != width) throw Error(path + ":" + std::to_string(lineno) + ": inconsistent column count");
    xs.push_back(row[0]);
    vals.insert(vals.end(), row.begin() + 1, row.end());
  }
  const std::size_t n = xs.size();
  return custom(std::move(xs), Matrix::from_rows(n, width, std::move(vals)));
}

std::size_t TargetFn::output_dim() const {
  switch (kind_) {
    case Kind::NonDiff:
      return 1;
    case Kind::Oscillatory:
      return OscillatoryCoeffs::kCount;
    case Kind::Custom:
      return table_.cols();
  }
  return 1;
}

std::vector<double> TargetFn::operator()(double x) const {
  switch (kind_) {
    case Kind::NonDiff:
      return {target_nondiff(x)};
    case Kind::Oscillatory:
      return target_oscillatory(coeffs_, x);
    case Kind::Custom: {
      const std::size_t t = table_.cols();
      if (x <= knots_.front()) return {table_.row(0).begin(), table_.row(0).end()};
      if (x >= knots_.back()) return {table_.row(knots_.size() - 1).begin(), table_.row(knots_.size() - 1).end()};
      const auto it = std::upper_bound(knots_.begin(), knots_.end(), x);
      const std::size_t hi = static_cast<std::size_t>(it - knots_.begin());
      const std::size_t lo = hi - 1;
      const double w = (x - knots_[lo]) / (knots_[hi] - knots_[lo]);
      std::vector<double> y(t);
      for (std::size_t j = 0; j < t; ++j) y[j] = (1.0 - w) * table_(lo, j) + w * table_(hi, j);
      return y;
    }
  }
  return {};
}

std::vector<double> Dataset::grid() const {
  std::vector<double> g(inputs.rows());
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = inputs(i, 0);
  return g;
}

namespace {

Dataset fill_targets(Dataset d, const TargetFn& target) {
  d.targets = Matrix(d.inputs.rows(), target.output_dim());
  for (std::size_t i = 0; i < d.inputs.rows(); ++i) {
    const std::vector<double> y = target(d.inputs(i, 0));
    std::copy(y.begin(), y.end(), d.targets.row(i).begin());
  }
  return d;
}

}  // namespace

Dataset make_train(const TargetFn& target, double a, double b, double delta, std::size_t m) {
  if (m < 2) throw Error("make_train: need at least two grid points");
  if (!(b > a)) throw Error("make_train: interval must satisfy a < b");
  if (delta < 0.0) throw Error("make_train: delta must be nonnegative");
  Dataset d;
  d.kind = Dataset::Kind::TrainGrid;
  d.a = a;
  d.b = b;
  d.delta = delta;
  const double lo = a - delta;
  const double hi = b + delta;
  const double span = hi - lo;
  const double denom = static_cast<double>(m - 1);
  d.inputs = Matrix(m, 1);
  for (std::size_t n = 0; n < m; ++n) d.inputs(n, 0) = lo + span * (static_cast<double>(n) / denom);
  d.inputs(m - 1, 0) = hi;
  return fill_targets(std::move(d), target);
}

Dataset make_test(const TargetFn& target, double a, double b, std::size_t m, std::uint64_t seed) {
  if (m < 1) throw Error("make_test: need at least one point");
  if (!(b > a)) throw Error("make_test: interval must satisfy a < b");
  Dataset d;
  d.kind = Dataset::Kind::TestUniform;
  d.a = a;
  d.b = b;
  d.seed = seed;
  SplitMix64 rng(seed);
  d.inputs = Matrix(m, 1);
  for (std::size_t n = 0; n < m; ++n) d.inputs(n, 0) = a + (b - a) * rng.next_double();
  return fill_targets(std::move(d), target);
}

}  // namespace sal
