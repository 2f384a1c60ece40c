#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "sal/matrix.hpp"

namespace sal {

/// Coefficients of psi_k(x) = (a_k x^2 + b_k x + c_k) sin(100 x), k = 1..20.
struct OscillatoryCoeffs {
  static constexpr std::size_t kCount = 20;
  std::array<double, kCount> a{};
  std::array<double, kCount> b{};
  std::array<double, kCount> c{};

  /// a = 5 N(0,1), b = -5 N(0,1), c = 10 N(0,1), drawn in that order (20 each)
  /// from SplitMix64(seed) with Box-Muller.
  static OscillatoryCoeffs generate(std::uint64_t seed);
  /// Plain text, one line per k: "k a_k b_k c_k" with 17 significant digits.
  static OscillatoryCoeffs load(const std::string& path);
  void save(const std::string& path) const;
  std::string to_text() const;

  friend bool operator==(const OscillatoryCoeffs&, const OscillatoryCoeffs&) = default;
};

/// Path of the canonical coefficient file shipped with the repository.
std::string default_coeff_path();

double target_nondiff(double x);
std::vector<double> target_oscillatory(const OscillatoryCoeffs& coeffs, double x);

/// Scalar-input benchmark target with t outputs.
class TargetFn {
 public:
  enum class Kind { NonDiff, Oscillatory, Custom };

  static TargetFn nondiff();
  static TargetFn oscillatory(OscillatoryCoeffs coeffs);
  /// Tabulated x -> y (t columns) with linear interpolation between knots and
  /// constant extension outside. Knots must be strictly increasing.
  static TargetFn custom(std::vector<double> xs, Matrix ys);
  /// CSV with columns x, y_1..y_t (optional non-numeric header row).
  static TargetFn custom_from_csv(const std::string& path);

  Kind kind() const { return kind_; }
  std::size_t output_dim() const;
  std::vector<double> operator()(double x) const;

 private:
  Kind kind_ = Kind::NonDiff;
  OscillatoryCoeffs coeffs_{};
  std::vector<double> knots_;
  Matrix table_;
};

struct Dataset {
  enum class Kind { TrainGrid, TestUniform };

  Matrix inputs;   // m x s
  Matrix targets;  // m x t
  Kind kind = Kind::TrainGrid;
  double a = 0.0;
  double b = 0.0;
  double delta = 0.0;
  std::uint64_t seed = 0;

  std::size_t size() const { return inputs.rows(); }
  std::size_t input_dim() const { return inputs.cols(); }
  std::size_t output_dim() const { return targets.cols(); }
  /// First input coordinate of every sample (s = 1 datasets).
  std::vector<double> grid() const;
};

/// m equally spaced points on [a - delta, b + delta], endpoints included.
Dataset make_train(const TargetFn& target, double a, double b, double delta, std::size_t m);
/// m points drawn i.i.d. uniform on [a, b] from SplitMix64(seed).
Dataset make_test(const TargetFn& target, double a, double b, std::size_t m, std::uint64_t seed);

}  // namespace sal
