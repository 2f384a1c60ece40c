#pragma once

#include <span>
#include <string>
#include <vector>

namespace sal {

enum class ActivationType { Identity, ReLU, LeakyReLU, Tanh, SinCosHalf, Combination };

/// Elementwise activation. A Combination is a linear mix sum_j w_j sigma_j of
/// non-combination basis activations (the data-selected activation of a grade).
class Activation {
 public:
  Activation() = default;

  static Activation identity() { return Activation(ActivationType::Identity); }
  static Activation relu() { return Activation(ActivationType::ReLU); }
  static Activation leaky_relu(double slope);
  static Activation tanh() { return Activation(ActivationType::Tanh); }
  /// 0.5 sin(x) + 0.5 cos(x)
  static Activation sincos_half() { return Activation(ActivationType::SinCosHalf); }
  static Activation combination(std::vector<double> weights, std::vector<Activation> basis);

  ActivationType type() const { return type_; }
  double slope() const { return slope_; }
  const std::vector<double>& weights() const { return weights_; }
  const std::vector<Activation>& basis() const { return basis_; }

  double operator()(double z) const;
  /// d sigma / dz. ReLU uses 0 at the kink.
  double derivative(double z) const;
  /// out[i] = sigma(z[i]); out may alias z.
  void apply(std::span<const double> z, std::span<double> out) const;

  /// True when sigma(0) == 0 exactly.
  bool vanishes_at_zero() const;

  /// Stable lowercase identifier used in config and model files.
  std::string name() const;
  static Activation from_name(const std::string& name, double slope = 0.01);

  friend bool operator==(const Activation&, const Activation&) = default;

 private:
  explicit Activation(ActivationType t) : type_(t) {}

  ActivationType type_ = ActivationType::Identity;
  double slope_ = 0.0;
  std::vector<double> weights_;
  std::vector<Activation> basis_;
};

std::vector<double> activation_eval(const Activation& act, std::span<const double> z);

}  // namespace sal
