#include "sal/activation.hpp"

#include <cmath>

#include "sal/error.hpp"
#include "sal/kernels.hpp"

namespace sal {

Activation Activation::leaky_relu(double slope) {
  Activation a(ActivationType::LeakyReLU);
  a.slope_ = slope;
  return a;
}

Activation Activation::combination(std::vector<double> weights, std::vector<Activation> basis) {
  if (weights.size() != basis.size())
    throw ShapeError("combination activation: " + std::to_string(weights.size()) + " weights for " +
                     std::to_string(basis.size()) + " basis functions");
  if (basis.empty()) throw Error("combination activation: empty basis");
  for (const auto& b : basis)
    if (b.type() == ActivationType::Combination) throw Error("combination activation: nested combinations");
  Activation a(ActivationType::Combination);
  a.weights_ = std::move(weights);
  a.basis_ = std::move(basis);
  return a;
}

double Activation::operator()(double z) const {
  switch (type_) {
    case ActivationType::Identity:
      return z;
    case ActivationType::ReLU:
      return z > 0.0 ? z : 0.0;
    case ActivationType::LeakyReLU:
      return z > 0.0 ? z : slope_ * z;
    case ActivationType::Tanh:
      return std::tanh(z);
    case ActivationType::SinCosHalf:
      return 0.5 * std::sin(z) + 0.5 * std::cos(z);
    case ActivationType::Combination: {
      double s = 0.0;
      for (std::size_t j = 0; j < basis_.size(); ++j) s += weights_[j] * basis_[j](z);
      return s;
    }
  }
  return z;
}

double Activation::derivative(double z) const {
  switch (type_) {
    case ActivationType::Identity:
      return 1.0;
    case ActivationType::ReLU:
      return z > 0.0 ? 1.0 : 0.0;
    case ActivationType::LeakyReLU:
      return z > 0.0 ? 1.0 : slope_;
    case ActivationType::Tanh: {
      const double t = std::tanh(z);
      return 1.0 - t * t;
    }
    case ActivationType::SinCosHalf:
      return 0.5 * std::cos(z) - 0.5 * std::sin(z);
    case ActivationType::Combination: {
      double s = 0.0;
      for (std::size_t j = 0; j < basis_.size(); ++j) s += weights_[j] * basis_[j].derivative(z);
      return s;
    }
  }
  return 1.0;
}

void Activation::apply(std::span<const double> z, std::span<double> out) const {
  if (z.size() != out.size()) throw ShapeError("activation apply: size mismatch");
  if (type_ == ActivationType::ReLU) {
    kernels::relu(z.data(), out.data(), z.size());
    return;
  }
  if (type_ == ActivationType::Identity) {
    if (out.data() != z.data())
      for (std::size_t i = 0; i < z.size(); ++i) out[i] = z[i];
    return;
  }
  for (std::size_t i = 0; i < z.size(); ++i) out[i] = (*this)(z[i]);
}

bool Activation::vanishes_at_zero() const { return (*this)(0.0) == 0.0; }

std::string Activation::name() const {
  switch (type_) {
    case ActivationType::Identity:
      return "identity";
    case ActivationType::ReLU:
      return "relu";
    case ActivationType::LeakyReLU:
      return "leaky_relu";
    case ActivationType::Tanh:
      return "tanh";
    case ActivationType::SinCosHalf:
      return "sincos_half";
    case ActivationType::Combination:
      return "combination";
  }
  return "identity";
}

Activation Activation::from_name(const std::string& name, double slope) {
  if (name == "identity") return identity();
  if (name == "relu") return relu();
  if (name == "leaky_relu") return leaky_relu(slope);
  if (name == "tanh") return tanh();
  if (name == "sincos_half") return sincos_half();
  throw Error("unknown activation '" + name + "'");
}

std::vector<double> activation_eval(const Activation& act, std::span<const double> z) {
  std::vector<double> out(z.size());
  act.apply(z, out);
  return out;
}

}  // namespace sal
