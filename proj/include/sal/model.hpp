#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sal/activation.hpp"
#include "sal/matrix.hpp"
#include "sal/mlp.hpp"
#include "sal/pooling.hpp"
#include "sal/smoothing.hpp"

namespace sal {

/// Smoothing stored with a grade. tau = 0 disables it.
struct GradeSmoothing {
  double tau = 0.0;
  WindowSpec window;
  int quad_points = 200;
  bool renormalize = false;

  bool enabled() const { return tau > 0.0; }
  SmootherConfig config() const { return {tau, window, quad_points, renormalize}; }

  friend bool operator==(const GradeSmoothing&, const GradeSmoothing&) = default;
};

/// One trained grade: W_k (m_k x m_{k-1}), b_k (m_k), pooling onto t outputs,
/// the activation used for the next grade's features, and optional smoothing
/// of the grade's component.
struct GradeParams {
  Matrix weight;
  std::vector<double> bias;
  PoolingSpec pooling;
  Activation activation;
  GradeSmoothing smoothing;

  std::size_t width() const { return weight.rows(); }

  friend bool operator==(const GradeParams&, const GradeParams&) = default;
};

/// Superposition model: prediction = [head(x)] + sum_k f_k(x), summed in
/// ascending grade order. Immutable once trained; concurrent evaluation is safe.
struct SalModel {
  std::size_t input_dim = 1;
  std::size_t output_dim = 1;
  std::vector<GradeParams> grades;
  std::optional<MlpParams> hybrid_head;

  /// Width of N_k (k = 0: input or hybrid head features).
  std::size_t feature_width(std::size_t k) const;
  void validate() const;

  friend bool operator==(const SalModel&, const SalModel&) = default;
};

/// N_k(x): N_0 = x (or the hybrid head's last hidden layer), and
/// N_k = sigma_k(W_k N_{k-1} + b_k).
std::vector<double> grade_features(const SalModel& model, std::size_t k, std::span<const double> x);
Matrix features_batch(const SalModel& model, std::size_t k, const Matrix& x);

/// W_k N_{k-1} + b_k at each row of x (k >= 1).
Matrix preactivations_batch(const SalModel& model, std::size_t k, const Matrix& x);

/// f_k(x) = P_{mu_k}(W_k N_{k-1}(x) + b_k), smoothed when the grade stores tau > 0.
std::vector<double> component_eval(const SalModel& model, std::size_t k, std::span<const double> x);
Matrix component_batch(const SalModel& model, std::size_t k, const Matrix& x);
/// The unsmoothed pooled affine image, regardless of stored tau.
Matrix raw_component_batch(const SalModel& model, std::size_t k, const Matrix& x);

/// Applies grade g to features h = N_{k-1} (rows are samples): returns the
/// unsmoothed component and replaces h by N_k.
Matrix advance_grade(const GradeParams& g, Matrix& h);
std::vector<double> model_predict(const SalModel& model, std::span<const double> x);
Matrix predict_batch(const SalModel& model, const Matrix& x);

/// <u, v>_m = sum_j u_j^T v_j over sample rows.
double inner_product_m(const Matrix& u, const Matrix& v);
double norm_m(const Matrix& u);

/// JSON model document; see README for the schema.
std::string model_to_json(const SalModel& model);
SalModel model_from_json(const std::string& text);
void save_model(const SalModel& model, const std::string& path);
SalModel load_model(const std::string& path);

std::string mlp_to_json(const MlpParams& params);
MlpParams mlp_from_json(const std::string& text);
void save_mlp(const MlpParams& params, const std::string& path);
MlpParams load_mlp(const std::string& path);

}  // namespace sal
