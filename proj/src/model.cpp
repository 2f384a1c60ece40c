#include "sal/model.hpp"

#include <cmath>
#include <string>

#include "sal/error.hpp"
#include "sal/kernels.hpp"

namespace sal {

std::size_t SalModel::feature_width(std::size_t k) const {
  if (k == 0) return hybrid_head ? hybrid_head->feature_width() : input_dim;
  if (k > grades.size()) throw ShapeError("feature_width: grade index out of range");
  return grades[k - 1].width();
}

void SalModel::validate() const {
  if (input_dim == 0 || output_dim == 0) throw ShapeError("model: dimensions must be positive");
  if (hybrid_head) {
    hybrid_head->validate();
    if (hybrid_head->input_dim != input_dim || hybrid_head->output_dim != output_dim)
      throw ShapeError("model: hybrid head dimensions do not match the model");
  }
  for (std::size_t k = 1; k <= grades.size(); ++k) {
    const GradeParams& g = grades[k - 1];
    const std::string where = "model: grade " + std::to_string(k);
    if (g.weight.cols() != feature_width(k - 1))
      throw ShapeError(where + " weight has " + std::to_string(g.weight.cols()) + " columns, expected " +
                       std::to_string(feature_width(k - 1)));
    if (g.bias.size() != g.weight.rows()) throw ShapeError(where + " bias size mismatch");
    if (g.pooling.out_dim != output_dim) throw ShapeError(where + " pooling does not map onto the output dimension");
    if (g.pooling.in_dim() != g.weight.rows()) throw ShapeError(where + " pooling input does not match the width");
    if (g.smoothing.enabled()) {
      if (input_dim != 1) throw Error(where + ": smoothing is only supported for scalar inputs");
      g.smoothing.config().validate();
    }
  }
}

namespace {

void check_grade(const SalModel& model, std::size_t k, bool allow_zero) {
  if ((!allow_zero && k == 0) || k > model.grades.size())
    throw ShapeError("grade index " + std::to_string(k) + " out of range (model has " +
                     std::to_string(model.grades.size()) + " grades)");
}

void check_input(const SalModel& model, const Matrix& x) {
  if (x.cols() != model.input_dim)
    throw ShapeError("input has " + std::to_string(x.cols()) + " columns, model expects " +
                     std::to_string(model.input_dim));
}

Matrix row_matrix(std::span<const double> x) { return Matrix::from_rows(1, x.size(), {x.begin(), x.end()}); }

std::vector<double> first_row(const Matrix& m) { return {m.row(0).begin(), m.row(0).end()}; }

Matrix affine(const GradeParams& g, const Matrix& features) {
  Matrix z = matmul_nt(features, g.weight);
  for (std::size_t r = 0; r < z.rows(); ++r) kernels::axpy(1.0, g.bias.data(), z.data() + r * z.cols(), z.cols());
  return z;
}

}  // namespace

Matrix features_batch(const SalModel& model, std::size_t k, const Matrix& x) {
  check_grade(model, k, true);
  check_input(model, x);
  Matrix h = model.hybrid_head ? mlp_hidden_output(*model.hybrid_head, x) : x;
  for (std::size_t j = 1; j <= k; ++j) {
    const GradeParams& g = model.grades[j - 1];
    Matrix z = affine(g, h);
    g.activation.apply(z.values(), z.values());
    h = std::move(z);
  }
  return h;
}

std::vector<double> grade_features(const SalModel& model, std::size_t k, std::span<const double> x) {
  return first_row(features_batch(model, k, row_matrix(x)));
}

Matrix preactivations_batch(const SalModel& model, std::size_t k, const Matrix& x) {
  check_grade(model, k, false);
  return affine(model.grades[k - 1], features_batch(model, k - 1, x));
}

Matrix raw_component_batch(const SalModel& model, std::size_t k, const Matrix& x) {
  check_grade(model, k, false);
  const GradeParams& g = model.grades[k - 1];
  return pool_each_row(g.pooling, affine(g, features_batch(model, k - 1, x)));
}

Matrix component_batch(const SalModel& model, std::size_t k, const Matrix& x) {
  check_grade(model, k, false);
  const GradeParams& g = model.grades[k - 1];
  if (!g.smoothing.enabled()) return raw_component_batch(model, k, x);
  check_input(model, x);
  if (model.input_dim != 1) throw Error("component smoothing requires scalar inputs");
  const BatchFunction raw = [&](std::span<const double> pts) {
    return raw_component_batch(model, k, Matrix::column(pts));
  };
  std::vector<double> xs(x.rows());
  for (std::size_t i = 0; i < xs.size(); ++i) xs[i] = x(i, 0);
  return smooth_points(raw, g.smoothing.config(), xs);
}

std::vector<double> component_eval(const SalModel& model, std::size_t k, std::span<const double> x) {
  return first_row(component_batch(model, k, row_matrix(x)));
}

Matrix predict_batch(const SalModel& model, const Matrix& x) {
  check_input(model, x);
  if (model.grades.empty() && !model.hybrid_head) throw Error("model_predict: model has no grades");
  Matrix out = model.hybrid_head ? mlp_forward(*model.hybrid_head, x) : Matrix(x.rows(), model.output_dim);
  Matrix h = model.hybrid_head ? mlp_hidden_output(*model.hybrid_head, x) : x;
  for (std::size_t k = 1; k <= model.grades.size(); ++k) {
    Matrix raw = advance_grade(model.grades[k - 1], h);
    if (model.grades[k - 1].smoothing.enabled())
      out += component_batch(model, k, x);
    else
      out += raw;
  }
  return out;
}

Matrix advance_grade(const GradeParams& g, Matrix& h) {
  Matrix z = affine(g, h);
  Matrix raw = pool_each_row(g.pooling, z);
  g.activation.apply(z.values(), z.values());
  h = std::move(z);
  return raw;
}

std::vector<double> model_predict(const SalModel& model, std::span<const double> x) {
  return first_row(predict_batch(model, row_matrix(x)));
}

double inner_product_m(const Matrix& u, const Matrix& v) {
  if (u.rows() != v.rows() || u.cols() != v.cols()) throw ShapeError("inner_product_m: shape mismatch");
  return kernels::dot(u.data(), v.data(), u.size());
}

double norm_m(const Matrix& u) { return std::sqrt(inner_product_m(u, u)); }

}  // namespace sal
