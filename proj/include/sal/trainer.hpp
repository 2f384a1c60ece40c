#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sal/activation.hpp"
#include "sal/bench_data.hpp"
#include "sal/error.hpp"
#include "sal/mlp.hpp"
#include "sal/model.hpp"
#include "sal/qp_solver.hpp"
#include "sal/smoothing.hpp"

namespace sal {

enum class SmoothingTarget { Component, Residual, None };
std::string to_string(SmoothingTarget t);
SmoothingTarget smoothing_target_from(const std::string& name);

/// Starting point of the convex solve. NullProjectedHe draws
/// gain * N(0, 2 / fan_in) weights and removes the part visible through the
/// pooling, so the first iterate predicts zero but the rows of W differ.
enum class InitKind { Zero, NullProjectedHe };
std::string to_string(InitKind k);
InitKind init_kind_from(const std::string& name);

struct GradeConfig {
  std::size_t width = 100;
  Activation activation = Activation::relu();
  /// Non-empty: fit a combination of these activations after the grade.
  std::vector<Activation> select_from;
  double tau = 0.0;
  WindowSpec window;
  int quad_points = 200;
  bool renormalize = false;
  SmoothingTarget smoothing_target = SmoothingTarget::Component;
  SolverMethod solver = SolverMethod::Nesterov;
  double epsilon = 1e-7;
  int max_iters = 5000;
  double lipschitz_safety = 1.0;
  InitKind init = InitKind::NullProjectedHe;
  double init_gain = 6.0;
  double ridge = 0.0;

  void validate(std::size_t t) const;
  SmootherConfig smoother() const { return {tau, window, quad_points, renormalize}; }
};

struct TrainConfig {
  std::vector<GradeConfig> grades;
  std::optional<SsgConfig> hybrid_head;
  bool record_test_metrics = true;
  std::uint64_t seed = 1;
  std::size_t partitions = 1;
  /// Keep the per-grade residual matrices in the result (tests, diagnostics).
  bool keep_residuals = false;
};

struct GradeRecord {
  std::size_t grade = 0;
  double tau = 0.0;
  double epsilon = 0.0;
  int iterations = 0;
  double train_time_s = 0.0;
  double rse_train = 0.0;
  double rse_test = 0.0;
  std::string stop_reason;
  /// Largest residual/parameter-direction cosine after the fit.
  double orthogonality = 0.0;
  std::string note;
};

struct TrainReport {
  std::vector<GradeRecord> records;
  double total_time_s = 0.0;
  std::vector<std::string> notes;
};

struct TrainResult {
  SalModel model;
  TrainReport report;
  /// targets - predictions at the training points after the last grade.
  Matrix residual;
  /// Unsmoothed-or-smoothed component values at the training points, per grade.
  std::vector<Matrix> components;
  /// residuals[k] after k grades (k = 0: targets or targets - head), when kept.
  std::vector<Matrix> residuals;
};

/// Training failure with everything finished before it.
class TrainingError : public Error {
 public:
  TrainingError(const std::string& what, SalModel model, TrainReport report)
      : Error(what), partial_model(std::move(model)), partial_report(std::move(report)) {}
  SalModel partial_model;
  TrainReport partial_report;
};

/// Sum of squared errors over sum of squared targets. Throws on all-zero targets.
double compute_rse(const Matrix& predictions, const Matrix& targets);

struct GradeOutcome {
  GradeParams params;
  Matrix component;      // values subtracted from the residual (smoothed if configured)
  Matrix residual;       // next grade's target
  Matrix features;       // N_k at the training points
  GradeRecord record;
};

/// Fits grade k = model.grades.size() + 1 on `features` (N_{k-1} at the
/// training points) against `residual`.
GradeOutcome train_grade(const SalModel& model, const Dataset& train, const Matrix& features, const Matrix& residual,
                         const GradeConfig& cfg, std::uint64_t seed, std::size_t partitions = 1);

struct ActivationSelection {
  std::vector<double> weights;
  bool singular = false;
  Matrix fitted;  // P sum_j alpha_j sigma_j(A)
};

/// Least-squares weights alpha minimizing ||target - P sum_j alpha_j sigma_j(A)||
/// over the training rows. A is the matrix of pre-activations (m x width).
ActivationSelection select_activation(const Matrix& preactivations, const PoolingSpec& pooling, const Matrix& target,
                                      const std::vector<Activation>& basis);

TrainResult train_sal(const Dataset& train, const Dataset* test, const TrainConfig& cfg);

/// train_sal with cfg.hybrid_head set: a shallow network trained first, then
/// SAL grades on its residual using its last hidden layer as features.
TrainResult hybrid_train(const Dataset& train, const Dataset* test, const SsgConfig& head,
                         const std::vector<GradeConfig>& grades, std::uint64_t seed = 1);

}  // namespace sal
