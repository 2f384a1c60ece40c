#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "sal/matrix.hpp"
#include "sal/pooling.hpp"
#include "sal/rng.hpp"

namespace sal {

/// Pooled affine least squares for one grade:
///   J(W, b) = sum_j ||e_j - P(W phi_j + b)||^2 + ridge (||W||_F^2 + ||b||^2).
/// Parameters are handled as theta = [W | b] (width x (d+1)).
struct AffineLsqProblem {
  Matrix features;      // m x d, rows phi_j
  Matrix features_aug;  // m x (d+1), features with a ones column
  Matrix targets;       // m x t
  PoolingSpec pooling;  // in_dim = width, out_dim = t
  double ridge = 0.0;
  /// Per-sample sums are split into this many contiguous blocks and reduced
  /// in block order, so results depend only on the count.
  std::size_t partitions = 1;

  std::size_t samples() const { return features.rows(); }
  std::size_t feature_dim() const { return features.cols(); }
  std::size_t width() const { return pooling.in_dim(); }
  std::size_t outputs() const { return pooling.out_dim; }
};

AffineLsqProblem assemble(const Matrix& features, const Matrix& targets, const PoolingSpec& pooling,
                          double ridge = 0.0, std::size_t partitions = 1);

Matrix pack_theta(const Matrix& weight, const std::vector<double>& bias);
Matrix theta_weight(const Matrix& theta);
std::vector<double> theta_bias(const Matrix& theta);

double objective(const AffineLsqProblem& problem, const Matrix& theta);
double objective(const AffineLsqProblem& problem, const Matrix& weight, const std::vector<double>& bias);

/// dJ/dtheta, same shape as theta.
Matrix gradient(const AffineLsqProblem& problem, const Matrix& theta);

/// P(W phi_j + b) at every sample (m x t).
Matrix pooled_predictions(const AffineLsqProblem& problem, const Matrix& theta);

/// 2 sigma_max(P)^2 sigma_max(features_aug)^2 + 2 ridge, times `safety`.
/// Singular values come from power iteration; the Frobenius bound is used
/// when it does not converge.
double lipschitz_upper_bound(const AffineLsqProblem& problem, double safety = 1.0);

enum class SolverMethod { Nesterov, DirectMinNorm };
enum class StopReason { Epsilon, MaxIters, Direct };

std::string to_string(SolverMethod m);
SolverMethod solver_method_from(const std::string& name);
std::string to_string(StopReason r);

struct SolverConfig {
  SolverMethod method = SolverMethod::Nesterov;
  double epsilon = 1e-7;
  int max_iters = 5000;
  double lipschitz_safety = 1.0;
  /// Starting theta; zero when empty.
  std::optional<Matrix> init;
  /// Record J every `trace_stride` iterations (0 disables the trace).
  int trace_stride = 0;

  void validate() const;
};

struct SolveStats {
  int iterations = 0;
  double final_objective = 0.0;
  std::vector<int> trace_iters;
  std::vector<double> trace_values;
  double wall_time_s = 0.0;
  StopReason stop_reason = StopReason::Direct;
  double lipschitz = 0.0;
  std::string note;
};

struct AffineSolution {
  Matrix theta;
  SolveStats stats;
  Matrix weight() const { return theta_weight(theta); }
  std::vector<double> bias() const { return theta_bias(theta); }
};

/// Constant-step accelerated gradient (step 1/L). Stops when the relative
/// objective change falls below epsilon or after max_iters steps.
AffineSolution nesterov_solve(const AffineLsqProblem& problem, const SolverConfig& config);

/// Unconstrained least squares for the pooled map (CG on the normal
/// equations, column by column) followed by the minimum-norm lift through P.
/// With an initial theta the lift is applied to the correction, so the
/// returned theta differs from the initial one by a vector in range(P^T).
/// Requires ridge = 0.
AffineSolution direct_solve(const AffineLsqProblem& problem, const SolverConfig& config = {});

AffineSolution solve(const AffineLsqProblem& problem, const SolverConfig& config);

/// max over (a, b) of |<R, phi_b (P e_a)^T>| / (||E|| ||phi_b|| ||P e_a||) with
/// R the residual and E the targets: the scaled gradient entry of largest
/// size. Zero at an exact optimum of the unregularized problem.
double residual_orthogonality(const AffineLsqProblem& problem, const Matrix& theta);

/// theta - P^T (P P^T)^{-1} P theta: the part of theta invisible after pooling.
Matrix pooling_null_projection(const PoolingSpec& pooling, const Matrix& theta);

/// theta with rows ~ gain * N(0, 2 / fan_in) weights and zero bias, projected
/// onto the pooling null space so the pooled output starts at zero.
Matrix pooled_null_init(const PoolingSpec& pooling, std::size_t feature_dim, double gain, SplitMix64& rng);

/// Partition count from SAL_LEARN_THREADS (default 1).
std::size_t partitions_from_env();

}  // namespace sal
