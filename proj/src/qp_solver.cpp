#include "sal/qp_solver.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <string>
#include <thread>

#include "sal/error.hpp"
#include "sal/kernels.hpp"

namespace sal {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

Eigen::MatrixXd to_eigen(const Matrix& a) {
  Eigen::MatrixXd out(a.rows(), a.cols());
  for (std::size_t r = 0; r < a.rows(); ++r)
    for (std::size_t c = 0; c < a.cols(); ++c) out(r, c) = a(r, c);
  return out;
}

Matrix from_eigen(const Eigen::MatrixXd& a) {
  Matrix out(a.rows(), a.cols());
  for (Eigen::Index r = 0; r < a.rows(); ++r)
    for (Eigen::Index c = 0; c < a.cols(); ++c) out(r, c) = a(r, c);
  return out;
}

// Row block [begin, end) of partition `p` out of `n` over `rows` rows.
std::pair<std::size_t, std::size_t> block(std::size_t rows, std::size_t n, std::size_t p) {
  return {rows * p / n, rows * (p + 1) / n};
}

template <class F>
void for_partitions(std::size_t n, F&& body) {
  if (n <= 1) {
    body(0);
    return;
  }
  std::vector<std::thread> threads;
  threads.reserve(n - 1);
  for (std::size_t p = 1; p < n; ++p) threads.emplace_back([&body, p] { body(p); });
  body(0);
  for (auto& th : threads) th.join();
}

// A^T B over the shared sample index, reduced block by block in order.
Matrix cross_samples(const Matrix& a, const Matrix& b, std::size_t partitions) {
  const std::size_t rows = a.rows();
  const std::size_t n = std::max<std::size_t>(1, std::min(partitions, rows));
  std::vector<Matrix> parts(n, Matrix(a.cols(), b.cols()));
  for_partitions(n, [&](std::size_t p) {
    const auto [lo, hi] = block(rows, n, p);
    Matrix& c = parts[p];
    for (std::size_t s = lo; s < hi; ++s) {
      const double* ar = a.data() + s * a.cols();
      const double* br = b.data() + s * b.cols();
      for (std::size_t i = 0; i < a.cols(); ++i) kernels::axpy(ar[i], br, c.data() + i * b.cols(), b.cols());
    }
  });
  for (std::size_t p = 1; p < n; ++p) parts[0] += parts[p];
  return std::move(parts[0]);
}

double sum_squares(const Matrix& a, std::size_t partitions) {
  const std::size_t rows = a.rows();
  const std::size_t n = std::max<std::size_t>(1, std::min(partitions, rows));
  std::vector<double> parts(n, 0.0);
  for_partitions(n, [&](std::size_t p) {
    const auto [lo, hi] = block(rows, n, p);
    const double* x = a.data() + lo * a.cols();
    parts[p] = kernels::dot(x, x, (hi - lo) * a.cols());
  });
  double s = 0.0;
  for (double v : parts) s += v;
  return s;
}

void check_theta(const AffineLsqProblem& problem, const Matrix& theta) {
  if (theta.rows() != problem.width() || theta.cols() != problem.feature_dim() + 1)
    throw ShapeError("theta must be " + std::to_string(problem.width()) + " x " +
                     std::to_string(problem.feature_dim() + 1) + ", got " + std::to_string(theta.rows()) + " x " +
                     std::to_string(theta.cols()));
}

// Phi~ Q^T for pooled parameters Q (t x (d+1)).
Matrix predictions_from_pooled(const AffineLsqProblem& problem, const Matrix& q) {
  return matmul_nt(problem.features_aug, q);
}

double objective_from(const AffineLsqProblem& problem, const Matrix& residual, const Matrix& theta) {
  double j = sum_squares(residual, problem.partitions);
  if (problem.ridge > 0.0) j += problem.ridge * frobenius_sq(theta);
  return j;
}

// Gradient given the residual at theta.
Matrix gradient_from(const AffineLsqProblem& problem, const Matrix& residual, const Matrix& theta) {
  Matrix g = cross_samples(residual, problem.features_aug, problem.partitions);
  kernels::scale(-2.0, g.data(), g.size());
  Matrix out = pool_adjoint_rows(problem.pooling, g);
  if (problem.ridge > 0.0) kernels::axpy(2.0 * problem.ridge, theta.data(), out.data(), out.size());
  return out;
}

// Largest eigenvalue of a symmetric PSD operator by power iteration from the
// normalized all-ones vector. Returns nullopt without convergence.
template <class Apply>
std::optional<double> power_iteration(std::size_t dim, Apply&& apply, int max_iter = 200, double tol = 1e-10) {
  std::vector<double> v(dim, 1.0 / std::sqrt(static_cast<double>(dim)));
  double lambda = 0.0;
  for (int it = 0; it < max_iter; ++it) {
    std::vector<double> w = apply(v);
    const double norm = std::sqrt(kernels::dot(w.data(), w.data(), dim));
    if (norm == 0.0) return 0.0;
    if (!std::isfinite(norm)) return std::nullopt;
    for (std::size_t i = 0; i < dim; ++i) v[i] = w[i] / norm;
    if (it > 0 && std::abs(norm - lambda) <= tol * norm) return norm;
    lambda = norm;
  }
  return std::nullopt;
}

Eigen::MatrixXd pooling_gram(const PoolingSpec& pooling) {
  const Eigen::MatrixXd p = to_eigen(pooling_matrix(pooling));
  return p * p.transpose();
}

// (P P^T)^{-1} B for B with out_dim rows.
Matrix solve_pooling_gram(const PoolingSpec& pooling, const Matrix& b) {
  const Eigen::LLT<Eigen::MatrixXd> llt(pooling_gram(pooling));
  if (llt.info() != Eigen::Success) throw NumericError("pooling Gram matrix is not positive definite");
  return from_eigen(llt.solve(to_eigen(b)));
}

// CGLS for min ||A x - rhs||: CG on A^T A x = A^T rhs started at zero, so the
// iterate stays in range(A^T). Returns false on stagnation.
bool cgls(const Matrix& a, std::span<const double> rhs, std::vector<double>& x, int& iterations, double tol) {
  const std::size_t m = a.rows();
  const std::size_t n = a.cols();
  x.assign(n, 0.0);
  std::vector<double> r(rhs.begin(), rhs.end());
  std::vector<double> s(n, 0.0);
  auto apply_t = [&](const std::vector<double>& v, std::vector<double>& out) {
    std::fill(out.begin(), out.end(), 0.0);
    for (std::size_t i = 0; i < m; ++i) kernels::axpy(v[i], a.data() + i * n, out.data(), n);
  };
  apply_t(r, s);
  const double s0 = std::sqrt(kernels::dot(s.data(), s.data(), n));
  iterations = 0;
  if (s0 == 0.0) return true;
  std::vector<double> p = s;
  std::vector<double> q(m);
  double gamma = s0 * s0;
  double best = s0;
  int since_best = 0;
  const int max_iter = static_cast<int>(10 * n);
  const int patience = static_cast<int>(std::max<std::size_t>(n, 10));
  while (iterations < max_iter) {
    ++iterations;
    for (std::size_t i = 0; i < m; ++i) q[i] = kernels::dot(a.data() + i * n, p.data(), n);
    const double qq = kernels::dot(q.data(), q.data(), m);
    if (qq == 0.0) return false;
    const double alpha = gamma / qq;
    kernels::axpy(alpha, p.data(), x.data(), n);
    kernels::axpy(-alpha, q.data(), r.data(), m);
    apply_t(r, s);
    const double gamma_new = kernels::dot(s.data(), s.data(), n);
    const double sn = std::sqrt(gamma_new);
    if (!std::isfinite(sn)) return false;
    if (sn <= tol * s0) return true;
    if (sn < 0.5 * best) {
      best = sn;
      since_best = 0;
    } else if (++since_best > patience) {
      return false;
    }
    const double beta = gamma_new / gamma;
    gamma = gamma_new;
    for (std::size_t i = 0; i < n; ++i) p[i] = s[i] + beta * p[i];
  }
  return false;
}

}  // namespace

std::size_t partitions_from_env() {
  const char* v = std::getenv("SAL_LEARN_THREADS");
  if (v == nullptr || *v == '\0') return 1;
  char* end = nullptr;
  const long n = std::strtol(v, &end, 10);
  if (end == v || *end != '\0' || n < 1) throw Error(std::string("SAL_LEARN_THREADS must be a positive integer, got '") + v + "'");
  return static_cast<std::size_t>(n);
}

AffineLsqProblem assemble(const Matrix& features, const Matrix& targets, const PoolingSpec& pooling, double ridge,
                          std::size_t partitions) {
  if (features.rows() != targets.rows())
    throw ShapeError("assemble: " + std::to_string(features.rows()) + " feature rows but " +
                     std::to_string(targets.rows()) + " target rows");
  if (features.rows() == 0) throw ShapeError("assemble: no samples");
  if (pooling.out_dim != targets.cols())
    throw ShapeError("assemble: pooling output dimension " + std::to_string(pooling.out_dim) +
                     " does not match target width " + std::to_string(targets.cols()));
  if (!(ridge >= 0.0) || !std::isfinite(ridge)) throw Error("assemble: ridge must be a nonnegative number");
  if (partitions == 0) throw Error("assemble: partition count must be positive");
  AffineLsqProblem p;
  p.features = features;
  p.features_aug = append_ones_column(features);
  p.targets = targets;
  p.pooling = pooling;
  p.ridge = ridge;
  p.partitions = partitions;
  return p;
}

Matrix pack_theta(const Matrix& weight, const std::vector<double>& bias) {
  if (bias.size() != weight.rows()) throw ShapeError("pack_theta: bias length does not match weight rows");
  Matrix theta(weight.rows(), weight.cols() + 1);
  for (std::size_t r = 0; r < weight.rows(); ++r) {
    std::copy(weight.row(r).begin(), weight.row(r).end(), theta.row(r).begin());
    theta(r, weight.cols()) = bias[r];
  }
  return theta;
}

Matrix theta_weight(const Matrix& theta) {
  if (theta.cols() == 0) throw ShapeError("theta has no columns");
  Matrix w(theta.rows(), theta.cols() - 1);
  for (std::size_t r = 0; r < theta.rows(); ++r)
    std::copy(theta.row(r).begin(), theta.row(r).end() - 1, w.row(r).begin());
  return w;
}

std::vector<double> theta_bias(const Matrix& theta) {
  if (theta.cols() == 0) throw ShapeError("theta has no columns");
  std::vector<double> b(theta.rows());
  for (std::size_t r = 0; r < theta.rows(); ++r) b[r] = theta(r, theta.cols() - 1);
  return b;
}

Matrix pooled_predictions(const AffineLsqProblem& problem, const Matrix& theta) {
  check_theta(problem, theta);
  return predictions_from_pooled(problem, pool_rows(problem.pooling, theta));
}

double objective(const AffineLsqProblem& problem, const Matrix& theta) {
  const Matrix r = problem.targets - pooled_predictions(problem, theta);
  return objective_from(problem, r, theta);
}

double objective(const AffineLsqProblem& problem, const Matrix& weight, const std::vector<double>& bias) {
  return objective(problem, pack_theta(weight, bias));
}

Matrix gradient(const AffineLsqProblem& problem, const Matrix& theta) {
  const Matrix r = problem.targets - pooled_predictions(problem, theta);
  return gradient_from(problem, r, theta);
}

double lipschitz_upper_bound(const AffineLsqProblem& problem, double safety) {
  if (!(safety >= 1.0)) throw Error("lipschitz_safety must be at least 1");
  const Matrix& phi = problem.features_aug;
  const std::size_t m = phi.rows();
  const std::size_t n = phi.cols();
  auto phi_gram = [&](const std::vector<double>& v) {
    std::vector<double> u(m), w(n, 0.0);
    for (std::size_t i = 0; i < m; ++i) u[i] = kernels::dot(phi.data() + i * n, v.data(), n);
    for (std::size_t i = 0; i < m; ++i) kernels::axpy(u[i], phi.data() + i * n, w.data(), n);
    return w;
  };
  const PoolingSpec& pool = problem.pooling;
  auto pool_gram = [&](const std::vector<double>& v) { return pool_apply(pool, pool_adjoint(pool, v)); };
  const auto sphi = power_iteration(n, phi_gram);
  const auto spool = power_iteration(pool.out_dim, pool_gram);
  const double phi_sq = sphi ? *sphi : frobenius_sq(phi);
  const double pool_sq = spool ? *spool : static_cast<double>(pool.out_dim) * pool.weight();
  return safety * (2.0 * pool_sq * phi_sq + 2.0 * problem.ridge);
}

std::string to_string(SolverMethod m) { return m == SolverMethod::Nesterov ? "nesterov" : "direct"; }

SolverMethod solver_method_from(const std::string& name) {
  if (name == "nesterov") return SolverMethod::Nesterov;
  if (name == "direct") return SolverMethod::DirectMinNorm;
  throw Error("unknown solver '" + name + "' (expected 'nesterov' or 'direct')");
}

std::string to_string(StopReason r) {
  switch (r) {
    case StopReason::Epsilon: return "epsilon";
    case StopReason::MaxIters: return "max_iters";
    case StopReason::Direct: return "direct";
  }
  return "unknown";
}

void SolverConfig::validate() const {
  if (!(epsilon > 0.0)) throw Error("solver epsilon must be positive");
  if (max_iters < 1) throw Error("solver max_iters must be at least 1");
  if (!(lipschitz_safety >= 1.0)) throw Error("lipschitz_safety must be at least 1");
  if (trace_stride < 0) throw Error("trace_stride must be nonnegative");
}

AffineSolution nesterov_solve(const AffineLsqProblem& problem, const SolverConfig& config) {
  config.validate();
  const auto t0 = Clock::now();
  const std::size_t width = problem.width();
  const std::size_t cols = problem.feature_dim() + 1;
  Matrix theta = config.init ? *config.init : Matrix(width, cols);
  check_theta(problem, theta);

  AffineSolution out;
  SolveStats& st = out.stats;
  st.lipschitz = lipschitz_upper_bound(problem, config.lipschitz_safety);
  if (!(st.lipschitz > 0.0) || !std::isfinite(st.lipschitz)) {
    st.lipschitz = 0.0;
    st.final_objective = objective(problem, theta);
    st.stop_reason = StopReason::Epsilon;
    st.note = "zero gradient operator";
    out.theta = std::move(theta);
    st.wall_time_s = seconds_since(t0);
    return out;
  }
  const double step = 1.0 / st.lipschitz;

  Matrix pred = pooled_predictions(problem, theta);
  double j_prev = objective_from(problem, problem.targets - pred, theta);
  if (!std::isfinite(j_prev)) throw NumericError("nesterov: non-finite objective at the initial point");
  if (config.trace_stride > 0) {
    st.trace_iters.push_back(0);
    st.trace_values.push_back(j_prev);
  }

  Matrix theta_prev = theta;
  Matrix pred_prev = pred;
  double tk = 1.0;
  st.stop_reason = StopReason::MaxIters;
  int j = 0;
  double j_cur = j_prev;
  Matrix y(width, cols);
  Matrix pred_y(pred.rows(), pred.cols());
  while (j < config.max_iters) {
    // y = theta + beta (theta - theta_prev), and its predictions by linearity.
    // beta = (t_{j-1} - 1) / t_j, which is zero for the first two steps.
    double beta = 0.0;
    if (j > 0) {
      const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * tk * tk));
      beta = (tk - 1.0) / t_next;
      tk = t_next;
    }
    for (std::size_t i = 0; i < y.size(); ++i) y.data()[i] = theta.data()[i] + beta * (theta.data()[i] - theta_prev.data()[i]);
    for (std::size_t i = 0; i < pred_y.size(); ++i)
      pred_y.data()[i] = pred.data()[i] + beta * (pred.data()[i] - pred_prev.data()[i]);
    const Matrix grad = gradient_from(problem, problem.targets - pred_y, y);

    theta_prev = std::move(theta);
    pred_prev = std::move(pred);
    theta = y;
    kernels::axpy(-step, grad.data(), theta.data(), theta.size());
    pred = pooled_predictions(problem, theta);
    ++j;

    j_cur = objective_from(problem, problem.targets - pred, theta);
    if (!std::isfinite(j_cur))
      throw NumericError("nesterov: non-finite objective at iteration " + std::to_string(j) + " (L = " +
                         std::to_string(st.lipschitz) + ")");
    if (config.trace_stride > 0 && j % config.trace_stride == 0) {
      st.trace_iters.push_back(j);
      st.trace_values.push_back(j_cur);
    }
    const double rel = std::abs(j_cur - j_prev) / std::max(std::abs(j_prev), 1e-30);
    j_prev = j_cur;
    if (rel < config.epsilon) {
      st.stop_reason = StopReason::Epsilon;
      break;
    }
  }
  st.iterations = j;
  st.final_objective = j_cur;
  out.theta = std::move(theta);
  st.wall_time_s = seconds_since(t0);
  return out;
}

AffineSolution direct_solve(const AffineLsqProblem& problem, const SolverConfig& config) {
  if (problem.ridge != 0.0) throw Error("direct solver requires ridge = 0");
  const auto t0 = Clock::now();
  const std::size_t width = problem.width();
  const std::size_t cols = problem.feature_dim() + 1;
  const std::size_t t = problem.outputs();
  Matrix theta0 = config.init ? *config.init : Matrix(width, cols);
  check_theta(problem, theta0);

  // Stage 1: D ((d+1) x t) minimizing ||E0 - Phi~ D||, E0 = E - Phi~ Q0^T.
  const Matrix& phi = problem.features_aug;
  const Matrix e0 = problem.targets - pooled_predictions(problem, theta0);
  Matrix d(cols, t);
  AffineSolution out;
  SolveStats& st = out.stats;
  bool stagnated = false;
  int total_iters = 0;
  std::vector<double> rhs(phi.rows());
  std::vector<double> x;
  for (std::size_t c = 0; c < t && !stagnated; ++c) {
    for (std::size_t i = 0; i < phi.rows(); ++i) rhs[i] = e0(i, c);
    int iters = 0;
    if (!cgls(phi, rhs, x, iters, 1e-12)) stagnated = true;
    total_iters += iters;
    for (std::size_t i = 0; i < cols; ++i) d(i, c) = x[i];
  }
  if (stagnated) {
    const Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(to_eigen(phi));
    const Eigen::MatrixXd a = to_eigen(phi);
    const Eigen::MatrixXd b = to_eigen(e0);
    Eigen::MatrixXd sol = cod.solve(b);
    // Refinement against the true residual; nearly collinear features leave
    // rounding in the normal equations after a single solve.
    for (int pass = 0; pass < 3; ++pass) sol += cod.solve(b - a * sol);
    d = from_eigen(sol);
    st.note = "conjugate gradient stagnated; used complete orthogonal decomposition (rank " +
              std::to_string(cod.rank()) + ")";
  }

  // Stage 2: minimum-norm lift, theta = theta0 + P^T (P P^T)^{-1} D^T.
  Matrix lift = pool_adjoint_rows(problem.pooling, solve_pooling_gram(problem.pooling, d.transposed()));
  lift += theta0;
  out.theta = std::move(lift);
  st.iterations = total_iters;
  st.final_objective = objective(problem, out.theta);
  st.stop_reason = StopReason::Direct;
  st.wall_time_s = seconds_since(t0);
  return out;
}

AffineSolution solve(const AffineLsqProblem& problem, const SolverConfig& config) {
  config.validate();
  return config.method == SolverMethod::Nesterov ? nesterov_solve(problem, config) : direct_solve(problem, config);
}

double residual_orthogonality(const AffineLsqProblem& problem, const Matrix& theta) {
  const Matrix r = problem.targets - pooled_predictions(problem, theta);
  // Scaled by the target norm so that near-exact fits do not divide rounding by ~0.
  const double rn = std::sqrt(sum_squares(problem.targets, problem.partitions));
  if (rn == 0.0) return 0.0;
  // Entry (a, b) of P^T R^T Phi~ is <R, phi_b (P e_a)^T>.
  const Matrix g = pool_adjoint_rows(problem.pooling, cross_samples(r, problem.features_aug, problem.partitions));
  const Matrix& phi = problem.features_aug;
  std::vector<double> col_norm(phi.cols(), 0.0);
  for (std::size_t s = 0; s < phi.rows(); ++s)
    for (std::size_t b = 0; b < phi.cols(); ++b) col_norm[b] += phi(s, b) * phi(s, b);
  const PoolingSpec& pool = problem.pooling;
  double worst = 0.0;
  for (std::size_t a = 0; a < g.rows(); ++a) {
    // Column a of P has one entry per output i with i <= a <= i + mu.
    const std::size_t lo = a > pool.mu ? a - pool.mu : 0;
    const std::size_t hi = std::min(a, pool.out_dim - 1);
    const double pa = std::sqrt(static_cast<double>(hi - lo + 1)) * pool.weight();
    for (std::size_t b = 0; b < g.cols(); ++b) {
      const double denom = rn * pa * std::sqrt(col_norm[b]);
      if (denom > 0.0) worst = std::max(worst, std::abs(g(a, b)) / denom);
    }
  }
  return worst;
}

Matrix pooling_null_projection(const PoolingSpec& pooling, const Matrix& theta) {
  const Matrix pt = pool_rows(pooling, theta);
  return theta - pool_adjoint_rows(pooling, solve_pooling_gram(pooling, pt));
}

Matrix pooled_null_init(const PoolingSpec& pooling, std::size_t feature_dim, double gain, SplitMix64& rng) {
  const double sd = gain * std::sqrt(2.0 / static_cast<double>(std::max<std::size_t>(feature_dim, 1)));
  Matrix theta(pooling.in_dim(), feature_dim + 1);
  for (std::size_t r = 0; r < theta.rows(); ++r)
    for (std::size_t c = 0; c < feature_dim; ++c) theta(r, c) = sd * rng.next_normal();
  return pooling_null_projection(pooling, theta);
}

}  // namespace sal
