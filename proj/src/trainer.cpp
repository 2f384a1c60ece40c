#include "sal/trainer.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <string>

#include "sal/kernels.hpp"

namespace sal {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

Matrix add_bias(Matrix z, const std::vector<double>& bias) {
  for (std::size_t r = 0; r < z.rows(); ++r) kernels::axpy(1.0, bias.data(), z.data() + r * z.cols(), z.cols());
  return z;
}

// Piecewise-linear interpolation of grid values, constant outside.
BatchFunction interpolate_grid(const std::vector<double>& grid, const Matrix& values) {
  return [&grid, &values](std::span<const double> pts) {
    const std::size_t t = values.cols();
    Matrix out(pts.size(), t);
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const double x = pts[i];
      const auto it = std::upper_bound(grid.begin(), grid.end(), x);
      if (it == grid.begin() || it == grid.end()) {
        const std::size_t r = it == grid.begin() ? 0 : grid.size() - 1;
        std::copy(values.row(r).begin(), values.row(r).end(), out.row(i).begin());
        continue;
      }
      const std::size_t hi = static_cast<std::size_t>(it - grid.begin());
      const std::size_t lo = hi - 1;
      const double w = (x - grid[lo]) / (grid[hi] - grid[lo]);
      for (std::size_t c = 0; c < t; ++c) out(i, c) = (1.0 - w) * values(lo, c) + w * values(hi, c);
    }
    return out;
  };
}

}  // namespace

std::string to_string(SmoothingTarget t) {
  switch (t) {
    case SmoothingTarget::Component: return "component";
    case SmoothingTarget::Residual: return "residual";
    case SmoothingTarget::None: return "none";
  }
  return "none";
}

SmoothingTarget smoothing_target_from(const std::string& name) {
  if (name == "component") return SmoothingTarget::Component;
  if (name == "residual") return SmoothingTarget::Residual;
  if (name == "none") return SmoothingTarget::None;
  throw Error("unknown smoothing target '" + name + "' (expected component, residual or none)");
}

std::string to_string(InitKind k) { return k == InitKind::Zero ? "zero" : "null_projected_he"; }

InitKind init_kind_from(const std::string& name) {
  if (name == "zero") return InitKind::Zero;
  if (name == "null_projected_he") return InitKind::NullProjectedHe;
  throw Error("unknown init '" + name + "' (expected zero or null_projected_he)");
}

void GradeConfig::validate(std::size_t t) const {
  if (width < t)
    throw Error("grade width " + std::to_string(width) + " is smaller than the output dimension " + std::to_string(t));
  if (!(tau >= 0.0) || !std::isfinite(tau)) throw Error("tau must be a nonnegative number");
  if (tau > 0.0 && smoothing_target != SmoothingTarget::None) smoother().validate();
  SolverConfig{solver, epsilon, max_iters, lipschitz_safety, std::nullopt, 0}.validate();
  if (!(init_gain >= 0.0) || !std::isfinite(init_gain)) throw Error("init_gain must be a nonnegative number");
  if (!(ridge >= 0.0)) throw Error("ridge must be nonnegative");
  if (ridge > 0.0 && solver == SolverMethod::DirectMinNorm) throw Error("ridge is only available with the nesterov solver");
  for (const Activation& a : select_from)
    if (a.type() == ActivationType::Combination) throw Error("select_from entries must be plain activations");
}

double compute_rse(const Matrix& predictions, const Matrix& targets) {
  if (predictions.rows() != targets.rows() || predictions.cols() != targets.cols())
    throw ShapeError("compute_rse: prediction and target shapes differ");
  const double denom = frobenius_sq(targets);
  if (!(denom > 0.0)) throw Error("compute_rse: all-zero targets, rse is undefined");
  return kernels::sq_dist(predictions.data(), targets.data(), targets.size()) / denom;
}

ActivationSelection select_activation(const Matrix& preactivations, const PoolingSpec& pooling, const Matrix& target,
                                      const std::vector<Activation>& basis) {
  if (basis.empty()) throw Error("select_activation: empty basis");
  if (preactivations.rows() != target.rows()) throw ShapeError("select_activation: row counts differ");
  const std::size_t L = basis.size();
  std::vector<Matrix> s;
  s.reserve(L);
  for (const Activation& a : basis) {
    Matrix z = preactivations;
    a.apply(z.values(), z.values());
    s.push_back(pool_each_row(pooling, z));
  }
  if (s.front().cols() != target.cols()) throw ShapeError("select_activation: target width does not match pooling");
  Eigen::MatrixXd g(L, L);
  Eigen::VectorXd c(L);
  for (std::size_t i = 0; i < L; ++i) {
    c(i) = inner_product_m(s[i], target);
    for (std::size_t j = 0; j <= i; ++j) g(i, j) = g(j, i) = inner_product_m(s[i], s[j]);
  }
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(g);
  if (eig.info() != Eigen::Success) throw NumericError("select_activation: eigendecomposition failed");
  const Eigen::VectorXd& lam = eig.eigenvalues();
  const double thr = 1e-12 * std::max(lam.maxCoeff(), 0.0);
  Eigen::VectorXd alpha = Eigen::VectorXd::Zero(L);
  ActivationSelection out;
  for (Eigen::Index i = 0; i < lam.size(); ++i) {
    if (lam(i) > thr && lam(i) > 0.0) {
      const Eigen::VectorXd v = eig.eigenvectors().col(i);
      alpha += v * (v.dot(c) / lam(i));
    } else {
      out.singular = true;
    }
  }
  out.weights.assign(alpha.data(), alpha.data() + L);
  out.fitted = Matrix(target.rows(), target.cols());
  for (std::size_t i = 0; i < L; ++i) kernels::axpy(out.weights[i], s[i].data(), out.fitted.data(), out.fitted.size());
  return out;
}

GradeOutcome train_grade(const SalModel& model, const Dataset& train, const Matrix& features, const Matrix& residual,
                         const GradeConfig& cfg, std::uint64_t seed, std::size_t partitions) {
  const std::size_t t = residual.cols();
  cfg.validate(t);
  if (features.rows() != train.size() || residual.rows() != train.size())
    throw ShapeError("train_grade: features and residual must have one row per training sample");
  const auto t0 = Clock::now();
  const std::size_t k = model.grades.size() + 1;

  const PoolingSpec pooling = PoolingSpec::for_width(cfg.width, t);
  const AffineLsqProblem problem = assemble(features, residual, pooling, cfg.ridge, partitions);
  SolverConfig sc;
  sc.method = cfg.solver;
  sc.epsilon = cfg.epsilon;
  sc.max_iters = cfg.max_iters;
  sc.lipschitz_safety = cfg.lipschitz_safety;
  if (cfg.init == InitKind::NullProjectedHe) {
    SplitMix64 rng(seed);
    sc.init = pooled_null_init(pooling, features.cols(), cfg.init_gain, rng);
  }
  const AffineSolution sol = solve(problem, sc);

  GradeOutcome out;
  GradeParams& g = out.params;
  g.weight = sol.weight();
  g.bias = sol.bias();
  g.pooling = pooling;
  g.activation = cfg.activation;

  const Matrix raw = pooled_predictions(problem, sol.theta);
  Matrix pre = add_bias(matmul_nt(features, g.weight), g.bias);

  GradeRecord& rec = out.record;
  rec.grade = k;
  rec.tau = cfg.tau;
  rec.epsilon = cfg.epsilon;
  rec.iterations = sol.stats.iterations;
  rec.stop_reason = to_string(sol.stats.stop_reason);
  rec.note = sol.stats.note;
  rec.orthogonality = cfg.ridge == 0.0 ? residual_orthogonality(problem, sol.theta) : 0.0;

  const bool smooth = cfg.tau > 0.0 && cfg.smoothing_target != SmoothingTarget::None;
  if (smooth && train.input_dim() != 1) throw Error("smoothing is only supported for scalar inputs");
  const std::vector<double> grid = smooth ? train.grid() : std::vector<double>{};

  if (smooth && cfg.smoothing_target == SmoothingTarget::Component) {
    g.smoothing = GradeSmoothing{cfg.tau, cfg.window, cfg.quad_points, cfg.renormalize};
    SalModel probe = model;
    GradeParams unsmoothed = g;
    unsmoothed.smoothing = GradeSmoothing{};
    probe.grades.push_back(std::move(unsmoothed));
    const BatchFunction f = [&probe, k](std::span<const double> pts) {
      return raw_component_batch(probe, k, Matrix::column(pts));
    };
    out.component = smooth_grid(raw, cfg.smoother(), grid, f);
    out.residual = residual - out.component;
  } else if (smooth) {
    out.component = raw;
    const Matrix unsmoothed = residual - raw;
    out.residual = smooth_grid(unsmoothed, cfg.smoother(), grid, interpolate_grid(grid, unsmoothed));
    rec.note += rec.note.empty() ? "" : "; ";
    rec.note += "residual smoothed (off-grid values linearly interpolated)";
  } else {
    out.component = raw;
    out.residual = residual - raw;
  }

  if (!cfg.select_from.empty()) {
    const ActivationSelection sel = select_activation(pre, pooling, out.residual, cfg.select_from);
    g.activation = Activation::combination(sel.weights, cfg.select_from);
    if (sel.singular) {
      rec.note += rec.note.empty() ? "" : "; ";
      rec.note += "activation selection: singular Gram matrix, minimum-norm weights";
    }
  }

  g.activation.apply(pre.values(), pre.values());
  out.features = std::move(pre);
  rec.train_time_s = seconds_since(t0);
  return out;
}

TrainResult train_sal(const Dataset& train, const Dataset* test, const TrainConfig& cfg) {
  if (train.size() == 0) throw Error("train_sal: empty training set");
  if (cfg.grades.empty() && !cfg.hybrid_head) throw Error("train_sal: no grades configured");
  if (cfg.partitions == 0) throw Error("train_sal: partition count must be positive");
  const auto t_start = Clock::now();
  const std::size_t t = train.output_dim();
  for (const GradeConfig& gc : cfg.grades) gc.validate(t);

  TrainResult res;
  SalModel& model = res.model;
  TrainReport& rep = res.report;
  model.input_dim = train.input_dim();
  model.output_dim = t;
  const double denom = frobenius_sq(train.targets);
  if (!(denom > 0.0)) throw Error("train_sal: all-zero targets, rse is undefined");
  const bool with_test = cfg.record_test_metrics && test != nullptr && test->size() > 0;
  if (with_test && (test->input_dim() != model.input_dim || test->output_dim() != t))
    throw ShapeError("train_sal: test set dimensions differ from the training set");

  Matrix features = train.inputs;
  Matrix residual = train.targets;
  Matrix test_pred = with_test ? Matrix(test->size(), t) : Matrix();
  Matrix test_h = with_test ? test->inputs : Matrix();
  std::size_t offset = 0;

  if (cfg.hybrid_head) {
    const auto t0 = Clock::now();
    SsgResult head;
    try {
      head = train_ssg(train, nullptr, *cfg.hybrid_head);
    } catch (const Error& e) {
      throw TrainingError(std::string("hybrid head: ") + e.what(), model, rep);
    }
    model.hybrid_head = head.params;
    residual -= mlp_forward(head.params, train.inputs);
    features = mlp_hidden_output(head.params, train.inputs);
    GradeRecord rec;
    rec.grade = 1;
    rec.epsilon = cfg.hybrid_head->epsilon;
    rec.iterations = head.report.epochs_run;
    rec.train_time_s = seconds_since(t0);
    rec.rse_train = frobenius_sq(residual) / denom;
    rec.stop_reason = head.report.stop_reason;
    rec.note = "hybrid head " + ssg_shape(*cfg.hybrid_head, model.input_dim, t).structure();
    if (with_test) {
      test_pred = mlp_forward(head.params, test->inputs);
      test_h = mlp_hidden_output(head.params, test->inputs);
      rec.rse_test = compute_rse(test_pred, test->targets);
    }
    rep.records.push_back(rec);
    offset = 1;
  }
  if (cfg.keep_residuals) res.residuals.push_back(residual);

  Matrix model_residual = residual;
  for (std::size_t i = 0; i < cfg.grades.size(); ++i) {
    const std::size_t k = i + 1;
    GradeOutcome o;
    try {
      o = train_grade(model, train, features, residual, cfg.grades[i], derive_seed(cfg.seed, k), cfg.partitions);
    } catch (const Error& e) {
      throw TrainingError("grade " + std::to_string(k + offset) + ": " + e.what(), model, rep);
    }
    model.grades.push_back(std::move(o.params));
    model_residual -= o.component;
    residual = std::move(o.residual);
    features = std::move(o.features);
    o.record.grade = k + offset;
    o.record.rse_train = frobenius_sq(model_residual) / denom;
    if (with_test) {
      Matrix raw = advance_grade(model.grades.back(), test_h);
      if (model.grades.back().smoothing.enabled())
        test_pred += component_batch(model, k, test->inputs);
      else
        test_pred += raw;
      o.record.rse_test = compute_rse(test_pred, test->targets);
    }
    rep.records.push_back(o.record);
    res.components.push_back(std::move(o.component));
    if (cfg.keep_residuals) res.residuals.push_back(residual);
  }
  res.residual = std::move(model_residual);
  rep.total_time_s = seconds_since(t_start);
  rep.notes.push_back("rse is computed after smoothing, on the functions the model predicts with");
  rep.notes.push_back("per-grade train_time_s excludes test-set evaluation");
  return res;
}

TrainResult hybrid_train(const Dataset& train, const Dataset* test, const SsgConfig& head,
                         const std::vector<GradeConfig>& grades, std::uint64_t seed) {
  TrainConfig cfg;
  cfg.grades = grades;
  cfg.hybrid_head = head;
  cfg.seed = seed;
  return train_sal(train, test, cfg);
}

}  // namespace sal
