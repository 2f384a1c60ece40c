// Acceptance checks: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "sal/bench_data.hpp"
#include "sal/commands.hpp"
#include "sal/config.hpp"
#include "sal/json_util.hpp"
#include "sal/mlp.hpp"
#include "sal/model.hpp"
#include "sal/qp_solver.hpp"
#include "sal/smoothing.hpp"
#include "sal/trainer.hpp"
#include "test_util.hpp"

using namespace sal;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

int g_failures = 0;
std::string g_lines;

void report(int n, bool ok, const std::string& what) {
  const std::string line = std::string("[") + (ok ? "PASS" : "FAIL") + "] criterion " + std::to_string(n) + ": " + what;
  std::printf("%s\n", line.c_str());
  std::fflush(stdout);
  g_lines += line + "\n";
  if (!ok) ++g_failures;
}

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

// Runs a check, turning an exception into a failure line.
void guarded(int n, const std::function<void()>& body) {
  try {
    body();
  } catch (const std::exception& e) {
    report(n, false, std::string("exception: ") + e.what());
  }
}

fs::path scratch_root() { return fs::temp_directory_path() / "sal_acceptance"; }

std::string config_path(const std::string& name) { return std::string(SAL_SOURCE_DIR) + "/configs/" + name; }

using CsvRows = std::vector<std::vector<std::string>>;

CsvRows read_csv(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw Error("cannot open " + p.string());
  CsvRows rows;
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    rows.push_back(cells);
  }
  return rows;
}

std::size_t column(const CsvRows& rows, const std::string& name) {
  for (std::size_t c = 0; c < rows.at(0).size(); ++c)
    if (rows[0][c] == name) return c;
  throw Error("missing column " + name);
}

// Whole file with every column whose header mentions time blanked.
std::string masked_csv(const fs::path& p) {
  const CsvRows rows = read_csv(p);
  std::string out;
  for (const auto& r : rows) {
    for (std::size_t c = 0; c < r.size(); ++c) {
      const bool timed = c < rows[0].size() && rows[0][c].find("time") != std::string::npos;
      out += (timed && &r != &rows[0]) ? std::string("*") : r[c];
      out += c + 1 < r.size() ? "," : "\n";
    }
  }
  return out;
}

struct SalRun {
  Dataset data;
  TrainResult result;
};

// Random scalar inputs, random targets, direct solver, narrow pooled grades.
SalRun random_sal_run(std::uint64_t seed, std::size_t grades) {
  SplitMix64 rng(seed);
  const std::size_t t = seed % 2 == 0 ? 1 : 3;
  const std::size_t mu = (seed / 2) % 2 == 0 ? 0 : 2;
  SalRun run;
  run.data.inputs = testing::random_matrix(50, 1, rng);
  run.data.targets = testing::random_matrix(50, t, rng);
  GradeConfig g;
  g.width = t + mu;
  g.solver = SolverMethod::DirectMinNorm;
  TrainConfig c;
  c.grades.assign(grades, g);
  c.grades[0].activation = Activation::sincos_half();
  c.seed = seed;
  c.keep_residuals = true;
  run.result = train_sal(run.data, nullptr, c);
  return run;
}

void projection_criteria() {
  const auto t0 = Clock::now();
  double worst_orth = 0.0, worst_pyth = 0.0, worst_parseval = 0.0;
  for (std::uint64_t s = 0; s < 20; ++s) {
    const SalRun run = random_sal_run(100 + s, 5);
    const TrainResult& r = run.result;
    for (std::size_t k = 0; k < r.components.size(); ++k) {
      const double before = frobenius_sq(r.residuals[k]);
      const double after = frobenius_sq(r.residuals[k + 1]);
      const double comp = frobenius_sq(r.components[k]);
      worst_orth = std::max(worst_orth, std::abs(inner_product_m(r.residuals[k + 1], r.components[k])) / before);
      worst_pyth = std::max(worst_pyth, std::abs(before - after - comp) / before);
    }
    double parts = 0.0;
    for (const Matrix& f : r.components) parts += frobenius_sq(f);
    const double total = frobenius_sq(run.data.targets);
    worst_parseval = std::max(worst_parseval, std::abs(total - parts - frobenius_sq(r.residual)) / total);
  }
  const double elapsed = seconds_since(t0);
  report(1, worst_orth <= 1e-8 && elapsed < 10.0,
         "max |<e_{k+1}, f_{k+1}>| / ||e_k||^2 = " + sci(worst_orth) + " over 20 instances x 5 grades (limit 1e-8), " +
             sci(elapsed) + " s (limit 10 s)");
  report(2, worst_pyth <= 1e-8, "max Pythagorean defect / ||e_k||^2 = " + sci(worst_pyth) + " (limit 1e-8)");
  report(3, worst_parseval <= 1e-7, "max Parseval defect after 5 grades / ||f||^2 = " + sci(worst_parseval) +
                                        " (limit 1e-7)");
}

// rse after each grade with the direct solver and no smoothing.
std::vector<double> direct_rse_ladder(const std::string& config_name, std::size_t grades) {
  RunConfig cfg = parse_config(config_path(config_name));
  const TargetFn target = build_target(cfg);
  const Dataset train = build_train(cfg, target);
  TrainConfig tc = to_train_config(*cfg.sal);
  tc.grades.resize(std::min(grades, tc.grades.size()));
  for (GradeConfig& g : tc.grades) {
    g.solver = SolverMethod::DirectMinNorm;
    g.tau = 0.0;
  }
  tc.record_test_metrics = false;
  const TrainResult r = train_sal(train, nullptr, tc);
  std::vector<double> out;
  for (const GradeRecord& rec : r.report.records) out.push_back(rec.rse_train);
  return out;
}

void monotonicity_criterion() {
  std::string detail;
  bool ok = true;
  for (const char* name : {"example1_desk.json", "example2_desk.json"}) {
    const std::vector<double> rse = direct_rse_ladder(name, 6);
    double worst = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 1; k < rse.size(); ++k) worst = std::max(worst, rse[k] / rse[k - 1] - 1.0);
    ok = ok && worst <= 1e-12;
    detail += std::string(name) + ": rse " + sci(rse.front()) + " -> " + sci(rse.back()) +
              ", max relative increase " + sci(worst) + "; ";
  }
  report(4, ok, detail + "(limit 1e-12)");
}

void solver_equivalence_criterion() {
  const auto t0 = Clock::now();
  double worst_pred = 0.0, worst_gap_ratio = 0.0;
  for (std::uint64_t s = 0; s < 10; ++s) {
    const AffineLsqProblem p = testing::planted_problem(1000 + s, 50, 1, 1 + 2 * (s % 2), 2 * ((s / 2) % 2), 0.1);
    SolverConfig cfg;
    cfg.epsilon = 1e-12;
    cfg.max_iters = 50000;
    const AffineSolution n = nesterov_solve(p, cfg);
    const AffineSolution d = direct_solve(p);
    worst_pred = std::max(worst_pred, testing::rel_diff(pooled_predictions(p, n.theta), pooled_predictions(p, d.theta)));

    SolverConfig trace;
    trace.epsilon = 1e-300;
    trace.max_iters = 1000;
    trace.trace_stride = 1;
    const AffineSolution tr = nesterov_solve(p, trace);
    const double dist = frobenius_sq(d.theta);  // zero start; d.theta is the optimum nearest to it
    const auto& tv = tr.stats.trace_values;
    for (std::size_t j : {10, 100, 1000}) {
      const double gap = tv[std::min(j, tv.size() - 1)] - d.stats.final_objective;
      const double bound = 2.0 * tr.stats.lipschitz * dist / ((j + 1.0) * (j + 1.0));
      worst_gap_ratio = std::max(worst_gap_ratio, (gap - 1e-12 * d.stats.final_objective) / bound);
    }
  }
  const double elapsed = seconds_since(t0);
  report(5, worst_pred <= 1e-6 && worst_gap_ratio <= 1.0 && elapsed < 60.0,
         "max relative prediction gap " + sci(worst_pred) + " (limit 1e-6); max gap / (2L||theta*||^2/(j+1)^2) " +
             sci(worst_gap_ratio) + " at j in {10, 100, 1000} (limit 1); " + sci(elapsed) + " s (limit 60 s)");
}

double qp_fd_error(const AffineLsqProblem& p, const Matrix& theta) {
  const Matrix g = gradient(p, theta);
  Matrix fd(theta.rows(), theta.cols());
  for (std::size_t i = 0; i < theta.size(); ++i) {
    Matrix a = theta, b = theta;
    const double h = 1e-5 * (1.0 + std::abs(theta.data()[i]));
    a.data()[i] += h;
    b.data()[i] -= h;
    fd.data()[i] = (objective(p, a) - objective(p, b)) / (2.0 * h);
  }
  return testing::rel_diff(g, fd);
}

double mlp_fd_error(const MlpShape& shape, std::uint64_t seed) {
  SplitMix64 rng(seed);
  MlpParams params = he_init(shape, rng);
  for (DenseLayer& l : params.layers)
    for (double& b : l.bias) b = 0.1 * (2.0 * rng.next_double() - 1.0);
  const Matrix x = testing::random_matrix(30, shape.input_dim, rng);
  const Matrix y = testing::random_matrix(30, shape.output_dim, rng);
  const auto loss = [&](const MlpParams& q) { return squared_loss(mlp_forward(q, x), y); };
  ForwardCache cache;
  const Matrix out = mlp_forward(params, x, &cache);
  Matrix og = out - y;
  for (double& v : og.values()) v *= 2.0;
  const MlpGrads grads = mlp_backward(params, cache, og);

  double num = 0.0, den = 0.0;
  const auto probe = [&](double& slot, double analytic) {
    const double keep = slot;
    const double h = 1e-6 * (1.0 + std::abs(keep));
    slot = keep + h;
    const double up = loss(params);
    slot = keep - h;
    const double down = loss(params);
    slot = keep;
    const double fd = (up - down) / (2.0 * h);
    num += (fd - analytic) * (fd - analytic);
    den += analytic * analytic;
  };
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    DenseLayer& layer = params.layers[l];
    for (std::size_t i = 0; i < layer.weight.size(); ++i) probe(layer.weight.data()[i], grads.weight[l].data()[i]);
    for (std::size_t i = 0; i < layer.bias.size(); ++i) probe(layer.bias[i], grads.bias[l][i]);
  }
  return std::sqrt(num / den);
}

void gradient_criterion() {
  double worst_qp = 0.0, worst_mlp = 0.0;
  std::uint64_t seed = 40;
  for (std::size_t d : {1, 4})
    for (std::size_t t : {1, 3})
      for (std::size_t mu : {0, 2})
        for (double ridge : {0.0, 0.3}) {
          SplitMix64 rng(++seed);
          const AffineLsqProblem p =
              assemble(testing::random_matrix(25, d, rng), testing::random_matrix(25, t, rng), PoolingSpec{mu, t}, ridge);
          worst_qp = std::max(worst_qp, qp_fd_error(p, testing::random_matrix(t + mu, d + 1, rng)));
        }
  const std::vector<std::vector<std::size_t>> widths = {{}, {7}, {5, 6}, {4, 4, 4}};
  for (const auto& hidden : widths)
    for (const Activation& act : {Activation::tanh(), Activation::sincos_half(), Activation::relu()})
      for (std::size_t t : {1, 3}) {
        MlpShape shape;
        shape.input_dim = 1 + t % 2;
        shape.output_dim = t;
        shape.hidden = hidden;
        shape.hidden_activations.assign(hidden.size(), act);
        worst_mlp = std::max(worst_mlp, mlp_fd_error(shape, ++seed));
      }
  report(6, worst_qp <= 1e-5 && worst_mlp <= 1e-5,
         "max relative gradient error vs central differences: affine problem " + sci(worst_qp) + ", network " +
             sci(worst_mlp) + " (limit 1e-5)");
}

void example2_criterion() {
  const fs::path out = scratch_root() / "example2";
  CommandOptions o;
  o.config_path = config_path("example2_desk.json");
  o.out_dir = out.string();
  std::ostringstream log;
  const auto t0 = Clock::now();
  const int code = cmd_train_sal(o, log);
  const double elapsed = seconds_since(t0);
  if (code != 0) {
    report(8, false, "train-sal failed: " + log.str());
    return;
  }
  const CsvRows rows = read_csv(out / "report.csv");
  const std::size_t c = column(rows, "rse_train");
  const double first = std::stod(rows.at(1)[c]);
  const double last = std::stod(rows.at(rows.size() - 2)[c]);
  report(8, first / last >= 1e3 && elapsed < 900.0,
         "rse(train) " + sci(first) + " -> " + sci(last) + " over " + std::to_string(rows.size() - 2) +
             " grades, reduction " + sci(first / last) + " (limit 1e3); " + sci(elapsed) + " s (limit 900 s)");
}

void rse_criterion() {
  const Matrix y{{1.0, -2.0}, {0.5, 3.0}};
  Matrix twice = y;
  for (double& v : twice.values()) v *= 2.0;
  const double a = compute_rse(y, y), b = compute_rse(Matrix(2, 2), y), c = compute_rse(twice, y);
  report(9, a == 0.0 && b == 1.0 && c == 1.0,
         "rse(y, y) = " + sci(a) + ", rse(0, y) = " + sci(b) + ", rse(2y, y) = " + sci(c) + " (exact 0, 1, 1)");
}

void smoothing_criterion() {
  double worst_sum = 0.0;
  for (double tau : {1e-3, 3e-3, 6e-3, 0.05, 1.0}) {
    double s = 0.0;
    for (double w : quadrature_rule({tau, WindowSpec::tau_multiples(6.0), 200, false}).weights) s += w;
    worst_sum = std::max(worst_sum, std::abs(s - 1.0));
  }
  bool constants = true;
  for (double c : {1.0, -3.25, 0.1, 12345.678}) {
    const SmootherConfig cfg{0.02, WindowSpec::tau_multiples(6.0), 200, true};
    for (double x : {-0.9, 0.0, 0.37})
      constants = constants && smooth_at([c](double) { return std::vector<double>{c}; }, cfg, x)[0] == c;
  }
  // tau a tenth of the grid step: the smoothed grid reproduces a smooth function.
  const std::size_t n = 401;
  std::vector<double> grid(n);
  Matrix values(n, 1);
  for (std::size_t i = 0; i < n; ++i) {
    grid[i] = -1.0 + 2.0 * static_cast<double>(i) / static_cast<double>(n - 1);
    values(i, 0) = std::sin(3.0 * grid[i]) + 2.0;
  }
  const double step = 2.0 / static_cast<double>(n - 1);
  const BatchFunction f = [](std::span<const double> pts) {
    Matrix m(pts.size(), 1);
    for (std::size_t i = 0; i < pts.size(); ++i) m(i, 0) = std::sin(3.0 * pts[i]) + 2.0;
    return m;
  };
  const Matrix smoothed = smooth_grid(values, {step / 10.0, WindowSpec::tau_multiples(6.0), 200, true}, grid, f);
  const double identity = testing::rel_diff(smoothed, values);
  report(10, worst_sum <= 1e-3 && constants && identity <= 1e-3,
         "TauMultiples(6), M = 200 weight sum defect " + sci(worst_sum) + " (limit 1e-3); renormalized constants " +
             (constants ? "exact" : "NOT exact") + "; tau = step/10 relative change " + sci(identity) +
             " (limit 1e-3)");
}

struct CompareRun {
  bool ok = false;
  fs::path dir;
  std::string log;
};

CompareRun run_compare(const std::string& name) {
  CompareRun r;
  r.dir = scratch_root() / name;
  CommandOptions o;
  o.config_path = config_path("example1_desk.json");
  o.out_dir = r.dir.string();
  std::ostringstream log;
  r.ok = cmd_compare(o, log) == 0;
  r.log = log.str();
  return r;
}

void example1_criterion(const CompareRun& run) {
  if (!run.ok) {
    report(7, false, "compare failed: " + run.log);
    return;
  }
  const CsvRows rows = read_csv(run.dir / "sal_report.csv");
  const std::size_t c = column(rows, "rse_train");
  const std::size_t tc = column(rows, "train_time_s");
  const double first = std::stod(rows.at(1)[c]);
  const double last = std::stod(rows.at(rows.size() - 2)[c]);
  const double total = std::stod(rows.back()[tc]);
  report(7, first >= 0.05 && first <= 0.5 && last <= 1e-3 && total < 600.0,
         "grade 1 rse(train) " + sci(first) + " (range [0.05, 0.5]), final " + sci(last) + " after " +
             std::to_string(rows.size() - 2) + " grades (limit 1e-3), " + sci(total) + " s (limit 600 s)");
}

void comparison_criterion(const CompareRun& run) {
  if (!run.ok) {
    report(11, false, "compare failed: " + run.log);
    return;
  }
  const CsvRows ssg = read_csv(run.dir / "ssg_report.csv");
  const std::size_t rc = column(ssg, "rse_train");
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < ssg.size(); ++i)
    if (ssg[i][0] != "total_time" && !ssg[i][rc].empty()) best = std::min(best, std::stod(ssg[i][rc]));
  // comparison.csv resolves threshold hits per epoch, not only at checkpoints.
  const CsvRows cmp = read_csv(run.dir / "comparison.csv");
  const std::size_t th = column(cmp, "threshold"), st = column(cmp, "sal_time_s"), gt = column(cmp, "ssg_time_s");
  const std::size_t ge = column(cmp, "ssg_epoch");
  std::string sal_t = "not reached", ssg_t = "not reached";
  bool ordered = false;
  int at = 0;
  for (std::size_t i = 1; i < cmp.size(); ++i) {
    const double thr = std::stod(cmp[i][th]);
    if (std::abs(thr - 1e-2) < 1e-14 && !cmp[i][ge].empty()) at = std::stoi(cmp[i][ge]);
    if (std::abs(thr - 1e-3) > 1e-14) continue;
    sal_t = cmp[i][st].empty() ? sal_t : cmp[i][st];
    ssg_t = cmp[i][gt].empty() ? ssg_t : cmp[i][gt];
    if (!cmp[i][st].empty()) ordered = cmp[i][gt].empty() || std::stod(cmp[i][st]) < std::stod(cmp[i][gt]);
  }
  report(11, at > 0 && at <= 5000 && ordered,
         "SSG 50x6 lowest reported rse(train) " + sci(best) + (at > 0 ? ", first <= 1e-2 at epoch " + std::to_string(at) : "") +
             " (limit 1e-2 within 5000 epochs); time to 1e-3: SAL " + sal_t + " s, SSG " + ssg_t);
}

bool same_bytes(const fs::path& a, const fs::path& b) { return read_text_file(a.string()) == read_text_file(b.string()); }

void determinism_criterion(const CompareRun& a, const CompareRun& b) {
  if (!a.ok || !b.ok) {
    report(12, false, "compare failed");
    return;
  }
  std::vector<std::string> diffs;
  const auto check_csv = [&](const fs::path& x, const fs::path& y) {
    if (masked_csv(x) != masked_csv(y)) diffs.push_back(x.filename().string());
  };
  const auto check_file = [&](const fs::path& x, const fs::path& y) {
    if (!same_bytes(x, y)) diffs.push_back(x.filename().string());
  };
  for (const char* f : {"sal_report.csv", "ssg_report.csv", "comparison.csv"}) check_csv(a.dir / f, b.dir / f);
  for (const char* f : {"sal_model.json", "ssg_model.json", "config.resolved.json"}) check_file(a.dir / f, b.dir / f);

  // The remaining commands on a small configuration.
  const fs::path root = scratch_root() / "small";
  fs::create_directories(root);
  const std::string cfg = (root / "config.json").string();
  write_text_file(cfg, R"({
  "data": {"target": "oscillatory", "m": 301, "m_test": 100},
  "sal": {"defaults": {"width": 24, "tau": 0.004, "window": {"mode": "tau_multiples", "factor": 6}, "quad_points": 40},
          "grades": 3},
  "ssg": {"widths": [12, 12], "epochs": 200, "checkpoints": [100]}
})");
  std::ostringstream log;
  int files = 6;
  for (int rep = 0; rep < 2; ++rep) {
    CommandOptions o;
    o.config_path = cfg;
    o.out_dir = (root / ("sal" + std::to_string(rep))).string();
    cmd_train_sal(o, log);
    o.out_dir = (root / ("ssg" + std::to_string(rep))).string();
    cmd_train_ssg(o, log);
    o.model_path = (root / ("sal" + std::to_string(rep)) / "model.json").string();
    o.out_dir = (root / ("eval" + std::to_string(rep))).string();
    cmd_eval(o, log);
    cmd_coeffs(1, (root / ("coeffs" + std::to_string(rep) + ".txt")).string(), log);
  }
  check_csv(root / "sal0" / "report.csv", root / "sal1" / "report.csv");
  check_file(root / "sal0" / "model.json", root / "sal1" / "model.json");
  check_csv(root / "ssg0" / "report.csv", root / "ssg1" / "report.csv");
  check_file(root / "ssg0" / "model.json", root / "ssg1" / "model.json");
  check_csv(root / "eval0" / "eval.csv", root / "eval1" / "eval.csv");
  check_file(root / "coeffs0.txt", root / "coeffs1.txt");
  files += 6;
  std::string detail = std::to_string(files) + " outputs of compare, train-sal, train-ssg, eval and coeffs compared";
  if (!diffs.empty()) {
    detail += "; differing:";
    for (const auto& d : diffs) detail += " " + d;
  }
  report(12, diffs.empty(), detail + " (time columns masked)");
}

}  // namespace

int main() {
  fs::remove_all(scratch_root());
  fs::create_directories(scratch_root());
  guarded(1, projection_criteria);
  guarded(4, monotonicity_criterion);
  guarded(5, solver_equivalence_criterion);
  guarded(6, gradient_criterion);
  CompareRun first, second;
  guarded(7, [&] {
    first = run_compare("compare_a");
    example1_criterion(first);
  });
  guarded(8, example2_criterion);
  guarded(9, rse_criterion);
  guarded(10, smoothing_criterion);
  guarded(11, [&] { comparison_criterion(first); });
  guarded(12, [&] {
    second = run_compare("compare_b");
    determinism_criterion(first, second);
  });
  std::printf("%s: %d criteria failed\n", g_failures == 0 ? "ALL PASSED" : "FAILURES", g_failures);
  // ctest hides the output of passing tests; keep a copy next to the binary's working directory.
  std::ofstream("acceptance_report.txt") << g_lines << (g_failures == 0 ? "ALL PASSED" : "FAILURES") << ": "
                                         << g_failures << " criteria failed\n";
  return g_failures == 0 ? 0 : 1;
}
