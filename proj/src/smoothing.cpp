#include "sal/smoothing.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "sal/error.hpp"
#include "sal/kernels.hpp"

namespace sal {

namespace {
constexpr std::size_t kNodeChunk = 8192;
}

double WindowSpec::half_width(double tau) const {
  return mode == Mode::GridSteps ? static_cast<double>(count) * step : factor * tau;
}

void SmootherConfig::validate() const {
  if (!(tau > 0.0)) throw Error("smoothing: tau must be positive, got " + std::to_string(tau));
  if (quad_points < 2) throw Error("smoothing: at least 2 quadrature points are required");
  if (!(window.half_width(tau) > 0.0)) throw Error("smoothing: window half-width must be positive");
}

double gaussian_eval(double tau, double u) {
  if (!(tau > 0.0)) throw Error("gaussian_eval: tau must be positive");
  const double r = u / tau;
  return std::exp(-0.5 * r * r) / (tau * std::sqrt(2.0 * std::numbers::pi));
}

QuadratureRule quadrature_rule(const SmootherConfig& cfg) {
  cfg.validate();
  const double h = cfg.window.half_width(cfg.tau);
  const int m = cfg.quad_points;
  const double dy = 2.0 * h / m;
  QuadratureRule rule;
  rule.offsets.resize(m);
  rule.weights.resize(m);
  for (int i = 1; i <= m; ++i) {
    const double off = dy * i - h;
    rule.offsets[i - 1] = off;
    rule.weights[i - 1] = dy * gaussian_eval(cfg.tau, -off);
  }
  if (cfg.renormalize) {
    double total = 0.0;
    for (double w : rule.weights) total += w;
    for (double& w : rule.weights) w /= total;
  }
  return rule;
}

namespace {

// With renormalized weights the sum is taken relative to the first node,
// v_1 + sum_i w_i (v_i - v_1), so a constant integrand comes back bit-exact.
template <class Node>
void combine_nodes(const QuadratureRule& rule, bool relative, Node&& node, double* dst, std::size_t t) {
  const std::size_t nodes = rule.weights.size();
  if (!relative) {
    for (std::size_t i = 0; i < nodes; ++i) kernels::axpy(rule.weights[i], node(i), dst, t);
    return;
  }
  const double* ref = node(0);
  std::vector<double> diff(t);
  for (std::size_t i = 1; i < nodes; ++i) {
    const double* v = node(i);
    for (std::size_t j = 0; j < t; ++j) diff[j] = v[j] - ref[j];
    kernels::axpy(rule.weights[i], diff.data(), dst, t);
  }
  for (std::size_t j = 0; j < t; ++j) dst[j] += ref[j];
}

}  // namespace

std::vector<double> smooth_at(const ScalarFunction& f, const SmootherConfig& cfg, double x) {
  const QuadratureRule rule = quadrature_rule(cfg);
  std::vector<std::vector<double>> vals;
  vals.reserve(rule.offsets.size());
  for (double off : rule.offsets) {
    vals.push_back(f(x + off));
    if (vals.back().size() != vals.front().size())
      throw ShapeError("smooth_at: function output size changed between nodes");
  }
  const std::size_t t = vals.front().size();
  std::vector<double> acc(t, 0.0);
  combine_nodes(rule, cfg.renormalize, [&](std::size_t i) { return vals[i].data(); }, acc.data(), t);
  return acc;
}

Matrix smooth_points(const BatchFunction& f, const SmootherConfig& cfg, std::span<const double> xs) {
  const QuadratureRule rule = quadrature_rule(cfg);
  const std::size_t nodes = rule.offsets.size();
  Matrix out;
  // Chunk over query points so that the node batch stays bounded in memory.
  const std::size_t per_chunk = std::max<std::size_t>(1, kNodeChunk / nodes);
  for (std::size_t start = 0; start < xs.size(); start += per_chunk) {
    const std::size_t stop = std::min(xs.size(), start + per_chunk);
    std::vector<double> pts;
    pts.reserve((stop - start) * nodes);
    for (std::size_t q = start; q < stop; ++q)
      for (double off : rule.offsets) pts.push_back(xs[q] + off);
    const Matrix vals = f(pts);
    if (vals.rows() != pts.size()) throw ShapeError("smooth_points: batch function returned wrong row count");
    if (out.empty()) out = Matrix(xs.size(), vals.cols());
    for (std::size_t q = start; q < stop; ++q) {
      const double* base = vals.data() + (q - start) * nodes * vals.cols();
      combine_nodes(
          rule, cfg.renormalize, [&](std::size_t i) { return base + i * vals.cols(); },
          out.data() + q * out.cols(), vals.cols());
    }
  }
  return out;
}

Matrix smooth_grid(const Matrix& values, const SmootherConfig& cfg, std::span<const double> grid,
                   const BatchFunction& f) {
  const std::size_t n = grid.size();
  if (values.rows() != n) throw ShapeError("smooth_grid: values and grid have different lengths");
  if (n < 2) throw Error("smooth_grid: grid needs at least two points");
  const double x0 = grid.front();
  const double h = (grid.back() - x0) / static_cast<double>(n - 1);
  const double range = std::abs(grid.back() - x0);
  for (std::size_t i = 1; i < n; ++i)
    if (std::abs((grid[i] - grid[i - 1]) - h) > 1e-9 * range)
      throw Error("smooth_grid: grid is not uniform at index " + std::to_string(i));

  const QuadratureRule rule = quadrature_rule(cfg);
  const std::size_t nodes = rule.offsets.size();
  const std::size_t t = values.cols();

  // Pass 1: classify each node as a grid hit or an off-grid evaluation.
  std::vector<std::ptrdiff_t> source(n * nodes);
  std::vector<double> off_grid;
  for (std::size_t q = 0; q < n; ++q) {
    for (std::size_t i = 0; i < nodes; ++i) {
      const double y = grid[q] + rule.offsets[i];
      const double pos = (y - x0) / h;
      const double idx = std::round(pos);
      if (std::abs(pos - idx) < 1e-9 && idx >= 0.0 && idx < static_cast<double>(n)) {
        source[q * nodes + i] = static_cast<std::ptrdiff_t>(idx);
      } else {
        source[q * nodes + i] = -1 - static_cast<std::ptrdiff_t>(off_grid.size());
        off_grid.push_back(y);
      }
    }
  }

  Matrix extra;
  if (!off_grid.empty()) {
    extra = Matrix(off_grid.size(), t);
    for (std::size_t start = 0; start < off_grid.size(); start += kNodeChunk) {
      const std::size_t stop = std::min(off_grid.size(), start + kNodeChunk);
      const Matrix vals = f(std::span<const double>(off_grid).subspan(start, stop - start));
      if (vals.rows() != stop - start || vals.cols() != t)
        throw ShapeError("smooth_grid: batch function returned wrong shape");
      std::copy(vals.data(), vals.data() + vals.size(), extra.data() + start * t);
    }
  }

  Matrix out(n, t);
  for (std::size_t q = 0; q < n; ++q) {
    const auto node = [&](std::size_t i) {
      const std::ptrdiff_t s = source[q * nodes + i];
      return s >= 0 ? values.data() + static_cast<std::size_t>(s) * t
                    : extra.data() + static_cast<std::size_t>(-1 - s) * t;
    };
    combine_nodes(rule, cfg.renormalize, node, out.data() + q * t, t);
  }
  return out;
}

}  // namespace sal
