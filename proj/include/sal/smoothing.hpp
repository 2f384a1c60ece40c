#pragma once

#include <functional>
#include <span>
#include <vector>

#include "sal/matrix.hpp"

namespace sal {

/// Half-width of the local quadrature window around a query point x,
/// i.e. [a_x, b_x] = [x - h, x + h].
struct WindowSpec {
  enum class Mode { GridSteps, TauMultiples };

  Mode mode = Mode::TauMultiples;
  int count = 100;      // GridSteps: h = count * step
  double step = 0.0;    // GridSteps
  double factor = 6.0;  // TauMultiples: h = factor * tau

  static WindowSpec grid_steps(int count, double step) { return {Mode::GridSteps, count, step, 0.0}; }
  static WindowSpec tau_multiples(double factor) { return {Mode::TauMultiples, 0, 0.0, factor}; }

  double half_width(double tau) const;

  // Fields the mode does not use are ignored.
  friend bool operator==(const WindowSpec& a, const WindowSpec& b) {
    if (a.mode != b.mode) return false;
    return a.mode == Mode::GridSteps ? a.count == b.count && a.step == b.step : a.factor == b.factor;
  }
};

struct SmootherConfig {
  double tau = 0.0;
  WindowSpec window;
  int quad_points = 200;
  bool renormalize = false;

  void validate() const;
};

/// G_tau(u) = (1/tau) (2 pi)^{-1/2} exp(-(u/tau)^2 / 2).
double gaussian_eval(double tau, double u);

/// Nodes relative to the query point and their weights:
///   y_i - x = -h + i * (2h/M),  w_i = (2h/M) G_tau(x - y_i),  i = 1..M.
/// With renormalize the weights are divided by their sum.
struct QuadratureRule {
  std::vector<double> offsets;
  std::vector<double> weights;
};

QuadratureRule quadrature_rule(const SmootherConfig& cfg);

/// Vector-valued function of a scalar input.
using ScalarFunction = std::function<std::vector<double>(double)>;
/// Batched evaluation: n points -> n x t values.
using BatchFunction = std::function<Matrix(std::span<const double>)>;

/// Smoothed value at x: sum_i w_i f(x + offset_i), nodes in ascending order.
std::vector<double> smooth_at(const ScalarFunction& f, const SmootherConfig& cfg, double x);

/// smooth_at over a batch of query points. `f` is called on all quadrature
/// nodes (in chunks); node sums run in the same order as smooth_at.
Matrix smooth_points(const BatchFunction& f, const SmootherConfig& cfg, std::span<const double> xs);

/// smooth_at at every point of a uniform grid. `values` holds f at the grid
/// points (row per point); nodes that land on a grid point reuse that row and
/// the remaining nodes are evaluated through `f`. Throws on non-uniform grids.
Matrix smooth_grid(const Matrix& values, const SmootherConfig& cfg, std::span<const double> grid,
                   const BatchFunction& f);

}  // namespace sal
