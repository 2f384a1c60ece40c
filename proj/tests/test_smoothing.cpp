#include <cmath>
#include <numbers>

#include "doctest.h"
#include "sal/error.hpp"
#include "sal/smoothing.hpp"
#include "test_util.hpp"

using namespace sal;

namespace {

const double kInvSqrt2Pi = 1.0 / std::sqrt(2.0 * std::numbers::pi);

SmootherConfig tau_window(double tau, int m, bool renorm) {
  return SmootherConfig{tau, WindowSpec::tau_multiples(6.0), m, renorm};
}

BatchFunction batch_of(double (*f)(double)) {
  return [f](std::span<const double> xs) {
    Matrix out(xs.size(), 1);
    for (std::size_t i = 0; i < xs.size(); ++i) out(i, 0) = f(xs[i]);
    return out;
  };
}

ScalarFunction scalar_of(double (*f)(double)) {
  return [f](double x) { return std::vector<double>{f(x)}; };
}

double smooth_fn(double x) { return std::sin(3.0 * x) + 0.5 * x * x; }

}  // namespace

TEST_CASE("gaussian kernel") {
  CHECK(gaussian_eval(1.0, 0.0) == doctest::Approx(0.39894228).epsilon(1e-8));
  CHECK(gaussian_eval(2.0, 0.0) == doctest::Approx(0.5 * kInvSqrt2Pi).epsilon(1e-15));
  CHECK(gaussian_eval(1.0, 1.0) == doctest::Approx(std::exp(-0.5) * kInvSqrt2Pi).epsilon(1e-15));
  CHECK_THROWS_AS(gaussian_eval(0.0, 1.0), Error);
}

TEST_CASE("quadrature nodes and weights follow the discrete operator") {
  const SmootherConfig cfg{0.1, WindowSpec::grid_steps(10, 0.05), 4, false};
  const QuadratureRule r = quadrature_rule(cfg);
  REQUIRE(r.offsets.size() == 4);
  // h = 0.5, node spacing 2h/M = 0.25, offsets -h + 0.25 i for i = 1..4.
  CHECK(r.offsets[0] == doctest::Approx(-0.25));
  CHECK(r.offsets[1] == doctest::Approx(0.0));
  CHECK(r.offsets[3] == doctest::Approx(0.5));
  for (std::size_t i = 0; i < 4; ++i) CHECK(r.weights[i] == doctest::Approx(0.25 * gaussian_eval(0.1, r.offsets[i])));
  for (double w : r.weights) CHECK(w > 0.0);
}

TEST_CASE("weights sum to one within quadrature error; renormalized weights exactly") {
  for (double tau : {1e-3, 6e-3, 0.1, 2.0}) {
    double s = 0.0;
    for (double w : quadrature_rule(tau_window(tau, 200, false)).weights) s += w;
    CHECK(std::abs(s - 1.0) <= 1e-3);
  }
  const auto x = smooth_at([](double) { return std::vector<double>{2.5, -1.0}; }, tau_window(0.03, 200, true), 0.7);
  CHECK(x[0] == 2.5);
  CHECK(x[1] == -1.0);
  const auto y = smooth_at([](double) { return std::vector<double>{2.5}; }, tau_window(0.03, 200, false), 0.7);
  CHECK(std::abs(y[0] - 2.5) <= 1e-3 * 2.5);
}

TEST_CASE("odd integrand vanishes at the window centre") {
  // Nodes include b_x but not a_x; a 9 tau window makes the unpaired end weight negligible.
  const SmootherConfig cfg{0.05, WindowSpec::tau_multiples(9.0), 200, true};
  const auto v = smooth_at([](double x) { return std::vector<double>{x}; }, cfg, 0.0);
  CHECK(std::abs(v[0]) <= 1e-12);
}

TEST_CASE("invalid smoother configurations") {
  CHECK_THROWS_AS(SmootherConfig({0.0, WindowSpec::tau_multiples(6), 200, false}).validate(), Error);
  CHECK_THROWS_AS(SmootherConfig({0.1, WindowSpec::tau_multiples(6), 1, false}).validate(), Error);
  CHECK_THROWS_AS(SmootherConfig({0.1, WindowSpec::grid_steps(0, 0.1), 10, false}).validate(), Error);
  CHECK_THROWS_AS(SmootherConfig({0.1, WindowSpec::grid_steps(10, 0.0), 10, false}).validate(), Error);
}

TEST_CASE("smooth_grid agrees with smooth_at and reuses grid values") {
  std::vector<double> grid(201);
  for (std::size_t i = 0; i < grid.size(); ++i) grid[i] = -1.0 + 0.01 * static_cast<double>(i);
  Matrix values(grid.size(), 1);
  for (std::size_t i = 0; i < grid.size(); ++i) values(i, 0) = smooth_fn(grid[i]);

  // Nodes on the grid (node spacing = 2 grid steps) and off the grid.
  const SmootherConfig on_grid{0.02, WindowSpec::grid_steps(10, 0.01), 10, false};
  const SmootherConfig off_grid{0.02, WindowSpec::tau_multiples(6.0), 37, true};
  for (const SmootherConfig& cfg : {on_grid, off_grid}) {
    std::size_t calls = 0;
    const BatchFunction f = [&](std::span<const double> xs) {
      calls += xs.size();
      return batch_of(smooth_fn)(xs);
    };
    const Matrix s = smooth_grid(values, cfg, grid, f);
    for (std::size_t i = 0; i < grid.size(); i += 7)
      CHECK(s(i, 0) == doctest::Approx(smooth_at(scalar_of(smooth_fn), cfg, grid[i])[0]).epsilon(1e-12));
    if (&cfg == &on_grid) CHECK(calls < grid.size() * 10);
  }

  std::vector<double> bent = grid;
  bent[50] += 1e-4;
  CHECK_THROWS_AS(smooth_grid(values, on_grid, bent, batch_of(smooth_fn)), Error);
}

TEST_CASE("smooth_points matches smooth_at") {
  const SmootherConfig cfg{0.01, WindowSpec::grid_steps(100, 2.0 / 5000), 201, false};
  const std::vector<double> xs{-0.9, -0.31, 0.0, 0.55, 1.05};
  const Matrix s = smooth_points(batch_of(smooth_fn), cfg, xs);
  for (std::size_t i = 0; i < xs.size(); ++i)
    CHECK(s(i, 0) == doctest::Approx(smooth_at(scalar_of(smooth_fn), cfg, xs[i])[0]).epsilon(1e-13));
}

TEST_CASE("approximate identity as tau shrinks") {
  std::vector<double> grid(1001);
  for (std::size_t i = 0; i < grid.size(); ++i) grid[i] = -1.0 + 0.002 * static_cast<double>(i);
  Matrix values(grid.size(), 1);
  for (std::size_t i = 0; i < grid.size(); ++i) values(i, 0) = smooth_fn(grid[i]);

  const Matrix tiny = smooth_grid(values, tau_window(0.002 / 10, 200, true), grid, batch_of(smooth_fn));
  CHECK(testing::rel_diff(tiny, values) <= 1e-3);

  double prev = 1e300;
  for (double tau : {0.2, 0.1, 0.05, 0.02, 0.01, 0.005}) {
    const Matrix s = smooth_grid(values, tau_window(tau, 200, true), grid, batch_of(smooth_fn));
    const double err = frobenius(s - values);
    CHECK(err <= prev + 1e-6);
    prev = err;
  }
}

TEST_CASE("linear functions are reproduced at interior points") {
  std::vector<double> grid(401);
  for (std::size_t i = 0; i < grid.size(); ++i) grid[i] = 0.005 * static_cast<double>(i);
  Matrix values(grid.size(), 1);
  auto lin = [](double x) { return 3.0 * x - 1.0; };
  for (std::size_t i = 0; i < grid.size(); ++i) values(i, 0) = lin(grid[i]);
  const BatchFunction f = [&](std::span<const double> xs) {
    Matrix out(xs.size(), 1);
    for (std::size_t i = 0; i < xs.size(); ++i) out(i, 0) = lin(xs[i]);
    return out;
  };
  const Matrix s = smooth_grid(values, tau_window(0.01, 200, true), grid, f);
  for (std::size_t i = 20; i + 20 < grid.size(); ++i) CHECK(std::abs(s(i, 0) - values(i, 0)) <= 1e-10);
}

TEST_CASE("smoothing is linear") {
  SplitMix64 rng(8);
  const double a = rng.next_double(), b = -rng.next_double();
  std::vector<double> grid(101);
  for (std::size_t i = 0; i < grid.size(); ++i) grid[i] = 0.01 * static_cast<double>(i);
  auto g = [](double x) { return std::cos(5.0 * x); };
  Matrix fv(101, 1), gv(101, 1), mix(101, 1);
  for (std::size_t i = 0; i < 101; ++i) {
    fv(i, 0) = smooth_fn(grid[i]);
    gv(i, 0) = g(grid[i]);
    mix(i, 0) = a * fv(i, 0) + b * gv(i, 0);
  }
  const SmootherConfig cfg = tau_window(0.03, 120, false);
  const BatchFunction fb = batch_of(smooth_fn);
  const BatchFunction gb = [&](std::span<const double> xs) {
    Matrix out(xs.size(), 1);
    for (std::size_t i = 0; i < xs.size(); ++i) out(i, 0) = g(xs[i]);
    return out;
  };
  const BatchFunction mb = [&](std::span<const double> xs) {
    Matrix u = fb(xs), v = gb(xs);
    for (std::size_t i = 0; i < u.rows(); ++i) u(i, 0) = a * u(i, 0) + b * v(i, 0);
    return u;
  };
  const Matrix sf = smooth_grid(fv, cfg, grid, fb);
  const Matrix sg = smooth_grid(gv, cfg, grid, gb);
  const Matrix sm = smooth_grid(mix, cfg, grid, mb);
  for (std::size_t i = 0; i < 101; ++i) CHECK(std::abs(sm(i, 0) - (a * sf(i, 0) + b * sg(i, 0))) <= 1e-12);
}
