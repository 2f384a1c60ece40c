#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <set>

#include "doctest.h"
#include "sal/bench_data.hpp"
#include "sal/error.hpp"
#include "sal/rng.hpp"

using namespace sal;

TEST_CASE("SplitMix64 reference vectors") {
  // Published outputs of the reference splitmix64.c for seed 1234567.
  SplitMix64 a(1234567);
  CHECK(a.next_u64() == 6457827717110365317ULL);
  CHECK(a.next_u64() == 3203168211198807973ULL);
  CHECK(a.next_u64() == 9817491932198370423ULL);

  SplitMix64 b(1);
  CHECK(b.next_u64() == 10451216379200822465ULL);
  CHECK(b.next_u64() == 13757245211066428519ULL);
  CHECK(b.next_u64() == 17911839290282890590ULL);
}

TEST_CASE("SplitMix64 doubles lie in [0, 1) and seeds give distinct streams") {
  SplitMix64 g(42);
  for (int i = 0; i < 100000; ++i) {
    const double u = g.next_double();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
  }
  std::set<std::uint64_t> firsts;
  for (std::uint64_t s = 0; s < 100; ++s) firsts.insert(SplitMix64(s).next_u64());
  CHECK(firsts.size() == 100);
  CHECK(derive_seed(1, 2) != derive_seed(1, 3));
  CHECK(derive_seed(1, 2) == derive_seed(1, 2));
}

TEST_CASE("normal draws have unit variance") {
  SplitMix64 g(9);
  double s = 0.0, s2 = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double z = g.next_normal();
    s += z;
    s2 += z * z;
  }
  CHECK(std::abs(s / n) < 0.01);
  CHECK(std::abs(s2 / n - 1.0) < 0.01);
}

TEST_CASE("non-differentiable target") {
  CHECK(target_nondiff(-1.0) == 0.0);
  // phi1(0.3) = 0.3, phi2 = |cos(-0.4 pi) - 0.5| = 0.5 - cos(0.4 pi), phi3 and phi4 leave it unchanged.
  const double hand = 1.3 * (0.5 - std::cos(0.4 * std::numbers::pi));
  CHECK(target_nondiff(0.3) == doctest::Approx(hand).epsilon(1e-14));
  CHECK(target_nondiff(0.3) == doctest::Approx(0.24827790731256805).epsilon(1e-14));
  SplitMix64 g(4);
  for (int i = 0; i < 100; ++i) {
    const double x = -1.0 + 2.0 * g.next_double();
    CHECK(std::abs(target_nondiff(x + 1e-9) - target_nondiff(x)) <= 1e-6);
  }
}

TEST_CASE("oscillatory target") {
  const OscillatoryCoeffs c = OscillatoryCoeffs::generate(3);
  for (double v : target_oscillatory(c, 0.0)) CHECK(v == 0.0);
  for (int j = 1; j < 4; ++j)
    for (double v : target_oscillatory(c, std::numbers::pi / 100.0 * j)) CHECK(std::abs(v) < 1e-12);
  const auto y = target_oscillatory(c, 0.1);
  REQUIRE(y.size() == 20);
  for (std::size_t k = 0; k < 20; ++k)
    CHECK(y[k] == doctest::Approx((c.a[k] * 0.01 + c.b[k] * 0.1 + c.c[k]) * std::sin(10.0)).epsilon(1e-14));
}

TEST_CASE("shipped coefficient file is the frozen seed-1 draw") {
  const OscillatoryCoeffs shipped = OscillatoryCoeffs::load(default_coeff_path());
  CHECK(shipped == OscillatoryCoeffs::generate(1));
  CHECK(shipped.a[0] == -0.17133660895925573);
  CHECK(shipped.b[0] == 2.5840360471709971);
  CHECK(shipped.c[0] == 2.6445227267468581);
  CHECK(shipped.c[19] == -10.468576137680463);
}

TEST_CASE("coefficient file round trip") {
  const auto path = (std::filesystem::temp_directory_path() / "sal_coeffs_roundtrip.txt").string();
  const OscillatoryCoeffs c = OscillatoryCoeffs::generate(77);
  c.save(path);
  CHECK(OscillatoryCoeffs::load(path) == c);
  std::ofstream(path) << "1 2 3\n";
  CHECK_THROWS_AS(OscillatoryCoeffs::load(path), Error);
  std::filesystem::remove(path);
}

TEST_CASE("training grid") {
  const Dataset d = make_train(TargetFn::nondiff(), -1.0, 1.0, 0.1, 3);
  REQUIRE(d.size() == 3);
  CHECK(d.inputs(0, 0) == -1.1);
  CHECK(d.inputs(1, 0) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(d.inputs(2, 0) == 1.1);
  for (std::size_t i = 0; i < 3; ++i) CHECK(d.targets(i, 0) == target_nondiff(d.inputs(i, 0)));

  const Dataset big = make_train(TargetFn::nondiff(), -1.0, 1.0, 0.1, 5001);
  const auto g = big.grid();
  const double step = 2.2 / 5000.0;
  double worst = 0.0;
  for (std::size_t i = 1; i < g.size(); ++i) worst = std::max(worst, std::abs((g[i] - g[i - 1]) - step));
  CHECK(worst <= 1e-12 * 2.2);
  CHECK(g.back() == 1.1);
}

TEST_CASE("test set is uniform, in range and seed-determined") {
  const Dataset a = make_test(TargetFn::nondiff(), -1.0, 1.0, 1000, 1);
  const Dataset b = make_test(TargetFn::nondiff(), -1.0, 1.0, 1000, 1);
  const Dataset c = make_test(TargetFn::nondiff(), -1.0, 1.0, 1000, 2);
  CHECK(a.inputs == b.inputs);
  CHECK_FALSE(a.inputs == c.inputs);
  std::vector<double> x = a.grid();
  for (double v : x) {
    CHECK(v >= -1.0);
    CHECK(v <= 1.0);
  }
  std::sort(x.begin(), x.end());
  double ks = 0.0;
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double cdf = (x[i] + 1.0) / 2.0;
    ks = std::max({ks, std::abs(cdf - i / n), std::abs((i + 1) / n - cdf)});
  }
  CHECK(ks <= 0.05);
}

TEST_CASE("custom tabulated target") {
  const TargetFn f = TargetFn::custom({0.0, 1.0, 3.0}, Matrix{{0.0, 1.0}, {2.0, 1.0}, {6.0, -1.0}});
  CHECK(f.output_dim() == 2);
  CHECK(f(0.5) == std::vector<double>{1.0, 1.0});
  CHECK(f(2.0) == std::vector<double>{4.0, 0.0});
  CHECK(f(-5.0) == std::vector<double>{0.0, 1.0});
  CHECK(f(9.0) == std::vector<double>{6.0, -1.0});
  CHECK_THROWS_AS(TargetFn::custom({0.0, 0.0}, Matrix{{1.0}, {2.0}}), Error);

  const auto path = (std::filesystem::temp_directory_path() / "sal_custom_target.csv").string();
  std::ofstream(path) << "x,y\n0,1\n2,5\n";
  const TargetFn g = TargetFn::custom_from_csv(path);
  CHECK(g(1.0)[0] == doctest::Approx(3.0));
  std::filesystem::remove(path);
}
