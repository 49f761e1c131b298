#include <doctest.h>

#include <cmath>

#include "gen.hpp"
#include "oracles.hpp"
#include "sublin/errors.hpp"
#include "sublin/gnormal.hpp"
#include "sublin/inequality.hpp"

using namespace sublin;
using namespace sublin::gnormal;

namespace {
const GParams kBox = GParams::variance(0.25, 1.0);
}

TEST_CASE("G function") {
  CHECK(g_function(0.0, kBox) == 0.0);
  CHECK(g_function(2.0, kBox) == doctest::Approx(1.0));
  CHECK(g_function(-2.0, kBox) == doctest::Approx(-0.25));
  const GParams m{1.0, 1.0, -1.0, 2.0};
  CHECK(g_bar_function(1.0, m) == doctest::Approx(2.0));
  CHECK(g_bar_function(-1.0, m) == doctest::Approx(1.0));
}

TEST_CASE("property: G is sublinear and monotone") {
  gen::Gen g(3);
  for (int i = 0; i < 1000; ++i) {
    const double lo = g.uniform(0, 2), hi = lo + g.uniform(0, 2);
    const auto p = GParams::variance(lo, hi);
    const double a = g.uniform(-5, 5), b = g.uniform(-5, 5), l = g.uniform(0, 3);
    CHECK(g_function(a + b, p) <= g_function(a, p) + g_function(b, p) + 1e-12);
    CHECK(g_function(l * a, p) == doctest::Approx(l * g_function(a, p)));
    CHECK(g_function(std::max(a, b), p) >= g_function(std::min(a, b), p));
  }
}

TEST_CASE("parameter validation") {
  CHECK_THROWS_AS(GParams::variance(1.0, 0.5).validate(), ConfigError);
  CHECK_THROWS_AS(GParams::variance(-0.1, 0.5).validate(), ConfigError);
  CHECK_THROWS_AS((GParams{1.0, 1.0, 1.0, 0.0}.validate()), ConfigError);
  GParams::variance(0.0, 1.0).validate();
  auto grid = stable_grid(kBox, -5, 5, 201, 1.0);
  CHECK_NOTHROW(grid.validate(kBox));
  CHECK(grid.dt() <= grid.dx() * grid.dx() / (1.0 * (1.0 + kStabilityMargin)) + 1e-15);
  grid.nt /= 2;
  CHECK_THROWS_AS(grid.validate(kBox), ConfigError);
}

TEST_CASE("closed-form cases") {
  CHECK(gnormal_expect(make_test_function("sq"), kBox) == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(gnormal_expect(make_test_function("neg_sq"), kBox) == doctest::Approx(-0.25).epsilon(1e-3));
  CHECK(std::abs(gnormal_expect(make_test_function("identity"), kBox)) < 1e-9);
  // u(t, 0) = sigma_upper^2 t for the square at other horizons
  const auto sq = make_test_function("sq");
  const double t = 0.5;
  const double half = truncation_half_width(sq, kBox, t);
  const auto sol = solve_g_heat(sq, kBox, stable_grid(kBox, -half, half, 1001, t));
  CHECK(sol.value_at_origin() == doctest::Approx(0.5).epsilon(1e-3));
  CHECK(std::abs(gnormal_expect(make_test_function("abs"), GParams::variance(1, 1)) - std::sqrt(2 / M_PI)) < 2e-3);
}

TEST_CASE("degenerate volatility") {
  const auto phi = make_test_function("butterfly:1");
  CHECK(gnormal_expect(phi, GParams::variance(0.0, 0.0)) == doctest::Approx(phi(0.0)));
  CHECK(gnormal_expect(phi, GParams::variance(0.0, 1.0)) >= phi(0.0) - 1e-9);
}

TEST_CASE("equal volatilities against Gauss-Hermite") {
  for (double v : {0.25, 1.0, 2.0}) {
    for (const char* tag : {"cos", "gauss_bump"}) {
      const auto phi = make_test_function(tag);
      const double gh = oracle::gaussian_expect([&](double x) { return phi(x); }, v);
      CHECK(std::abs(gnormal_expect(phi, GParams::variance(v, v)) - gh) <= 1e-3);
    }
    // closed forms for the two smooth payoffs
    CHECK(oracle::gaussian_expect([](double x) { return std::cos(x); }, v) == doctest::Approx(std::exp(-v / 2)));
    CHECK(oracle::gaussian_expect([](double x) { return std::exp(-x * x); }, v) ==
          doctest::Approx(1 / std::sqrt(1 + 2 * v)));
  }
}

TEST_CASE("PDE against the control lattice") {
  for (const char* tag : {"clip:1", "tanh", "small_ball:1", "call_spread:1", "butterfly:1"}) {
    const auto phi = make_test_function(tag);
    CAPTURE(tag);
    CHECK(std::abs(gnormal_expect(phi, kBox) - control_tree_value(phi, kBox, 1000)) <= 1e-2);
  }
  // the complement of the smoothed indicator of the proof
  TestFunction ramp{"ramp", [](double x) { return 1 - ineq::smooth_indicator(std::abs(x) / 1.5, 0.5); }, 0, true, 1.5};
  const double v = gnormal_expect(ramp, kBox);
  CHECK(v > 0.0);
  CHECK(v < 1.0);
  CHECK(std::abs(v - control_tree_value(ramp, kBox, 1000)) <= 1e-2);
}

TEST_CASE("control lattice") {
  CHECK(control_tree_value(make_test_function("sq"), kBox, 7) == doctest::Approx(1.0));
  CHECK(control_tree_value(make_test_function("sq"), kBox, 200) == doctest::Approx(1.0));
  CHECK(control_tree_value(make_test_function("neg_sq"), kBox, 200) == doctest::Approx(-0.25).epsilon(1e-9));
  // equal volatilities: the binomial value approaches the Gaussian one
  const auto phi = make_test_function("gauss_bump");
  const double exact = 1 / std::sqrt(3.0);
  const double coarse = std::abs(control_tree_value(phi, GParams::variance(1, 1), 20) - exact);
  const double fine = std::abs(control_tree_value(phi, GParams::variance(1, 1), 800) - exact);
  CHECK(fine < coarse);
  CHECK(fine < 1e-3);
  // more volatility choices never lower the value
  const auto cs = make_test_function("call_spread:1");
  CHECK(control_tree_value(cs, kBox, 300, 5) >= control_tree_value(cs, kBox, 300, 2) - 1e-12);
}

TEST_CASE("property: solver monotone in the payoff and in the upper volatility") {
  gen::Gen g(8);
  for (int i = 0; i < 10; ++i) {
    const double w = g.uniform(0.5, 2.0);
    const auto a = make_test_function("clip:" + std::to_string(w));
    TestFunction b{"shifted", [a](double x) { return a(x) - 0.1; }, 0, true, a.support_radius};
    CHECK(gnormal_expect(b, kBox, 801) <= gnormal_expect(a, kBox, 801) + 1e-12);
    const double hi = g.uniform(1.0, 2.0);
    const auto bf = make_test_function("butterfly:1");
    CHECK(gnormal_expect(bf, GParams::variance(0.25, hi), 801) <= gnormal_expect(bf, GParams::variance(0.25, 2.5), 801) + 1e-9);
  }
}

TEST_CASE("growth checks") {
  CHECK_THROWS_AS(gnormal_expect(make_test_function("exp"), kBox), ConfigError);
  CHECK_THROWS_AS(gnormal_expect(make_test_function("cube"), kBox), ConfigError);
  CHECK_NOTHROW(gnormal_expect(make_test_function("cube"), kBox, 801, 3));
}

TEST_CASE("stored surface") {
  const auto phi = make_test_function("tanh");
  const auto grid = stable_grid(kBox, -8, 8, 401, 1.0);
  SolveOptions o;
  o.store_every = 10;
  const auto sol = solve_g_heat(phi, kBox, grid, o);
  CHECK(sol.time_indices.front() == 0);
  CHECK(sol.time_indices.back() == grid.nt);
  CHECK(sol.time(sol.time_indices.size() - 1) == doctest::Approx(1.0));
  CHECK(sol.row(0)[200] == doctest::Approx(phi(0.0)));
  // boundary nodes keep their initial values
  CHECK(sol.final_row()[0] == doctest::Approx(phi(-8.0)));
}

TEST_CASE("maximal distribution") {
  const GParams m{1.0, 1.0, -1.0, 2.0};
  CHECK(maximal_expect(make_test_function("identity"), m) == doctest::Approx(2.0));
  CHECK(maximal_expect(make_test_function("neg_abs"), m) == doctest::Approx(0.0).epsilon(1e-9));
  const GParams point{1.0, 1.0, 0.7, 0.7};
  CHECK(maximal_expect(make_test_function("sq"), point) == doctest::Approx(0.49));
}
