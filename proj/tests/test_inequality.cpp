#include <doctest.h>

#include <cmath>

#include "gen.hpp"
#include "sublin/errors.hpp"
#include "sublin/inequality.hpp"
#include "sublin/scenario.hpp"

using namespace sublin;
using namespace sublin::ineq;

TEST_CASE("Kolmogorov-type bound") {
  CHECK(kolmogorov_upper_bound(1, 1, 1) == doctest::Approx(std::exp(-0.25 * (1 + 2.0 / 3.0 * std::log(2.0)))));
  CHECK(kolmogorov_upper_bound(1, 1, 1) == doctest::Approx(0.6938).epsilon(1e-4));
  CHECK(kolmogorov_upper_bound(1, 1, 1e12) == doctest::Approx(1.0).epsilon(1e-9));
  const double b = 1e8;
  CHECK(kolmogorov_upper_bound(1, 1, b) == doctest::Approx(std::exp(-1 / (2 * b))).epsilon(1e-12));
  CHECK_THROWS_AS(kolmogorov_upper_bound(0, 1, 1), DomainError);
  CHECK_THROWS_AS(kolmogorov_upper_bound(1, -1, 1), DomainError);
  CHECK_THROWS_AS(kolmogorov_upper_bound(1, 1, 0), DomainError);
}

TEST_CASE("property: Kolmogorov bound lies in (0, 1] and decreases in x") {
  gen::Gen g(4);
  for (int i = 0; i < 2000; ++i) {
    const double x = g.uniform(0.01, 20), y = g.uniform(0.01, 5), bn = g.uniform(0.1, 100);
    const double v = kolmogorov_upper_bound(x, y, bn);
    CHECK(v > 0.0);
    CHECK(v <= 1.0);
    CHECK(kolmogorov_upper_bound(x * 1.1, y, bn) <= v + 1e-15);
  }
}

TEST_CASE("Fuk-Nagaev type bound") {
  CHECK(fuk_nagaev_bound(2, 1, 2, 3, 0, 1) == doctest::Approx(std::exp(-4.0 / 12.0)));
  double last = 1e300;
  for (double x = 1; x < 200; x *= 1.3) {
    const double v = fuk_nagaev_bound(x, 0.5, 3, 10, 20, 2);
    CHECK(v < last);
    last = v;
  }
  CHECK(last < 1e-3);
  CHECK_THROWS_AS(fuk_nagaev_bound(1, 0, 2, 1, 1, 1), DomainError);
  CHECK_THROWS_AS(fuk_nagaev_bound(1, 1.5, 2, 1, 1, 1), DomainError);
  CHECK_THROWS_AS(fuk_nagaev_bound(1, 1, 1.5, 1, 1, 1), DomainError);
  CHECK_THROWS_AS(fuk_nagaev_bound(1, 1, 2, 1, 1, 0.5), DomainError);
}

TEST_CASE("Chebyshev form follows from the p = 2 bound") {
  // with delta = 1 the Gaussian term e^{-u} is at most 4/(e u') after x e^{-x} <= 1/e
  gen::Gen g(12);
  const double c2 = 1.7;
  const double c = chebyshev_constant(c2);
  CHECK(c == doctest::Approx(c2 + 4 / std::exp(1.0)));
  for (int i = 0; i < 1000; ++i) {
    const double bn = g.uniform(0.1, 50), x = g.uniform(0.05, 30);
    // M_{n,2} = B_n for the p = 2 moment
    CHECK(fuk_nagaev_bound(x, 1.0, 2.0, bn, bn, c2) <= chebyshev_bound(x, bn, c) * (1 + 1e-12));
  }
}

TEST_CASE("Rosenthal bounds") {
  // one step at a point mass a > 0: left side a^p, right side p^p a^p + C B^{p/2}
  const double a = 1.5;
  const std::vector<double> per_step = {a * a};
  const double rhs = rosenthal_choquet_bound(2, a * a, per_step, 1.0);
  CHECK(rhs == doctest::Approx(4 * a * a + a * a));
  CHECK(a * a <= rhs);
  const scenario::ScenarioSet point({scenario::DiscreteDistribution::point_mass(a)});
  CHECK(scenario::choquet_integral(point, scenario::CapacityKind::upper, [](scenario::Point x) {
          return std::pow(std::max(x[0], 0.0), 2);
        }) == doctest::Approx(a * a));
  // nonpositive steps: the left side is zero
  const scenario::ScenarioSet neg({scenario::DiscreteDistribution::from_atoms({{-1.0, 0.5}, {-2.0, 0.5}})});
  CHECK(scenario::choquet_integral(neg, scenario::CapacityKind::upper,
                                   [](scenario::Point x) { return std::max(x[0], 0.0); }) == 0.0);

  const std::vector<std::pair<double, double>> centered(10, {0.0, 0.0});
  const double nd = rosenthal_moment_bound(3, 10, 12, std::span<const std::pair<double, double>>(centered), 2.0,
                                           RosenthalVariant::nd_max);
  const double ind = rosenthal_moment_bound(3, 10, 12, std::nullopt, 2.0, RosenthalVariant::independent_increment);
  CHECK(nd == doctest::Approx(ind));
  CHECK(rosenthal_moment_bound(2, 7, 5, std::nullopt, 3.0, RosenthalVariant::independent_increment) ==
        doctest::Approx(3.0 * (5 + 7)));
  CHECK_THROWS_AS(rosenthal_moment_bound(2, 7, 5, std::nullopt, 3.0, RosenthalVariant::nd_max), DomainError);
  CHECK_THROWS_AS(rosenthal_choquet_bound(1.5, 1, per_step, 1), DomainError);
}

TEST_CASE("lower bound exponent") {
  CHECK(lower_bound_exponent(0, 1, 0.5, 2) == doctest::Approx(std::exp(-0.5 * 4 / 2)));
  CHECK(lower_bound_exponent(0.25, 0.5, 0.1, 2) == doctest::Approx(0.4966).epsilon(1e-4));
  double last = 0;
  for (double d = 0.9; d > 0.01; d -= 0.1) {
    const double v = lower_bound_exponent(0, 1, d, 2);
    CHECK(v > last);
    last = v;
  }
  CHECK_THROWS_AS(lower_bound_exponent(1, 1, 0.1, 2), DomainError);
  CHECK_THROWS_AS(lower_bound_exponent(0.5, 1, 0.8, 2), DomainError);
}

TEST_CASE("smooth indicator") {
  CHECK(smooth_indicator(1.0, 0.5) == 1.0);
  CHECK(smooth_indicator(3.0, 0.5) == 1.0);
  CHECK(smooth_indicator(0.5, 0.5) == 0.0);
  CHECK(smooth_indicator(-2.0, 0.5) == 0.0);
  const double mid = smooth_indicator(0.75, 0.5);
  CHECK(mid > 0.0);
  CHECK(mid < 1.0);
  double last = 0;
  for (double x = 0.5; x <= 1.0; x += 0.01) {
    const double v = smooth_indicator(x, 0.5);
    CHECK(v >= last);
    // sandwich between the indicators of [1, inf) and [1 - eps, inf)
    CHECK(v <= (x >= 0.5 ? 1.0 : 0.0));
    CHECK(v >= (x >= 1.0 ? 1.0 : 0.0));
    last = v;
  }
  CHECK_THROWS_AS(smooth_indicator(0.5, 0.0), DomainError);
  CHECK_THROWS_AS(smooth_indicator(0.5, 1.0), DomainError);
}

TEST_CASE("truncation level") {
  const double x = 5, d = 1, beta = 0.1;
  const double rho = std::min(1.0, 1.0 / (2 * (1 + 1 / d) * d * std::log(1 / beta)));
  CHECK(proof_truncation_level(x, d, beta) == doctest::Approx(rho * d * x));
  CHECK(proof_truncation_level(x, d, 0.99) == doctest::Approx(d * x));
}

TEST_CASE("moment summary") {
  sim::StepFamily f;
  f.bounds = sim::GParams::variance(0.25, 1.0);
  const auto m = moment_summary(f, 10, 3);
  CHECK(m.b_n == doctest::Approx(10));
  CHECK(m.m_np == doctest::Approx(10));
  CHECK(m.upper_means.size() == 10);
  CHECK(dominated_by(0.5, 0.4, 0.04));
  CHECK_FALSE(dominated_by(0.5, 0.4, 0.01));
}

TEST_CASE("verification harness") {
  VerifyConfig c;
  c.family.bounds = sim::GParams::variance(0.25, 1.0);
  c.n = 100;
  c.n_paths = 5000;
  c.x_grid = {1.0, 2.0};
  c.y_grid = {1.0, 2.0};
  const auto k = verify_bound("kolmogorov", c);
  CHECK(k.cells.size() == 4);
  CHECK(k.all_dominated());
  c.n_paths = 100;
  const auto few = verify_bound("kolmogorov", c);
  CHECK_FALSE(few.cells.front().warning.empty());
  c.n_paths = 5000;
  c.constant = 1.0;
  CHECK(verify_bound("fuk-nagaev", c).all_dominated());
  c.constant = chebyshev_constant(1.0);
  CHECK(verify_bound("chebyshev", c).all_dominated());
  // an absurdly small constant is caught
  c.constant = 1e-4;
  CHECK_FALSE(verify_bound("chebyshev", c).all_dominated());
  const auto cal = calibrate_constant("chebyshev", c, {1e-4, 1e-3, 0.5, 3.0});
  REQUIRE(cal);
  CHECK(*cal >= 1e-3);
  CHECK_THROWS_AS(verify_bound("markov", c), ConfigError);
}
