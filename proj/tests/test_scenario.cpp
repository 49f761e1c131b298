#include <doctest.h>

#include <cmath>

#include "gen.hpp"
#include "sublin/errors.hpp"
#include "sublin/scenario.hpp"
#include "sublin/test_function.hpp"

using namespace sublin;
using namespace sublin::scenario;

namespace {

ScenarioSet two_point_pair() {
  return ScenarioSet({DiscreteDistribution::from_atoms({{-1.0, 0.5}, {1.0, 0.5}}),
                      DiscreteDistribution::from_atoms({{-2.0, 0.5}, {2.0, 0.5}})});
}

double first(Point x) { return x[0]; }

}  // namespace

TEST_CASE("sublinear expectation examples") {
  const ScenarioSet single({DiscreteDistribution::point_mass(3.0)});
  CHECK(sublinear_expect(single, first) == doctest::Approx(3.0));
  const auto set = two_point_pair();
  CHECK(sublinear_expect(set, make_test_function("sq")) == doctest::Approx(4.0));
  CHECK(conjugate_expect(set, make_test_function("sq")) == doctest::Approx(1.0));
  CHECK(sublinear_expect(set, [](Point) { return -1.5; }) == doctest::Approx(-1.5));
  CHECK(conjugate_expect(set, [](Point) { return 2.5; }) == doctest::Approx(2.5));
  CHECK(argmax_member(set, [](Point x) { return x[0] * x[0]; }) == 1);
  // ties resolve to the lowest index
  CHECK(argmax_member(set, [](Point) { return 1.0; }) == 0);
}

TEST_CASE("capacities") {
  const auto set = two_point_pair();
  CHECK(upper_capacity(set, [](Point) { return true; }) == 1.0);
  const Event far = [](Point x) { return std::abs(x[0]) >= 2.0; };
  CHECK(upper_capacity(set, far) == doctest::Approx(1.0));
  CHECK(lower_capacity(set, far) == doctest::Approx(0.0));
  const CapacityPair pair(set);
  CHECK(pair.upper(far) >= pair.lower(far));
}

TEST_CASE("choquet integral") {
  const auto set = two_point_pair();
  const auto abs = make_test_function("abs");
  CHECK(choquet_integral(set, CapacityKind::upper, abs) == doctest::Approx(2.0));
  CHECK(choquet_integral(set, CapacityKind::lower, abs) == doctest::Approx(1.0));
  gen::Gen g(11);
  for (int i = 0; i < 200; ++i) {
    const ScenarioSet single({g.distribution(6, -3.0, 3.0)});
    const auto f = make_test_function("sq");
    CHECK(choquet_integral(single, CapacityKind::upper, f) == doctest::Approx(single.member(0).expect(f)).epsilon(1e-12));
    CHECK(choquet_integral(single, CapacityKind::lower, f) == doctest::Approx(single.member(0).expect(f)).epsilon(1e-12));
  }
}

TEST_CASE("property: axioms and consequences on generated sets") {
  gen::Gen g(2024);
  for (int trial = 0; trial < 500; ++trial) {
    const auto set = g.set();
    const double a = g.uniform(-2, 2), b = g.uniform(-2, 2), lam = g.uniform(0, 4), c = g.uniform(-3, 3);
    const PointFunction f = [=](Point x) { return a * std::sin(x[0]) + b * x[0] * x[0]; };
    const PointFunction h = [=](Point x) { return b * std::cos(a * x[0]) - x[0]; };
    const double ef = sublinear_expect(set, f);
    const double eh = sublinear_expect(set, h);
    CHECK(sublinear_expect(set, [&](Point x) { return f(x) - std::abs(h(x)); }) <= ef + 1e-12);
    CHECK(sublinear_expect(set, [&](Point x) { return f(x) + h(x); }) <= ef + eh + 1e-12);
    CHECK(std::abs(sublinear_expect(set, [&](Point x) { return lam * f(x); }) - lam * ef) <= 1e-12 * (1 + lam * std::abs(ef)));
    CHECK(std::abs(sublinear_expect(set, [&](Point x) { return f(x) + c; }) - ef - c) <= 1e-12);
    CHECK(conjugate_expect(set, f) <= ef + 1e-12);
    CHECK(sublinear_expect(set, [&](Point x) { return f(x) - h(x); }) >= ef - eh - 1e-12);

    const double t = g.uniform(-3, 3), u = g.uniform(-3, 3);
    const Event A = [t](Point x) { return x[0] <= t; };
    const Event B = [u](Point x) { return x[0] > u; };
    const Event AB = [&](Point x) { return A(x) || B(x); };
    CHECK(upper_capacity(set, AB) <= upper_capacity(set, A) + upper_capacity(set, B) + 1e-10);
    CHECK(lower_capacity(set, AB) <= lower_capacity(set, A) + upper_capacity(set, B) + 1e-10);
    CHECK(lower_capacity(set, A) <= upper_capacity(set, A) + 1e-12);
  }
}

TEST_CASE("independent product") {
  SUBCASE("singletons give the product measure") {
    const ScenarioSet x({DiscreteDistribution::from_atoms({{0.0, 0.25}, {1.0, 0.75}})});
    const ScenarioSet y({DiscreteDistribution::from_atoms({{2.0, 0.5}, {3.0, 0.5}})});
    const auto joint = independent_product(x, y);
    REQUIRE(joint.size() == 1);
    CHECK(joint.dim() == 2);
    CHECK(sublinear_expect(joint, [](Point p) { return p[0] * p[1]; }) == doctest::Approx(0.75 * 2.5));
  }
  SUBCASE("property: nested identity and product identities") {
    gen::Gen g(77);
    for (int trial = 0; trial < 150; ++trial) {
      const auto x = g.set(3, 3, 0.0, 3.0);
      const auto y = g.set(3, 5, 0.0, 3.0);
      const auto joint = independent_product(x, y);
      const auto phi = [](Point a, Point b) { return std::sin(a[0] * b[0]) + a[0] - b[0] * b[0]; };
      CHECK(sublinear_expect(joint, [&](Point p) { return phi(p.subspan(0, 1), p.subspan(1, 1)); }) ==
            doctest::Approx(nested_expect(x, y, phi)).epsilon(1e-12));
      const auto prod = [](Point p) { return p[0] * p[1]; };
      CHECK(std::abs(sublinear_expect(joint, prod) - sublinear_expect(x, first) * sublinear_expect(y, first)) <= 1e-10);
      CHECK(std::abs(conjugate_expect(joint, prod) - conjugate_expect(x, first) * conjugate_expect(y, first)) <= 1e-10);
    }
  }
  SUBCASE("independence is not symmetric") {
    gen::Gen g(5);
    bool found = false;
    const auto phi = [](Point a, Point b) { return a[0] * b[0] * b[0] - a[0] * a[0] * b[0]; };
    const auto swapped = [&](Point a, Point b) { return phi(b, a); };
    for (int trial = 0; trial < 200 && !found; ++trial) {
      const auto x = g.set(2, 2, -2.0, 2.0);
      const auto y = g.set(2, 2, -2.0, 2.0);
      found = std::abs(nested_expect(x, y, phi) - nested_expect(y, x, swapped)) > 1e-6;
    }
    CHECK(found);
  }
  SUBCASE("enumeration cap") {
    gen::Gen g(9);
    std::vector<DiscreteDistribution> wide;
    for (int i = 0; i < 6; ++i) wide.push_back(DiscreteDistribution::from_atoms({{double(i), 1.0}}));
    std::vector<double> xs, ws;
    for (int i = 0; i < 12; ++i) {
      xs.push_back(i);
      ws.push_back(1.0 / 12.0);
    }
    ws.back() = 1.0 - 11.0 / 12.0;
    const ScenarioSet x({DiscreteDistribution(1, xs, ws)});
    CHECK_THROWS_AS(independent_product(x, ScenarioSet(wide)), ConfigError);
  }
}

TEST_CASE("negative dependence check") {
  const ScenarioSet x({DiscreteDistribution::from_atoms({{-1.0, 0.5}, {1.0, 0.5}})});
  CHECK(nd_product_check(independent_product(x, x), 1).negatively_dependent);
  const ScenarioSet anti({DiscreteDistribution(2, {-1.0, 1.0, 1.0, -1.0}, {0.5, 0.5})});
  CHECK(nd_product_check(anti, 1).negatively_dependent);
  const ScenarioSet como({DiscreteDistribution(2, {-1.0, -1.0, 1.0, 1.0}, {0.5, 0.5})});
  const auto r = nd_product_check(como, 1);
  CHECK_FALSE(r.negatively_dependent);
  CHECK(r.worst_excess > 0.0);
  CHECK(r.pairs_checked > 0);
}

TEST_CASE("Holder check") {
  const auto set = two_point_pair();
  CHECK(holder_check(set, make_test_function("abs"), make_test_function("abs"), 2.0, 2.0));
  CHECK_THROWS_AS(holder_check(set, make_test_function("abs"), make_test_function("sq"), 2.0, 3.0), ConfigError);
  gen::Gen g(31);
  for (int trial = 0; trial < 300; ++trial) {
    const auto s = g.set();
    const double p = g.uniform(1.1, 5.0);
    const double q = p / (p - 1.0);
    CHECK(holder_check(s, make_test_function("sin"), make_test_function("cube"), p, q));
  }
}

TEST_CASE("validation") {
  CHECK_THROWS_AS(DiscreteDistribution::from_atoms({{0.0, 0.5}, {1.0, 0.4}}), ConfigError);
  CHECK_THROWS_AS(DiscreteDistribution::from_atoms({{0.0, -0.5}, {1.0, 1.5}}), ConfigError);
  CHECK_THROWS_AS(DiscreteDistribution::from_atoms({{NAN, 1.0}}), ConfigError);
  CHECK_THROWS_AS(ScenarioSet({}), ConfigError);
  CHECK_THROWS_AS(ScenarioSet({DiscreteDistribution::point_mass(1.0), DiscreteDistribution(2, {0.0, 0.0}, {1.0})}),
                  ConfigError);
}

TEST_CASE("JSON round trip") {
  const auto set = two_point_pair();
  const auto back = scenario_set_from_json(to_json(set));
  CHECK(back.size() == 2);
  CHECK(sublinear_expect(back, make_test_function("sq")) == sublinear_expect(set, make_test_function("sq")));
  CHECK(to_json(back) == to_json(set));
  const auto two = scenario_set_from_json(R"({"members":[{"atoms":[[1,2,0.5],[3,4,0.5]]}]})");
  CHECK(two.dim() == 2);
  CHECK_THROWS_AS(scenario_set_from_json(R"({"members":[]})"), ConfigError);
  CHECK_THROWS_AS(scenario_set_from_json(R"({"members":[{"atoms":[[1]]}]})"), ConfigError);
  CHECK_THROWS_AS(scenario_set_from_json("{"), ConfigError);
}

TEST_CASE("independence probe reports without asserting") {
  const auto set = two_point_pair();
  const auto probe = independence_probe(set, set, [](Point x) { return x[0] > 0; }, [](Point x) { return x[0] > 0; });
  CHECK(probe.joint_upper >= 0.0);
  CHECK(probe.joint_upper <= 1.0);
  CHECK(probe.product_of_uppers == doctest::Approx(0.25));
}
