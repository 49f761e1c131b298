#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "sublin/adversarial.hpp"
#include "sublin/errors.hpp"
#include "sublin/scenario.hpp"

using namespace sublin;
using namespace sublin::sim;

namespace {

StepFamily family(BaseKind base, double lo, double hi) {
  StepFamily f;
  f.base = base;
  f.bounds = GParams::variance(lo, hi);
  return f;
}

}  // namespace

TEST_CASE("single Gaussian step has the chosen variance") {
  const auto f = family(BaseKind::gaussian, 0.25, 1.0);
  const auto b = simulate_paths(f, constant_policy("high", {1.0, 0.0}), 1, 100000, 42);
  double m2 = 0.0, m4 = 0.0;
  for (const auto& s : b.summaries) {
    m2 += s.final_sum * s.final_sum;
    m4 += std::pow(s.final_sum, 4);
  }
  m2 /= 1e5;
  m4 /= 1e5;
  const double se = std::sqrt((m4 - m2 * m2) / 1e5);
  CHECK(std::abs(m2 - 1.0) <= 3 * se);
  CHECK(b.b_n == doctest::Approx(1.0));
}

TEST_CASE("standardized draws") {
  for (auto base : {BaseKind::two_point, BaseKind::gaussian, BaseKind::truncated_gaussian, BaseKind::student_t}) {
    StepFamily f = family(base, 1, 1);
    double m1 = 0, m2 = 0;
    const int n = 200000;
    PathRng rng(7, 0, 0);
    for (int i = 0; i < n; ++i) {
      const double z = f.draw_standard(rng);
      m1 += z;
      m2 += z * z;
    }
    CAPTURE(to_string(base));
    CHECK(std::abs(m1 / n) < 0.02);
    CHECK(std::abs(m2 / n - 1) < 0.05);
  }
}

TEST_CASE("equal volatilities follow the classical CLT") {
  const auto f = family(BaseKind::two_point, 1.0, 1.0);
  const auto b = simulate_paths(f, constant_policy("one", {1.0, 0.0}), 400, 20000, 5);
  const double z = 1.0;
  std::size_t hits = 0;
  for (const auto& s : b.summaries) hits += s.final_sum / 20.0 > z ? 1 : 0;
  const double freq = hits / 20000.0;
  // continuity-corrected binomial tail of the exact law
  const double exact = oracle::binomial_sign_tail(400, 20.0 + 1e-9);
  CHECK(std::abs(freq - exact) <= 3 * wilson_standard_error(freq, 20000));
  CHECK(std::abs(exact - oracle::normal_upper_tail(z)) < 0.03);
}

TEST_CASE("determinism") {
  const auto f = family(BaseKind::gaussian, 0.25, 1.0);
  ScriptedRule script;
  for (int k = 0; k < 50; ++k) script.script.push_back({k % 3 == 0 ? 0.25 : 1.0, 0.0});
  const AdversaryPolicy p{"scripted", script, 1};
  SimOptions one, four;
  four.workers = 4;
  one.record_paths = four.record_paths = true;
  const auto a = simulate_paths(f, p, 50, 300, 99, one);
  const auto b = simulate_paths(f, p, 50, 300, 99, four);
  const auto c = simulate_paths(f, p, 50, 300, 100, one);
  REQUIRE(a.trajectories.size() == b.trajectories.size());
  CHECK(a.trajectories == b.trajectories);
  CHECK(a.trajectories != c.trajectories);
  CHECK(a.trajectory(3)[0] == 0.0);
  // path i does not depend on how many paths were asked for
  const auto d = simulate_paths(f, p, 50, 10, 99, one);
  for (std::size_t k = 0; k <= 50; ++k) CHECK(d.trajectory(9)[k] == a.trajectory(9)[k]);
}

TEST_CASE("policies") {
  const GParams box = GParams::variance(0.25, 1.0);
  PathRng rng(1, 0, 1);
  History h{0, 100, 0.0, 0.0};
  ThresholdRule t{0.0, false, true, {1.0, 0.0}, {0.25, 0.0}};
  const AdversaryPolicy tp{"t", t, 1};
  h.running_sum = 1.0;
  CHECK(tp.choose(h, rng).variance == 1.0);
  h.running_sum = -1.0;
  CHECK(tp.choose(h, rng).variance == 0.25);
  CHECK(tp.kind() == "threshold");

  const auto fam = standard_policy_family(box);
  CHECK(fam.size() >= 5);
  for (const auto& p : fam) {
    for (int k = 0; k < 20; ++k) {
      const auto c = p.choose({static_cast<std::size_t>(k), 20, 0.3 * k - 2, 0.0}, rng);
      CHECK((c.variance == 0.25 || c.variance == 1.0));
    }
  }
  const auto means = standard_policy_family(GParams{1, 1, -1, 1}, {true, {}, {}, {}, true});
  bool up = false;
  for (const auto& p : means) up = up || p.choose(h, rng).mean == 1.0;
  CHECK(up);
}

TEST_CASE("out-of-bounds choices are invariant breaches") {
  const auto f = family(BaseKind::two_point, 0.25, 1.0);
  CHECK_THROWS_AS(simulate_paths(f, constant_policy("bad", {2.0, 0.0}), 10, 10, 1), InvariantError);
  CHECK_THROWS_AS(simulate_paths(f, constant_policy("bad", {1.0, 0.5}), 10, 10, 1), InvariantError);
  const AdversaryPolicy short_script{"s", ScriptedRule{{{1.0, 0.0}}}, 1};
  CHECK_THROWS_AS(simulate_paths(f, short_script, 10, 10, 1), ConfigError);
  CHECK_THROWS_AS(simulate_paths(f, constant_policy("ok", {1.0, 0.0}), 0, 10, 1), ConfigError);
}

TEST_CASE("capacity estimates") {
  const auto f = family(BaseKind::two_point, 0.25, 1.0);
  const auto fam = standard_policy_family(f.bounds);
  const auto batches = simulate_family(f, fam, 100, 4000, 3);
  const PathEvent always = [](const PathView&) { return true; };
  CHECK(estimate_upper_capacity(always, batches).value == 1.0);
  CHECK(estimate_lower_capacity(always, batches).value == 1.0);
  const PathEvent wide = [](const PathView& v) { return std::abs(v.summary().final_sum / 10.0) <= 10.0; };
  CHECK(estimate_lower_capacity(wide, batches).value == doctest::Approx(1.0));

  const PathEvent pos = [](const PathView& v) { return v.summary().final_sum >= 0; };
  const auto up = estimate_upper_capacity(pos, batches);
  const auto lo = estimate_lower_capacity(pos, batches);
  CHECK(up.value >= lo.value);
  const std::vector<AdversaryPolicy> single = {constant_policy("high", {1.0, 0.0})};
  const auto one = simulate_family(f, single, 100, 4000, 3);
  const auto u1 = estimate_upper_capacity(pos, one);
  CHECK(u1.value == estimate_lower_capacity(pos, one).value);
  // P(S_100 >= 0) for fair signs, ties at zero included
  const double exact = oracle::binomial_sign_tail(100, 0.0);
  CHECK(std::abs(u1.value - exact) <= 3 * u1.standard_error);
  CHECK(wilson_standard_error(0.0, 100) > 0.0);
}

TEST_CASE("common random numbers across policies") {
  const auto f = family(BaseKind::gaussian, 1.0, 1.0);
  const std::vector<AdversaryPolicy> two = {constant_policy("a", {1.0, 0.0}), constant_policy("b", {1.0, 0.0})};
  const auto bs = simulate_family(f, two, 30, 50, 8);
  for (std::size_t i = 0; i < 50; ++i) CHECK(bs[0].summaries[i].final_sum == bs[1].summaries[i].final_sum);
}

TEST_CASE("couplings and the ND check on two-step marginals") {
  const auto f = family(BaseKind::two_point, 0.25, 1.0);
  CHECK(scenario::nd_product_check(two_step_joint(nd_coupler(f, Coupling::independent)), 1).negatively_dependent);
  CHECK(scenario::nd_product_check(two_step_joint(nd_coupler(f, Coupling::antithetic)), 1).negatively_dependent);
  CHECK_FALSE(scenario::nd_product_check(two_step_joint(nd_coupler(f, Coupling::comonotone)), 1).negatively_dependent);
  CHECK_THROWS_AS(parse_coupling("sideways"), ConfigError);

  // antithetic pairs cancel within each pair under a constant policy
  const auto anti = simulate_paths(nd_coupler(f, Coupling::antithetic), constant_policy("c", {1.0, 0.0}), 10, 20, 4);
  for (const auto& s : anti.summaries) CHECK(s.final_sum == doctest::Approx(0.0));
}

TEST_CASE("moment accumulators") {
  const auto f = family(BaseKind::two_point, 0.25, 1.0);
  SimOptions o;
  o.moment_p = 3.0;
  const auto b = simulate_paths(f, constant_policy("c", {0.25, 0.0}), 40, 5, 1, o);
  CHECK(b.b_n == doctest::Approx(40.0));
  CHECK(b.m_np == doctest::Approx(40.0));
  CHECK(b.summaries[0].policy_b == doctest::Approx(10.0));
}

TEST_CASE("checkpoints and running extremes") {
  const auto f = family(BaseKind::gaussian, 1.0, 1.0);
  SimOptions o;
  o.checkpoints = {1, 5, 20};
  o.record_paths = true;
  const auto b = simulate_paths(f, constant_policy("c", {1.0, 0.0}), 20, 30, 2, o);
  for (std::size_t i = 0; i < 30; ++i) {
    const auto tr = b.trajectory(i);
    CHECK(b.checkpoint(i, 0) == tr[1]);
    CHECK(b.checkpoint(i, 2) == tr[20]);
    CHECK(b.summaries[i].final_sum == tr[20]);
    double mx = 0, mn = 0;
    for (double s : tr) {
      mx = std::max(mx, s);
      mn = std::min(mn, s);
    }
    CHECK(b.summaries[i].max_sum >= mx - 1e-12);
    CHECK(b.summaries[i].min_sum <= mn + 1e-12);
  }
}

TEST_CASE("feedback policy reads the payoff surface") {
  const auto phi = make_test_function("clip:1");
  const auto map = convexity_map(phi, GParams::variance(0.25, 1.0), 401, 100);
  CHECK(map.times.front() == 0.0);
  // the smoothed clipped ramp is convex below zero and concave above
  CHECK(map.convex_at(0.5, -0.5));
  CHECK_FALSE(map.convex_at(0.5, 0.5));
  const auto p = feedback_policy(phi, GParams::variance(0.25, 1.0), 401);
  CHECK(p.kind() == "feedback");
  CHECK(p.name == "feedback_clip:1");
}
