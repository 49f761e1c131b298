#include <algorithm>
#include <cmath>
#include <sstream>

#include "sublin/adversarial.hpp"
#include "sublin/errors.hpp"

namespace sublin::sim {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::string label(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

}  // namespace

StepChoice AdversaryPolicy::choose(const History& history, PathRng& policy_rng) const {
  return std::visit(
      overloaded{
          [](const ConstantRule& r) { return r.choice; },
          [&](const ThresholdRule& r) {
            const double stat = r.on_abs ? std::abs(history.running_sum) : history.running_sum;
            const bool above = stat >= r.level * std::sqrt(static_cast<double>(history.n_steps));
            return above == r.high_when_above ? r.high : r.low;
          },
          [&](const RandomizedRule& r) {
            return policy_rng.uniform() < r.prob_high ? r.high : r.low;
          },
          [&](const ScriptedRule& r) {
            if (history.step >= r.script.size()) {
              throw InvariantError("scripted policy '" + name + "' is shorter than the path");
            }
            return r.script[history.step];
          },
          [&](const FeedbackRule& r) {
            const double n = static_cast<double>(history.n_steps);
            const double tau = (n - static_cast<double>(history.step)) / n;
            return r.map->convex_at(tau, history.running_sum / std::sqrt(n)) ? r.high : r.low;
          },
      },
      rule);
}

std::string AdversaryPolicy::kind() const {
  return std::visit(overloaded{
                        [](const ConstantRule&) { return std::string("constant"); },
                        [](const ThresholdRule&) { return std::string("threshold"); },
                        [](const RandomizedRule&) { return std::string("randomized"); },
                        [](const ScriptedRule&) { return std::string("scripted"); },
                        [](const FeedbackRule&) { return std::string("feedback"); },
                    },
                    rule);
}

AdversaryPolicy constant_policy(const std::string& name, StepChoice choice) {
  return AdversaryPolicy{name, ConstantRule{choice}, 1};
}

bool ConvexityMap::convex_at(double tau, double x) const {
  auto it = std::upper_bound(times.begin(), times.end(), tau);
  const std::size_t row = it == times.begin() ? 0 : static_cast<std::size_t>(it - times.begin()) - 1;
  const double pos = std::round((x - x_min) / dx);
  const auto col = static_cast<std::size_t>(std::clamp(pos, 0.0, static_cast<double>(nx - 1)));
  return convex[row * nx + col] != 0;
}

ConvexityMap convexity_map(const TestFunction& phi, const GParams& bounds, std::size_t resolution,
                           std::size_t rows) {
  bounds.validate();
  if (resolution < 5 || rows < 1) throw ConfigError("convexity map needs resolution >= 5 and rows >= 1");
  const auto g = GParams::variance(bounds.sigma_lower_sq, bounds.sigma_upper_sq);
  const double half = gnormal::truncation_half_width(phi, g, 1.0);
  const auto grid = gnormal::stable_grid(g, -half, half, resolution | 1, 1.0);
  gnormal::SolveOptions opts;
  opts.store_every = std::max<std::size_t>(1, grid.nt / rows);
  const auto sol = gnormal::solve_g_heat(phi, g, grid, opts);

  ConvexityMap m;
  m.x_min = grid.x_min;
  m.dx = grid.dx();
  m.nx = grid.nx;
  m.convex.assign(sol.time_indices.size() * m.nx, 1);
  for (std::size_t r = 0; r < sol.time_indices.size(); ++r) {
    m.times.push_back(sol.time(r));
    const auto u = sol.row(r);
    for (std::size_t i = 1; i + 1 < m.nx; ++i) {
      m.convex[r * m.nx + i] = u[i + 1] - 2.0 * u[i] + u[i - 1] >= 0.0 ? 1 : 0;
    }
  }
  return m;
}

AdversaryPolicy feedback_policy(const TestFunction& phi, const GParams& bounds, std::size_t resolution) {
  auto map = std::make_shared<const ConvexityMap>(convexity_map(phi, bounds, resolution));
  const double mean = std::clamp(0.0, bounds.mu_lower, bounds.mu_upper);
  return {"feedback_" + phi.tag,
          FeedbackRule{std::move(map), {bounds.sigma_upper_sq, mean}, {bounds.sigma_lower_sq, mean}}, 1};
}

std::vector<AdversaryPolicy> standard_policy_family(const GParams& bounds,
                                                    const PolicyFamilyOptions& options) {
  bounds.validate();
  StepChoice high;
  StepChoice low;
  if (options.vary_mean) {
    high = {bounds.sigma_upper_sq, bounds.mu_upper};
    low = {bounds.sigma_upper_sq, bounds.mu_lower};
  } else {
    const double mean = std::clamp(0.0, bounds.mu_lower, bounds.mu_upper);
    high = {bounds.sigma_upper_sq, mean};
    low = {bounds.sigma_lower_sq, mean};
  }

  std::vector<AdversaryPolicy> family;
  const bool degenerate = high.variance == low.variance && high.mean == low.mean;
  if (options.constants || degenerate) {
    family.push_back(constant_policy("const_high", high));
    if (!degenerate) family.push_back(constant_policy("const_low", low));
  }
  if (degenerate) return family;

  for (double level : options.threshold_levels) {
    family.push_back({"above_" + label(level), ThresholdRule{level, false, true, high, low}, 1});
    family.push_back({"below_" + label(level), ThresholdRule{level, false, false, high, low}, 1});
  }
  for (double level : options.abs_threshold_levels) {
    family.push_back({"abs_above_" + label(level), ThresholdRule{level, true, true, high, low}, 1});
    family.push_back({"abs_below_" + label(level), ThresholdRule{level, true, false, high, low}, 1});
  }
  for (double q : options.mixture_probs) {
    if (!(q >= 0.0 && q <= 1.0)) throw ConfigError("mixture probability must lie in [0, 1]");
    family.push_back({"mix_" + label(q), RandomizedRule{q, high, low}, 1});
  }
  return family;
}

}  // namespace sublin::sim
