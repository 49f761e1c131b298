#pragma once

// Monte Carlo paths of partial sums whose per-step law is picked by an adapted
// adversary inside the variance/mean bounds.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "sublin/gnormal.hpp"
#include "sublin/rng.hpp"
#include "sublin/scenario.hpp"

namespace sublin::sim {

using gnormal::GParams;

enum class BaseKind { two_point, gaussian, truncated_gaussian, student_t, pareto };
enum class Coupling { independent, antithetic, comonotone };

BaseKind parse_base(const std::string& tag);
std::string to_string(BaseKind kind);
Coupling parse_coupling(const std::string& tag);
std::string to_string(Coupling mode);

/// Step mechanism: X_k = mean_k + sqrt(variance_k) * eps_k, with eps_k a standardized
/// draw of the base law, optionally coupled to eps_{k-1} within consecutive pairs and
/// optionally truncated from above at `cap` (Y_k = X_k ^ y).
struct StepFamily {
  BaseKind base = BaseKind::two_point;
  GParams bounds;
  double trunc_level = 3.0;  ///< truncated_gaussian: |z| <= trunc_level before rescaling
  double dof = 5.0;          ///< student_t degrees of freedom (> 2 to simulate)
  double tail_index = 3.0;   ///< pareto: P(|X| > x) = x^-alpha on x >= 1
  std::optional<double> cap;
  Coupling coupling = Coupling::independent;

  void validate() const;
  /// True when the base has a finite variance and can be simulated.
  bool simulable() const;

  /// Standardized draw (mean 0, variance 1).
  double draw_standard(PathRng& rng) const;

  /// E|X|^p for the member with the given mean and variance (untruncated).
  double abs_moment(double p, double mean, double variance) const;
  /// P(|X| > x) for the zero-mean member with the given variance.
  double abs_tail(double x, double variance) const;
  /// P(X > x) for the zero-mean member with the given variance.
  double upper_tail(double x, double variance) const;
  /// C_V[(X^+)^p] = int_0^inf p s^{p-1} max_sigma P_sigma(X > s) ds over the endpoint members.
  double choquet_positive_moment(double p) const;
  /// Up to five atoms matching mean 0 and unit variance, for exact enumeration.
  std::vector<std::pair<double, double>> standard_skeleton() const;
  /// Whether the Choquet moment of X^2/loglog|X| is finite for this tail profile.
  std::string tail_note() const;
};

/// Returns the family with the requested coupling between consecutive steps.
StepFamily nd_coupler(const StepFamily& family, Coupling mode);

/// Joint law of (X_1, X_2) under every endpoint choice of (variance, mean), built
/// from the discrete skeleton. Independent coupling uses the nested product.
scenario::ScenarioSet two_step_joint(const StepFamily& family);

struct StepChoice {
  double variance = 1.0;
  double mean = 0.0;
};

/// What a policy may observe before choosing step `step` (0-based): nothing about
/// the noise of the current or later steps.
struct History {
  std::size_t step = 0;
  std::size_t n_steps = 0;
  double running_sum = 0.0;
  double last_step = 0.0;
};

struct ConstantRule {
  StepChoice choice;
};
/// Picks `high` when the (optionally absolute) running sum is at or above
/// level * sqrt(n_steps) (or below it, when high_when_above is false).
struct ThresholdRule {
  double level = 0.0;
  bool on_abs = false;
  bool high_when_above = true;
  StepChoice high;
  StepChoice low;
};
/// Picks `high` with probability prob_high from the policy's own stream.
struct RandomizedRule {
  double prob_high = 0.5;
  StepChoice high;
  StepChoice low;
};
/// Replays a fixed sequence; must be at least n_steps long.
struct ScriptedRule {
  std::vector<StepChoice> script;
};

/// Where the G-heat surface u(tau, x) of a payoff is convex, on a grid of
/// time-to-go tau in [0, 1] and x in units of sqrt(n_steps).
struct ConvexityMap {
  double x_min = 0.0;
  double dx = 1.0;
  std::size_t nx = 0;
  std::vector<double> times;          ///< ascending, first is 0
  std::vector<std::uint8_t> convex;   ///< times.size() x nx

  bool convex_at(double tau, double x) const;
};

ConvexityMap convexity_map(const TestFunction& phi, const GParams& bounds, std::size_t resolution = 801,
                           std::size_t rows = 400);

/// Picks `high` where the surface at the remaining time is convex in the
/// rescaled running sum S_k / sqrt(n_steps), `low` elsewhere.
struct FeedbackRule {
  std::shared_ptr<const ConvexityMap> map;
  StepChoice high;
  StepChoice low;
};

struct AdversaryPolicy {
  std::string name;
  std::variant<ConstantRule, ThresholdRule, RandomizedRule, ScriptedRule, FeedbackRule> rule;
  std::uint64_t rng_stream_id = 1;

  StepChoice choose(const History& history, PathRng& policy_rng) const;
  std::string kind() const;
};

AdversaryPolicy constant_policy(const std::string& name, StepChoice choice);
/// Feedback policy named "feedback_<tag>" switching variance on the convexity of
/// the payoff's G-heat surface: the discrete analogue of the optimal volatility.
AdversaryPolicy feedback_policy(const TestFunction& phi, const GParams& bounds,
                                std::size_t resolution = 801);

struct PolicyFamilyOptions {
  bool constants = true;
  std::vector<double> threshold_levels = {-0.5, 0.0, 0.5};
  std::vector<double> abs_threshold_levels = {0.5, 1.0};
  std::vector<double> mixture_probs = {0.5};
  bool vary_mean = false;  ///< choose means at the endpoints instead of variances
};

/// Constant endpoint policies, threshold policies on the running sum and randomized
/// mixtures, all restricted to endpoint choices.
std::vector<AdversaryPolicy> standard_policy_family(const GParams& bounds,
                                                    const PolicyFamilyOptions& options = {});

struct PathSummary {
  double final_sum = 0.0;
  double max_step = 0.0;
  double max_sum = 0.0;
  double min_sum = 0.0;
  double max_abs_sum = 0.0;
  double policy_b = 0.0;  ///< sum of the chosen E[X_k^2] along the path
};

struct SimOptions {
  std::vector<std::size_t> checkpoints;  ///< step counts at which S_k is recorded (ascending)
  bool record_paths = false;             ///< keep S_0..S_n for every path
  double moment_p = 3.0;                 ///< p of the M_{n,p} accumulator
  unsigned workers = 1;
};

struct PathBatch {
  std::size_t n_steps = 0;
  std::size_t n_paths = 0;
  std::uint64_t seed = 0;
  std::string policy_name;
  std::vector<std::size_t> checkpoints;
  std::vector<double> checkpoint_sums;  ///< n_paths x checkpoints.size()
  std::vector<PathSummary> summaries;
  std::vector<double> trajectories;  ///< n_paths x (n_steps + 1) when recorded
  double b_n = 0.0;                  ///< sum of upper second moments
  double m_np = 0.0;                 ///< sum of upper p-th absolute moments

  double checkpoint(std::size_t path, std::size_t index) const {
    return checkpoint_sums[path * checkpoints.size() + index];
  }
  std::span<const double> trajectory(std::size_t path) const {
    return {trajectories.data() + path * (n_steps + 1), n_steps + 1};
  }
};

/// Deterministic in (seed, policy, family); path i draws from substream (seed, i).
/// Throws InvariantError if the policy leaves the family's bounds.
PathBatch simulate_paths(const StepFamily& family, const AdversaryPolicy& policy,
                         std::size_t n_steps, std::size_t n_paths, std::uint64_t seed,
                         const SimOptions& options = {});

/// Read-only view of one simulated path, handed to path predicates.
struct PathView {
  const PathBatch* batch = nullptr;
  std::size_t index = 0;

  const PathSummary& summary() const { return batch->summaries[index]; }
  double checkpoint(std::size_t k) const { return batch->checkpoint(index, k); }
};

using PathEvent = std::function<bool(const PathView&)>;
using PathFunctional = std::function<double(const PathView&)>;

struct CapacityEstimate {
  double value = 0.0;
  double standard_error = 0.0;
  std::size_t policy_index = 0;  ///< lowest index attaining the max (or min)
  std::vector<double> per_policy;
};

/// Wilson score standard error at z = 1 for a frequency from n trials.
double wilson_standard_error(double frequency, std::size_t n);

/// Runs every policy on common random numbers and returns the per-policy batches.
std::vector<PathBatch> simulate_family(const StepFamily& family,
                                       std::span<const AdversaryPolicy> policies,
                                       std::size_t n_steps, std::size_t n_paths,
                                       std::uint64_t seed, const SimOptions& options = {});

/// Max over policies of the empirical frequency: a lower estimate of V(A).
CapacityEstimate estimate_upper_capacity(const PathEvent& event, std::span<const PathBatch> batches);
/// Min over policies of the empirical frequency: an upper estimate of v(A).
CapacityEstimate estimate_lower_capacity(const PathEvent& event, std::span<const PathBatch> batches);

CapacityEstimate estimate_upper_capacity(const PathEvent& event, const StepFamily& family,
                                         std::span<const AdversaryPolicy> policies,
                                         std::size_t n_steps, std::size_t n_paths,
                                         std::uint64_t seed, const SimOptions& options = {});
CapacityEstimate estimate_lower_capacity(const PathEvent& event, const StepFamily& family,
                                         std::span<const AdversaryPolicy> policies,
                                         std::size_t n_steps, std::size_t n_paths,
                                         std::uint64_t seed, const SimOptions& options = {});

struct ExpectationEstimate {
  double upper = 0.0;
  double upper_se = 0.0;
  std::size_t upper_policy = 0;
  double lower = 0.0;
  double lower_se = 0.0;
  std::size_t lower_policy = 0;
  std::vector<double> per_policy;
};

/// Sup/inf over policies of the sample mean of a path functional.
ExpectationEstimate estimate_expectation(const PathFunctional& functional,
                                         std::span<const PathBatch> batches);

/// Splits [0, n) into contiguous chunks and runs them on up to `workers` threads.
void parallel_for(std::size_t n, unsigned workers,
                  const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace sublin::sim
