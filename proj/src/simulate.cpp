#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

#include "sublin/adversarial.hpp"
#include "sublin/errors.hpp"

namespace sublin::sim {

namespace {

constexpr double kBoundTol = 1e-12;

void check_choice(const StepChoice& c, const GParams& b, const std::string& policy) {
  const bool ok = c.variance >= b.sigma_lower_sq - kBoundTol && c.variance <= b.sigma_upper_sq + kBoundTol &&
                  c.mean >= b.mu_lower - kBoundTol && c.mean <= b.mu_upper + kBoundTol;
  if (!ok) {
    throw InvariantError("policy '" + policy + "' chose (variance " + std::to_string(c.variance) +
                         ", mean " + std::to_string(c.mean) + ") outside the family bounds");
  }
}

std::vector<StepChoice> endpoint_choices(const GParams& b) {
  return {{b.sigma_lower_sq, b.mu_lower},
          {b.sigma_lower_sq, b.mu_upper},
          {b.sigma_upper_sq, b.mu_lower},
          {b.sigma_upper_sq, b.mu_upper}};
}

}  // namespace

void parallel_for(std::size_t n, unsigned workers,
                  const std::function<void(std::size_t, std::size_t)>& body) {
  const std::size_t w = std::max<std::size_t>(1, std::min<std::size_t>(workers, n));
  if (w == 1) {
    body(0, n);
    return;
  }
  std::vector<std::thread> threads;
  std::exception_ptr error;
  std::mutex error_mutex;
  const std::size_t chunk = (n + w - 1) / w;
  for (std::size_t t = 0; t < w; ++t) {
    const std::size_t begin = t * chunk;
    const std::size_t end = std::min(n, begin + chunk);
    if (begin >= end) break;
    threads.emplace_back([&, begin, end] {
      try {
        body(begin, end);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    });
  }
  for (auto& th : threads) th.join();
  if (error) std::rethrow_exception(error);
}

PathBatch simulate_paths(const StepFamily& family, const AdversaryPolicy& policy,
                         std::size_t n_steps, std::size_t n_paths, std::uint64_t seed,
                         const SimOptions& options) {
  family.validate();
  if (!family.simulable()) {
    throw ConfigError("step base " + to_string(family.base) + " has infinite variance; cannot simulate");
  }
  if (n_steps < 1 || n_paths < 1) throw ConfigError("simulation needs n_steps >= 1 and n_paths >= 1");
  if (const auto* s = std::get_if<ScriptedRule>(&policy.rule); s && s->script.size() < n_steps) {
    throw ConfigError("scripted policy '" + policy.name + "' has " + std::to_string(s->script.size()) +
                      " choices for " + std::to_string(n_steps) + " steps");
  }
  const auto& cps = options.checkpoints;
  for (std::size_t i = 0; i < cps.size(); ++i) {
    if (cps[i] > n_steps || (i > 0 && cps[i] <= cps[i - 1])) {
      throw ConfigError("checkpoints must be strictly increasing and <= n_steps");
    }
  }

  PathBatch batch;
  batch.n_steps = n_steps;
  batch.n_paths = n_paths;
  batch.seed = seed;
  batch.policy_name = policy.name;
  batch.checkpoints = cps;
  batch.checkpoint_sums.assign(n_paths * cps.size(), 0.0);
  batch.summaries.resize(n_paths);
  if (options.record_paths) batch.trajectories.assign(n_paths * (n_steps + 1), 0.0);

  double second = 0.0;
  double pth = 0.0;
  for (const auto& c : endpoint_choices(family.bounds)) {
    second = std::max(second, c.variance + c.mean * c.mean);
    if (options.moment_p > 0.0) pth = std::max(pth, family.abs_moment(options.moment_p, c.mean, c.variance));
  }
  batch.b_n = static_cast<double>(n_steps) * second;
  batch.m_np = static_cast<double>(n_steps) * pth;

  const bool coupled = family.coupling != Coupling::independent;
  const double pair_sign = family.coupling == Coupling::antithetic ? -1.0 : 1.0;

  parallel_for(n_paths, options.workers, [&](std::size_t begin, std::size_t end) {
    for (std::size_t path = begin; path < end; ++path) {
      PathRng noise(seed, path, 0);
      PathRng policy_rng(seed, path, policy.rng_stream_id);
      double* traj = options.record_paths ? &batch.trajectories[path * (n_steps + 1)] : nullptr;
      double* cp_out = cps.empty() ? nullptr : &batch.checkpoint_sums[path * cps.size()];
      std::size_t cp = 0;
      while (cp < cps.size() && cps[cp] == 0) cp_out[cp++] = 0.0;

      PathSummary s;
      s.max_step = -std::numeric_limits<double>::infinity();
      double sum = 0.0;
      double last = 0.0;
      double prev_eps = 0.0;
      for (std::size_t k = 0; k < n_steps; ++k) {
        const StepChoice c = policy.choose(History{k, n_steps, sum, last}, policy_rng);
        check_choice(c, family.bounds, policy.name);
        double eps;
        if (coupled && (k % 2 == 1)) {
          eps = pair_sign * prev_eps;
        } else {
          eps = family.draw_standard(noise);
        }
        prev_eps = eps;
        double x = c.mean + std::sqrt(c.variance) * eps;
        if (family.cap) x = std::min(x, *family.cap);
        sum += x;
        last = x;
        s.policy_b += c.variance + c.mean * c.mean;
        s.max_step = std::max(s.max_step, x);
        s.max_sum = std::max(s.max_sum, sum);
        s.min_sum = std::min(s.min_sum, sum);
        s.max_abs_sum = std::max(s.max_abs_sum, std::abs(sum));
        if (traj) traj[k + 1] = sum;
        while (cp < cps.size() && cps[cp] == k + 1) cp_out[cp++] = sum;
      }
      s.final_sum = sum;
      batch.summaries[path] = s;
    }
  });
  return batch;
}

std::vector<PathBatch> simulate_family(const StepFamily& family,
                                       std::span<const AdversaryPolicy> policies,
                                       std::size_t n_steps, std::size_t n_paths,
                                       std::uint64_t seed, const SimOptions& options) {
  if (policies.empty()) throw ConfigError("policy family must not be empty");
  std::vector<PathBatch> out;
  out.reserve(policies.size());
  for (const auto& p : policies) out.push_back(simulate_paths(family, p, n_steps, n_paths, seed, options));
  return out;
}

double wilson_standard_error(double frequency, std::size_t n) {
  const double nn = static_cast<double>(n);
  return std::sqrt(frequency * (1.0 - frequency) / nn + 1.0 / (4.0 * nn * nn)) / (1.0 + 1.0 / nn);
}

namespace {

std::vector<double> frequencies(const PathEvent& event, std::span<const PathBatch> batches) {
  if (batches.empty()) throw ConfigError("policy family must not be empty");
  std::vector<double> out;
  for (const auto& b : batches) {
    std::size_t hits = 0;
    for (std::size_t i = 0; i < b.n_paths; ++i) hits += event(PathView{&b, i}) ? 1 : 0;
    out.push_back(static_cast<double>(hits) / static_cast<double>(b.n_paths));
  }
  return out;
}

CapacityEstimate pick(std::vector<double> freqs, std::size_t n, bool upper) {
  CapacityEstimate est;
  est.policy_index = 0;
  for (std::size_t i = 1; i < freqs.size(); ++i) {
    if (upper ? freqs[i] > freqs[est.policy_index] : freqs[i] < freqs[est.policy_index]) est.policy_index = i;
  }
  est.value = freqs[est.policy_index];
  est.standard_error = wilson_standard_error(est.value, n);
  est.per_policy = std::move(freqs);
  return est;
}

}  // namespace

CapacityEstimate estimate_upper_capacity(const PathEvent& event, std::span<const PathBatch> batches) {
  return pick(frequencies(event, batches), batches.front().n_paths, true);
}

CapacityEstimate estimate_lower_capacity(const PathEvent& event, std::span<const PathBatch> batches) {
  return pick(frequencies(event, batches), batches.front().n_paths, false);
}

CapacityEstimate estimate_upper_capacity(const PathEvent& event, const StepFamily& family,
                                         std::span<const AdversaryPolicy> policies,
                                         std::size_t n_steps, std::size_t n_paths,
                                         std::uint64_t seed, const SimOptions& options) {
  const auto batches = simulate_family(family, policies, n_steps, n_paths, seed, options);
  return estimate_upper_capacity(event, batches);
}

CapacityEstimate estimate_lower_capacity(const PathEvent& event, const StepFamily& family,
                                         std::span<const AdversaryPolicy> policies,
                                         std::size_t n_steps, std::size_t n_paths,
                                         std::uint64_t seed, const SimOptions& options) {
  const auto batches = simulate_family(family, policies, n_steps, n_paths, seed, options);
  return estimate_lower_capacity(event, batches);
}

ExpectationEstimate estimate_expectation(const PathFunctional& functional,
                                         std::span<const PathBatch> batches) {
  if (batches.empty()) throw ConfigError("policy family must not be empty");
  ExpectationEstimate est;
  std::vector<double> ses;
  for (const auto& b : batches) {
    double mean = 0.0;
    double m2 = 0.0;
    for (std::size_t i = 0; i < b.n_paths; ++i) {
      const double v = functional(PathView{&b, i});
      const double delta = v - mean;
      mean += delta / static_cast<double>(i + 1);
      m2 += delta * (v - mean);
    }
    const double n = static_cast<double>(b.n_paths);
    est.per_policy.push_back(mean);
    ses.push_back(b.n_paths > 1 ? std::sqrt(m2 / (n - 1.0) / n) : 0.0);
  }
  for (std::size_t i = 1; i < est.per_policy.size(); ++i) {
    if (est.per_policy[i] > est.per_policy[est.upper_policy]) est.upper_policy = i;
    if (est.per_policy[i] < est.per_policy[est.lower_policy]) est.lower_policy = i;
  }
  est.upper = est.per_policy[est.upper_policy];
  est.upper_se = ses[est.upper_policy];
  est.lower = est.per_policy[est.lower_policy];
  est.lower_se = ses[est.lower_policy];
  return est;
}

}  // namespace sublin::sim
