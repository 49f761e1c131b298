#pragma once

// Desk-scale limit experiments: CLT against the G-normal value, WLLN against the
// maximal value, LIL traces with cluster estimates, and the Choquet moment check.

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "sublin/adversarial.hpp"
#include "sublin/gnormal.hpp"
#include "sublin/test_function.hpp"

namespace sublin::limits {

/// log log x with log x = ln(x v e), so the result is 1 for x <= e^e.
double loglog(double x);
/// a_n = sqrt(2 n loglog n).
double lil_normalizer(double n);

/// ceil(ratio^k) for k = 0, 1, ..., deduplicated, always ending at n_max.
std::vector<std::size_t> geometric_checkpoints(std::size_t n_max, double ratio = 1.05);
/// k^k for k >= 1 while <= n_max.
std::vector<std::size_t> power_checkpoints(std::size_t n_max);

struct Decomposition {
  double direct = 0.0;      ///< S_{n_k} / a_{n_k}
  double increment = 0.0;   ///< (S_{n_k} - S_{n_{k-1}}) / sqrt(2 (n_k - n_{k-1}) loglog n_k)
  double recombined = 0.0;  ///< increment * sqrt(1 - n_{k-1}/n_k) + (S_{n_{k-1}}/a_{n_{k-1}}) a_{n_{k-1}}/a_{n_k}
};

/// Splits S_{n_k}/a_{n_k} into the fresh-block term and the carried term.
Decomposition checkpoint_decomposition(double s_k, double s_prev, std::size_t n_k, std::size_t n_prev);

struct ConvergenceRow {
  std::size_t n = 0;
  double estimate = 0.0;
  double standard_error = 0.0;
  std::string policy;
  double reference = 0.0;
  double error = 0.0;
};

struct ConvergenceTable {
  std::string phi_tag;
  double reference = 0.0;
  std::vector<ConvergenceRow> rows;
  bool monotone = true;  ///< e_{k+1} <= e_k + 2 sqrt(se_k^2 + se_{k+1}^2) for every k
  double final_error = 0.0;
};

struct LimitConfig {
  sim::StepFamily family;
  std::vector<std::size_t> n_list = {100, 1000, 10000};
  std::vector<sim::AdversaryPolicy> policies;  ///< empty: standard family (plus one feedback policy per phi for the CLT)
  std::size_t n_paths = 20000;
  std::uint64_t seed = 1;
  unsigned workers = 1;
  std::size_t pde_resolution = gnormal::kDefaultResolution;
};

/// Sup-over-policy estimate of E[phi(S_n / sqrt(n))] for each n against the
/// G-normal value. Rejects phi whose growth the family's moments cannot carry.
ConvergenceTable clt_experiment(const TestFunction& phi, const LimitConfig& config);
/// Several test functions on the same simulated batches.
std::vector<ConvergenceTable> clt_experiment(const std::vector<TestFunction>& phis, const LimitConfig& config);

/// Sup-over-policy estimate of E[phi(S_n / n)] against sup over the mean interval.
ConvergenceTable wlln_experiment(const TestFunction& phi, const LimitConfig& config);
std::vector<ConvergenceTable> wlln_experiment(const std::vector<TestFunction>& phis, const LimitConfig& config);

struct ClusterEstimate {
  double bin_width = 0.05;
  double bin_origin = 0.0;               ///< left edge of bin 0
  std::vector<std::size_t> visits;       ///< tail-window visit counts per bin, over all paths
  double liminf = 0.0;                   ///< median over paths of the tail-window minimum
  double limsup = 0.0;                   ///< median over paths of the tail-window maximum
  double outer = 1.0;                    ///< sigma_upper
  double inner = 1.0;                    ///< sigma_lower
  bool within_outer = true;              ///< [liminf, limsup] inside [-outer - band, outer + band]
  bool covers_inner = true;              ///< every bin inside [-inner + band, inner - band] visited
};

struct LilConfig {
  sim::StepFamily family;
  sim::AdversaryPolicy policy = sim::constant_policy("const_high", {1.0, 0.0});
  std::size_t n_max = 1000000;
  std::size_t n_paths = 200;
  std::uint64_t seed = 1;
  double ratio = 1.05;
  std::vector<std::size_t> checkpoints;  ///< explicit schedule; empty: geometric with `ratio`
  std::size_t running_from = 16;  ///< running max/min only over checkpoints n >= this
  double band = 0.15;
  double bin_width = 0.05;
  double band_low = 0.8;
  double band_high = 1.1;
  double hard_cap = 1.15;
  unsigned workers = 1;
};

struct LilTrace {
  std::vector<std::size_t> checkpoints;
  std::vector<double> a_n;
  std::vector<double> ratios;        ///< n_paths x checkpoints, S_n / a_n
  std::vector<double> running_max;   ///< per path
  std::vector<double> running_min;   ///< per path
  std::size_t n_paths = 0;

  double ratio(std::size_t path, std::size_t k) const { return ratios[path * checkpoints.size() + k]; }
};

struct LilResult {
  LilTrace trace;
  ClusterEstimate cluster;
  double fraction_in_band = 0.0;   ///< paths with running max in [band_low, band_high] (in units of sigma_upper)
  double overall_max = 0.0;        ///< max over paths of the running max, in units of sigma_upper
  bool band_ok = false;            ///< fraction_in_band >= 0.9 and overall_max <= hard_cap
};

/// Requires zero means on both sides; throws DomainError otherwise.
LilResult lil_experiment(const LilConfig& config);

struct MomentCheckRow {
  double delta = 1.0;
  std::vector<double> series_increments;    ///< sum_{10^j <= n < 10^{j+1}} V(|X| >= delta a_n)
  std::vector<double> integral_increments;  ///< int over t in [10^j, 10^{j+1}) of V(X^2/loglog|X| >= t)
  std::vector<double> power_increments;     ///< same decades of sum E[(|X| ^ delta a_n)^p] / a_n^p
  bool series_convergent = true;
  bool integral_convergent = true;
  bool power_convergent = true;
};

struct MomentCheckReport {
  std::string family;
  std::string tail_note;
  double p = 3.0;
  std::vector<MomentCheckRow> rows;
  bool satisfied = true;   ///< the Choquet moment of X^2/loglog|X| is classified finite
  bool consistent = true;  ///< series and integral agree for every delta
};

struct MomentCheckOptions {
  std::vector<double> deltas = {0.5, 1.0, 2.0};
  int series_decades = 6;     ///< partial sums up to n = 10^series_decades
  int integral_decades = 12;  ///< integral up to t = 10^integral_decades
  double p = 3.0;
  double divergence_ratio = 0.8;  ///< last/previous decade increment at or above this: divergent
};

/// Classifies the family's worst-case member (largest variance) by comparing
/// decade increments of both sides of the series/integral equivalence.
MomentCheckReport choquet_moment_check(const sim::StepFamily& family, const MomentCheckOptions& options = {});

}  // namespace sublin::limits
