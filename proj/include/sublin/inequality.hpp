#pragma once

// Closed-form concentration and moment bounds for sums under a sub-linear
// expectation, plus the harness that checks them against simulated capacities.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sublin/adversarial.hpp"

namespace sublin::ineq {

/// Exponential term of the Kolmogorov-type upper bound:
/// exp{-x^2 / (2(xy + B)) * (1 + (2/3) ln(1 + xy/B))}. Requires x, y, B > 0.
double kolmogorov_upper_bound(double x, double y, double b_n);

/// Fuk-Nagaev type bound C_p delta^{-2p} M_{n,p} / x^p + exp{-x^2 / (2 B (1 + delta))}.
double fuk_nagaev_bound(double x, double delta, double p, double b_n, double m_np, double c_p);

/// C B / x^2.
double chebyshev_bound(double x, double b_n, double c);

/// Constant of the Chebyshev form obtained from the Fuk-Nagaev bound at p = 2,
/// delta = 1 after folding the Gaussian term with u e^{-u} <= e^{-1}: C_2 + 4/e.
double chebyshev_constant(double c2);

/// p^p sum_k C_V[(X_k^+)^p] + C_p B^{p/2}.
double rosenthal_choquet_bound(double p, double b_n, std::span<const double> per_step_choquet,
                               double c_p);

enum class RosenthalVariant {
  independent_increment,  ///< bound on E[|max_k (S_n - S_k)|^p] and E[(S_n^+)^p]
  nd_max,                 ///< bound on E[max_k |S_k|^p], with the mean-correction term
};

/// C_p {M + B^{p/2}} (independent) or C_p {M + B^{p/2} + (sum_k [(lower mean)^- +
/// (upper mean)^+])^p} (ND). `mean_terms` is required for nd_max and holds
/// (lower mean, upper mean) per step.
double rosenthal_moment_bound(double p, double b_n, double m_np,
                              std::optional<std::span<const std::pair<double, double>>> mean_terms,
                              double c_p, RosenthalVariant variant);

/// exp{-((|b|/sigma)^2 + delta) y^2 / 2}. Requires |b| < sigma and (b/sigma)^2 + delta < 1.
double lower_bound_exponent(double b, double sigma, double delta, double y_n);

/// Smooth ramp g_eps: 0 on x <= 1 - eps, 1 on x >= 1, quintic smoothstep between.
double smooth_indicator(double x, double epsilon);

/// y = rho delta x with rho = 1 ^ [2 (1 + 1/delta) delta log(1/beta)]^{-1}; beta in (0,1).
double proof_truncation_level(double x, double delta, double beta);

struct MomentSummary {
  std::size_t n = 0;
  double b_n = 0.0;   ///< sum of upper second moments
  double m_np = 0.0;  ///< sum of upper p-th absolute moments
  double p = 2.0;
  std::vector<double> upper_means;
  std::vector<double> lower_means;
};

MomentSummary moment_summary(const sim::StepFamily& family, std::size_t n, double p);

struct BoundReport {
  std::string bound_name;
  std::string inputs;  ///< compact description of the cell (x, y, policy...)
  double analytic_value = 0.0;
  double empirical_estimate = 0.0;
  double standard_error = 0.0;
  bool dominated = true;
  std::string warning;
};

/// Dominance rule shared by every report: empirical <= analytic + slack * SE.
bool dominated_by(double empirical, double analytic, double se, double slack = 3.0);

struct VerifyConfig {
  std::string family_tag = "two_point";  ///< base distribution, see sim::parse_base
  sim::StepFamily family;
  std::size_t n = 1000;
  std::size_t n_paths = 100000;
  std::uint64_t seed = 1;
  std::vector<sim::AdversaryPolicy> policies;
  std::vector<double> x_grid;  ///< in units of sqrt(B_n)
  std::vector<double> y_grid;  ///< absolute truncation levels
  std::vector<double> deltas = {1.0};
  std::vector<double> p_list = {2.0};
  double constant = 1.0;        ///< C_p / C for the bound at hand
  double epsilon = 0.5;         ///< small-ball radius for the lower bound
  std::vector<std::size_t> n_list;  ///< lower bound: sample sizes
  double se_slack = 3.0;
  std::size_t min_paths_warning = 1000;
  unsigned workers = 1;
};

struct BoundVerification {
  std::string bound_name;
  std::vector<BoundReport> cells;
  bool all_dominated() const;
};

/// Bound names: kolmogorov, fuk-nagaev, chebyshev, lower-bound, rosenthal-choquet,
/// rosenthal-moment. Throws ConfigError for anything else.
BoundVerification verify_bound(const std::string& bound_name, const VerifyConfig& config);

/// Smallest value of `grid` (ascending) for which verify_bound reports full
/// dominance, or nullopt.
std::optional<double> calibrate_constant(const std::string& bound_name, VerifyConfig config,
                                         const std::vector<double>& grid);

}  // namespace sublin::ineq
