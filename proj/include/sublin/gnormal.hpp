#pragma once

// G-normal expectations: an explicit monotone finite-difference solver for
// du/dt = G(u_xx), and a recombining control lattice that maximizes over
// adapted volatility paths.

#include <cstddef>
#include <span>
#include <vector>

#include "sublin/test_function.hpp"

namespace sublin::gnormal {

/// Variance interval [sigma_lower_sq, sigma_upper_sq] and mean interval [mu_lower, mu_upper].
struct GParams {
  double sigma_lower_sq = 1.0;
  double sigma_upper_sq = 1.0;
  double mu_lower = 0.0;
  double mu_upper = 0.0;

  static GParams variance(double lower_sq, double upper_sq) { return {lower_sq, upper_sq, 0.0, 0.0}; }

  /// Throws ConfigError unless 0 <= lower <= upper < inf and mu_lower <= mu_upper.
  void validate() const;
  double sigma_lower() const;
  double sigma_upper() const;
};

/// G(a) = (sigma_upper^2 a^+ - sigma_lower^2 a^-) / 2.
double g_function(double alpha, const GParams& params);

/// Mean generator mu_upper a^+ - mu_lower a^-.
double g_bar_function(double alpha, const GParams& params);

/// Stability margin of the explicit scheme: dt <= dx^2 / (sigma_upper^2 (1 + margin)).
inline constexpr double kStabilityMargin = 0.10;

struct PdeGrid {
  double x_min = -1.0;
  double x_max = 1.0;
  std::size_t nx = 3;
  double t_horizon = 1.0;
  std::size_t nt = 1;

  double dx() const { return (x_max - x_min) / static_cast<double>(nx - 1); }
  double dt() const { return t_horizon / static_cast<double>(nt); }
  double x(std::size_t i) const { return x_min + static_cast<double>(i) * dx(); }

  /// Throws ConfigError on malformed extents or a violated stability bound.
  void validate(const GParams& params) const;
};

/// Smallest step count that satisfies the stability bound on [x_min, x_max].
PdeGrid stable_grid(const GParams& params, double x_min, double x_max, std::size_t nx,
                    double t_horizon);

/// Half-width max(8 sigma_upper sqrt(T), support + 6 sigma_upper) used by gnormal_expect.
double truncation_half_width(const TestFunction& phi, const GParams& params, double t_horizon);

struct SolveOptions {
  /// Keep every k-th time row (the first and last rows are always kept). Zero
  /// picks a stride that bounds the stored surface to about four million values.
  std::size_t store_every = 0;
};

struct PdeSolution {
  PdeGrid grid;
  GParams params;
  std::vector<std::size_t> time_indices;  ///< stored rows, ascending, first is 0
  std::vector<double> values;             ///< time_indices.size() x nx, row-major

  std::span<const double> row(std::size_t stored) const {
    return {values.data() + stored * grid.nx, grid.nx};
  }
  std::span<const double> final_row() const { return row(time_indices.size() - 1); }
  double time(std::size_t stored) const {
    return static_cast<double>(time_indices[stored]) * grid.dt();
  }
  /// Linear interpolation in x on a stored row.
  double value_at(std::size_t stored, double x) const;
  /// Final-time value at x = 0.
  double value_at_origin() const { return value_at(time_indices.size() - 1, 0.0); }
};

/// Explicit march of du/dt = G(u_xx), u(0, .) = phi. At every node the second
/// difference selects sigma_upper^2 when >= 0 and sigma_lower^2 otherwise; the
/// boundary nodes keep a zero second difference.
PdeSolution solve_g_heat(const TestFunction& phi, const GParams& params, const PdeGrid& grid,
                         const SolveOptions& options = {});

inline constexpr std::size_t kDefaultResolution = 2001;

/// E~[phi(xi)] for xi ~ N(0, [sigma_lower^2, sigma_upper^2]): u(1, 0) on an odd grid
/// of `resolution` nodes. Rejects phi whose growth order exceeds `max_growth`.
double gnormal_expect(const TestFunction& phi, const GParams& params,
                      std::size_t resolution = kDefaultResolution, int max_growth = 2);

/// Backward induction on a recombining trinomial lattice with node spacing
/// sigma_upper sqrt(h): each node takes the best one-step expectation over
/// `n_vol_choices` variances spread evenly over the interval (endpoints included).
double control_tree_value(const TestFunction& phi, const GParams& params, std::size_t depth,
                          std::size_t n_vol_choices = 2);

/// sup of phi over [mu_lower, mu_upper]: dense grid plus golden-section refinement.
double maximal_expect(const TestFunction& phi, const GParams& params);

}  // namespace sublin::gnormal
