#include "sublin/gnormal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "sublin/errors.hpp"

namespace sublin::gnormal {

void GParams::validate() const {
  if (!std::isfinite(sigma_lower_sq) || !std::isfinite(sigma_upper_sq) || sigma_lower_sq < 0.0 ||
      sigma_lower_sq > sigma_upper_sq) {
    throw ConfigError("variance interval must satisfy 0 <= sigma_lower^2 <= sigma_upper^2 < inf");
  }
  if (!std::isfinite(mu_lower) || !std::isfinite(mu_upper) || mu_lower > mu_upper) {
    throw ConfigError("mean interval must satisfy mu_lower <= mu_upper");
  }
}

double GParams::sigma_lower() const { return std::sqrt(sigma_lower_sq); }
double GParams::sigma_upper() const { return std::sqrt(sigma_upper_sq); }

double g_function(double alpha, const GParams& params) {
  const double pos = std::max(alpha, 0.0);
  const double neg = std::max(-alpha, 0.0);
  return 0.5 * (params.sigma_upper_sq * pos - params.sigma_lower_sq * neg);
}

double g_bar_function(double alpha, const GParams& params) {
  return params.mu_upper * std::max(alpha, 0.0) - params.mu_lower * std::max(-alpha, 0.0);
}

void PdeGrid::validate(const GParams& params) const {
  if (!(x_min < x_max) || !std::isfinite(x_min) || !std::isfinite(x_max)) {
    throw ConfigError("grid needs x_min < x_max");
  }
  if (nx < 3) throw ConfigError("grid needs nx >= 3");
  if (nt < 1) throw ConfigError("grid needs nt >= 1");
  if (!(t_horizon > 0.0) || !std::isfinite(t_horizon)) throw ConfigError("grid needs t_horizon > 0");
  if (params.sigma_upper_sq > 0.0) {
    const double limit = dx() * dx() / (params.sigma_upper_sq * (1.0 + kStabilityMargin));
    if (dt() > limit * (1.0 + 1e-12)) {
      throw ConfigError("stability bound violated: dt = " + std::to_string(dt()) +
                        " exceeds dx^2/(sigma_upper^2 (1+margin)) = " + std::to_string(limit));
    }
  }
}

PdeGrid stable_grid(const GParams& params, double x_min, double x_max, std::size_t nx,
                    double t_horizon) {
  PdeGrid grid{x_min, x_max, nx, t_horizon, 1};
  if (nx >= 3 && params.sigma_upper_sq > 0.0) {
    const double dx = grid.dx();
    const double steps = t_horizon * params.sigma_upper_sq * (1.0 + kStabilityMargin) / (dx * dx);
    grid.nt = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(steps)));
  }
  return grid;
}

double truncation_half_width(const TestFunction& phi, const GParams& params, double t_horizon) {
  const double s = params.sigma_upper();
  return std::max(8.0 * s * std::sqrt(t_horizon), phi.support_radius + 6.0 * s);
}

double PdeSolution::value_at(std::size_t stored, double x) const {
  if (x < grid.x_min || x > grid.x_max) throw ConfigError("query point outside the grid");
  const auto r = row(stored);
  const double pos = (x - grid.x_min) / grid.dx();
  const auto i = std::min(static_cast<std::size_t>(pos), grid.nx - 2);
  const double w = pos - static_cast<double>(i);
  return (1.0 - w) * r[i] + w * r[i + 1];
}

PdeSolution solve_g_heat(const TestFunction& phi, const GParams& params, const PdeGrid& grid,
                         const SolveOptions& options) {
  params.validate();
  grid.validate(params);

  const std::size_t nx = grid.nx;
  const std::size_t nt = grid.nt;
  std::size_t stride = options.store_every;
  if (stride == 0) {
    const double total = static_cast<double>(nt + 1) * static_cast<double>(nx);
    stride = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(total / 4.0e6)));
  }

  PdeSolution sol;
  sol.grid = grid;
  sol.params = params;

  std::vector<double> u(nx);
  for (std::size_t i = 0; i < nx; ++i) {
    u[i] = phi(grid.x(i));
    if (!std::isfinite(u[i])) throw NumericError("initial condition is not finite", 0);
  }
  sol.time_indices.push_back(0);
  sol.values.insert(sol.values.end(), u.begin(), u.end());

  const double ratio = grid.dt() / (grid.dx() * grid.dx());
  const double hi = 0.5 * params.sigma_upper_sq * ratio;
  const double lo = 0.5 * params.sigma_lower_sq * ratio;
  std::vector<double> next(u);

  for (std::size_t n = 1; n <= nt; ++n) {
    bool finite = true;
    // boundary nodes keep a zero second difference, so next[0], next[nx-1] stay put
    for (std::size_t i = 1; i + 1 < nx; ++i) {
      const double lap = u[i + 1] - 2.0 * u[i] + u[i - 1];
      next[i] = u[i] + (lap >= 0.0 ? hi : lo) * lap;
      finite = finite && std::isfinite(next[i]);
    }
    if (!finite) throw NumericError("G-heat march produced a non-finite value", static_cast<std::ptrdiff_t>(n));
    u.swap(next);
    if (n % stride == 0 || n == nt) {
      sol.time_indices.push_back(n);
      sol.values.insert(sol.values.end(), u.begin(), u.end());
    }
  }
  return sol;
}

double gnormal_expect(const TestFunction& phi, const GParams& params, std::size_t resolution,
                      int max_growth) {
  params.validate();
  if (!phi.growth_order || *phi.growth_order > max_growth) {
    throw ConfigError("test function '" + phi.tag + "' grows faster than |x|^" +
                      std::to_string(max_growth) + "; G-normal expectation needs that moment");
  }
  if (params.sigma_upper_sq == 0.0) return phi(0.0);
  if (resolution < 3) throw ConfigError("resolution must be at least 3");
  const std::size_t nx = resolution % 2 == 1 ? resolution : resolution + 1;
  const double half = truncation_half_width(phi, params, 1.0);
  const auto grid = stable_grid(params, -half, half, nx, 1.0);
  const auto sol = solve_g_heat(phi, params, grid, SolveOptions{grid.nt});
  return sol.final_row()[nx / 2];
}

double control_tree_value(const TestFunction& phi, const GParams& params, std::size_t depth,
                          std::size_t n_vol_choices) {
  params.validate();
  if (depth < 1) throw ConfigError("control tree depth must be >= 1");
  if (n_vol_choices < 2) throw ConfigError("control tree needs at least two volatility choices");
  if (params.sigma_upper_sq == 0.0) return phi(0.0);

  const double h = 1.0 / static_cast<double>(depth);
  const double dx = std::sqrt(params.sigma_upper_sq * h);
  // one-step branch probability to each neighbour for every admissible variance
  std::vector<double> branch(n_vol_choices);
  for (std::size_t k = 0; k < n_vol_choices; ++k) {
    const double s = params.sigma_lower_sq + (params.sigma_upper_sq - params.sigma_lower_sq) *
                                                 static_cast<double>(k) /
                                                 static_cast<double>(n_vol_choices - 1);
    branch[k] = 0.5 * s / params.sigma_upper_sq;
  }

  const std::ptrdiff_t d = static_cast<std::ptrdiff_t>(depth);
  std::vector<double> v(2 * depth + 1);
  for (std::ptrdiff_t j = -d; j <= d; ++j) {
    v[static_cast<std::size_t>(j + d)] = phi(static_cast<double>(j) * dx);
  }
  // after processing level k, v[0 .. 2k] holds nodes j = -k .. k
  for (std::size_t level = depth; level-- > 0;) {
    for (std::size_t i = 0; i <= 2 * level; ++i) {
      const double down = v[i];
      const double mid = v[i + 1];
      const double up = v[i + 2];
      double best = -std::numeric_limits<double>::infinity();
      for (double p : branch) best = std::max(best, p * (up + down) + (1.0 - 2.0 * p) * mid);
      v[i] = best;
    }
  }
  return v[0];
}

double maximal_expect(const TestFunction& phi, const GParams& params) {
  params.validate();
  const double a = params.mu_lower;
  const double b = params.mu_upper;
  if (a == b) return phi(a);

  constexpr std::size_t kGrid = 4097;
  const double step = (b - a) / static_cast<double>(kGrid - 1);
  std::size_t best_i = 0;
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < kGrid; ++i) {
    const double v = phi(a + static_cast<double>(i) * step);
    if (v > best) {
      best = v;
      best_i = i;
    }
  }
  // golden-section refinement on the bracketing cells
  double lo = a + static_cast<double>(best_i == 0 ? 0 : best_i - 1) * step;
  double hi = std::min(b, a + static_cast<double>(best_i + 1) * step);
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = hi - invphi * (hi - lo);
  double e = lo + invphi * (hi - lo);
  double fc = phi(c);
  double fe = phi(e);
  for (int it = 0; it < 80 && hi - lo > 1e-14 * (1.0 + std::abs(hi)); ++it) {
    if (fc > fe) {
      hi = e;
      e = c;
      fe = fc;
      c = hi - invphi * (hi - lo);
      fc = phi(c);
    } else {
      lo = c;
      c = e;
      fc = fe;
      e = lo + invphi * (hi - lo);
      fe = phi(e);
    }
  }
  return std::max({best, fc, fe});
}

}  // namespace sublin::gnormal
