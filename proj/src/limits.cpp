#include "sublin/limits.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>

#include "sublin/errors.hpp"

namespace sublin::limits {

namespace {

const double kE = std::exp(1.0);

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  double m = v[mid];
  if (v.size() % 2 == 0) {
    m = 0.5 * (m + *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid)));
  }
  return m;
}

template <class F>
double integrate(F f, double a, double b) {
  if (!(b > a)) return 0.0;
  using boost::math::quadrature::gauss_kronrod;
  return gauss_kronrod<double, 61>::integrate(f, a, b, 15, 1e-11);
}

// integrates over [a, b], splitting at a jump of the integrand if it falls inside
template <class F>
double integrate_split(F f, double a, double b, double edge) {
  if (edge > a && edge < b) return integrate(f, a, edge) + integrate(f, edge, b);
  return integrate(f, a, b);
}

void finish_table(ConvergenceTable& t) {
  t.monotone = true;
  for (std::size_t k = 1; k < t.rows.size(); ++k) {
    const auto& a = t.rows[k - 1];
    const auto& b = t.rows[k];
    const double slack = 2.0 * std::hypot(a.standard_error, b.standard_error);
    if (b.error > a.error + slack) t.monotone = false;
  }
  t.final_error = t.rows.empty() ? 0.0 : t.rows.back().error;
}

void check_n_list(const LimitConfig& c) {
  if (c.n_list.empty()) throw ConfigError("n_list must not be empty");
  for (std::size_t n : c.n_list) {
    if (n < 1) throw ConfigError("n_list entries must be >= 1");
  }
  if (c.n_paths < 2) throw ConfigError("limit experiments need at least 2 paths");
}

void check_clt_growth(const TestFunction& phi, const sim::StepFamily& family) {
  if (!phi.growth_order) {
    throw ConfigError("phi '" + phi.tag + "' grows faster than any polynomial; the CLT needs |phi(x)| <= C(1 + |x|^p)");
  }
  const int m = *phi.growth_order;
  if (m <= 2) return;
  const double moment = family.abs_moment(static_cast<double>(m), 0.0, family.bounds.sigma_upper_sq);
  if (!std::isfinite(moment)) {
    throw ConfigError("phi '" + phi.tag + "' has growth order " + std::to_string(m) +
                      " but the steps lack a finite moment of that order; the CLT needs E|X_1|^p < inf for p > 2");
  }
}

using Functional = double (*)(double sum, std::size_t n);

std::vector<ConvergenceTable> run_tables(const std::vector<TestFunction>& phis, const LimitConfig& c,
                                         const std::vector<sim::AdversaryPolicy>& policies,
                                         const std::vector<double>& references, Functional scale) {
  std::vector<ConvergenceTable> tables(phis.size());
  for (std::size_t i = 0; i < phis.size(); ++i) {
    tables[i].phi_tag = phis[i].tag;
    tables[i].reference = references[i];
  }
  sim::SimOptions opts;
  opts.workers = c.workers;
  opts.moment_p = 0.0;
  for (std::size_t n : c.n_list) {
    const auto batches = sim::simulate_family(c.family, policies, n, c.n_paths, c.seed, opts);
    for (std::size_t i = 0; i < phis.size(); ++i) {
      const auto& phi = phis[i];
      const auto est = sim::estimate_expectation(
          [&](const sim::PathView& v) { return phi(scale(v.summary().final_sum, n)); }, batches);
      ConvergenceRow row;
      row.n = n;
      row.estimate = est.upper;
      row.standard_error = est.upper_se;
      row.policy = policies[est.upper_policy].name;
      row.reference = references[i];
      row.error = std::abs(est.upper - references[i]);
      tables[i].rows.push_back(row);
    }
  }
  for (auto& t : tables) finish_table(t);
  return tables;
}

}  // namespace

double loglog(double x) {
  const double l = std::log(std::max(x, kE));
  return std::log(std::max(l, kE));
}

double lil_normalizer(double n) {
  if (n < 0.0) throw DomainError("a_n needs n >= 0");
  return std::sqrt(2.0 * n * loglog(n));
}

std::vector<std::size_t> geometric_checkpoints(std::size_t n_max, double ratio) {
  if (n_max < 1) throw ConfigError("checkpoint schedule needs n_max >= 1");
  if (!(ratio > 1.0)) throw ConfigError("geometric ratio must exceed 1");
  std::vector<std::size_t> out;
  for (double v = 1.0; v < static_cast<double>(n_max); v *= ratio) {
    const auto n = static_cast<std::size_t>(std::ceil(v - 1e-9));
    if (out.empty() || n > out.back()) out.push_back(n);
  }
  if (out.empty() || out.back() != n_max) out.push_back(n_max);
  return out;
}

std::vector<std::size_t> power_checkpoints(std::size_t n_max) {
  std::vector<std::size_t> out;
  for (std::size_t k = 1;; ++k) {
    double v = std::pow(static_cast<double>(k), static_cast<double>(k));
    if (v > static_cast<double>(n_max)) break;
    out.push_back(static_cast<std::size_t>(std::llround(v)));
  }
  return out;
}

Decomposition checkpoint_decomposition(double s_k, double s_prev, std::size_t n_k, std::size_t n_prev) {
  if (!(n_prev >= 1 && n_k > n_prev)) throw DomainError("decomposition needs 1 <= n_{k-1} < n_k");
  const double nk = static_cast<double>(n_k);
  const double np = static_cast<double>(n_prev);
  Decomposition d;
  d.direct = s_k / lil_normalizer(nk);
  d.increment = (s_k - s_prev) / std::sqrt(2.0 * (nk - np) * loglog(nk));
  d.recombined = d.increment * std::sqrt(1.0 - np / nk) +
                 (s_prev / lil_normalizer(np)) * (lil_normalizer(np) / lil_normalizer(nk));
  return d;
}

std::vector<ConvergenceTable> clt_experiment(const std::vector<TestFunction>& phis, const LimitConfig& c) {
  c.family.validate();
  check_n_list(c);
  if (c.family.bounds.mu_lower != 0.0 || c.family.bounds.mu_upper != 0.0) {
    throw DomainError("the CLT experiment needs zero means on both sides");
  }
  std::vector<double> refs;
  const auto g = gnormal::GParams::variance(c.family.bounds.sigma_lower_sq, c.family.bounds.sigma_upper_sq);
  for (const auto& phi : phis) {
    check_clt_growth(phi, c.family);
    refs.push_back(gnormal::gnormal_expect(phi, g, c.pde_resolution));
  }
  auto policies = c.policies;
  if (policies.empty()) {
    policies = sim::standard_policy_family(c.family.bounds);
    for (const auto& phi : phis) policies.push_back(sim::feedback_policy(phi, c.family.bounds));
  }
  return run_tables(phis, c, policies, refs,
                    [](double s, std::size_t n) { return s / std::sqrt(static_cast<double>(n)); });
}

ConvergenceTable clt_experiment(const TestFunction& phi, const LimitConfig& config) {
  return clt_experiment(std::vector<TestFunction>{phi}, config).front();
}

std::vector<ConvergenceTable> wlln_experiment(const std::vector<TestFunction>& phis, const LimitConfig& c) {
  c.family.validate();
  check_n_list(c);
  std::vector<double> refs;
  for (const auto& phi : phis) refs.push_back(gnormal::maximal_expect(phi, c.family.bounds));
  sim::PolicyFamilyOptions opt;
  opt.vary_mean = true;
  const auto policies = c.policies.empty() ? sim::standard_policy_family(c.family.bounds, opt) : c.policies;
  return run_tables(phis, c, policies, refs,
                    [](double s, std::size_t n) { return s / static_cast<double>(n); });
}

ConvergenceTable wlln_experiment(const TestFunction& phi, const LimitConfig& config) {
  return wlln_experiment(std::vector<TestFunction>{phi}, config).front();
}

LilResult lil_experiment(const LilConfig& c) {
  c.family.validate();
  const auto& b = c.family.bounds;
  if (b.mu_lower != 0.0 || b.mu_upper != 0.0) {
    throw DomainError("LIL hypotheses need E[X] = E[-X] = 0; got mean interval [" + std::to_string(b.mu_lower) +
                      ", " + std::to_string(b.mu_upper) + "]");
  }
  if (c.n_paths < 1) throw ConfigError("LIL experiment needs at least one path");

  LilResult r;
  auto& tr = r.trace;
  tr.checkpoints = c.checkpoints.empty() ? geometric_checkpoints(c.n_max, c.ratio) : c.checkpoints;
  tr.n_paths = c.n_paths;
  for (std::size_t n : tr.checkpoints) tr.a_n.push_back(lil_normalizer(static_cast<double>(n)));

  sim::SimOptions opts;
  opts.checkpoints = tr.checkpoints;
  opts.workers = c.workers;
  opts.moment_p = 0.0;
  const auto batch = sim::simulate_paths(c.family, c.policy, c.n_max, c.n_paths, c.seed, opts);

  const std::size_t m = tr.checkpoints.size();
  tr.ratios.resize(c.n_paths * m);
  tr.running_max.assign(c.n_paths, -std::numeric_limits<double>::infinity());
  tr.running_min.assign(c.n_paths, std::numeric_limits<double>::infinity());

  const double outer = b.sigma_upper();
  const double inner = b.sigma_lower();
  auto& cl = r.cluster;
  cl.bin_width = c.bin_width;
  cl.outer = outer;
  cl.inner = inner;
  const double reach = std::ceil((std::max(outer, 0.5) + 3.0 * c.band) / c.bin_width) * c.bin_width;
  cl.bin_origin = -reach;
  const auto n_bins = static_cast<std::size_t>(std::llround(2.0 * reach / c.bin_width));
  cl.visits.assign(n_bins, 0);

  const std::size_t tail_start = c.n_max / 10;
  std::vector<double> tail_min(c.n_paths, std::numeric_limits<double>::infinity());
  std::vector<double> tail_max(c.n_paths, -std::numeric_limits<double>::infinity());
  for (std::size_t p = 0; p < c.n_paths; ++p) {
    for (std::size_t k = 0; k < m; ++k) {
      const double v = batch.checkpoint(p, k) / tr.a_n[k];
      tr.ratios[p * m + k] = v;
      if (tr.checkpoints[k] >= c.running_from) {
        tr.running_max[p] = std::max(tr.running_max[p], v);
        tr.running_min[p] = std::min(tr.running_min[p], v);
      }
      if (tr.checkpoints[k] >= tail_start) {
        tail_min[p] = std::min(tail_min[p], v);
        tail_max[p] = std::max(tail_max[p], v);
        const double pos = std::floor((v - cl.bin_origin) / c.bin_width);
        const auto bin = static_cast<std::size_t>(std::clamp(pos, 0.0, static_cast<double>(n_bins - 1)));
        ++cl.visits[bin];
      }
    }
  }
  cl.liminf = median(tail_min);
  cl.limsup = median(tail_max);
  cl.within_outer = cl.liminf >= -outer - c.band && cl.limsup <= outer + c.band;
  cl.covers_inner = true;
  for (std::size_t i = 0; i < n_bins; ++i) {
    const double lo = cl.bin_origin + static_cast<double>(i) * c.bin_width;
    const double hi = lo + c.bin_width;
    if (lo >= -inner + c.band - 1e-12 && hi <= inner - c.band + 1e-12 && cl.visits[i] == 0) {
      cl.covers_inner = false;
    }
  }

  if (outer > 0.0) {
    std::size_t in_band = 0;
    r.overall_max = -std::numeric_limits<double>::infinity();
    for (double v : tr.running_max) {
      const double u = v / outer;
      if (u >= c.band_low && u <= c.band_high) ++in_band;
      r.overall_max = std::max(r.overall_max, u);
    }
    r.fraction_in_band = static_cast<double>(in_band) / static_cast<double>(c.n_paths);
    r.band_ok = r.fraction_in_band >= 0.9 && r.overall_max <= c.hard_cap;
  }
  return r;
}

MomentCheckReport choquet_moment_check(const sim::StepFamily& family, const MomentCheckOptions& o) {
  family.validate();
  if (o.series_decades < 2 || o.integral_decades < 2) throw ConfigError("need at least two decades per side");
  if (!(o.p > 2.0)) throw ConfigError("the truncated-moment series needs p > 2");

  const double var = family.bounds.sigma_upper_sq;
  const double edge = family.base == sim::BaseKind::two_point ? std::sqrt(var) : 0.0;
  const auto tail = [&](double x) { return family.abs_tail(x, var); };

  // g(x) = x^2 / loglog x is continuous and increasing on [0, inf)
  const auto g = [](double x) { return x * x / loglog(x); };
  const auto g_prime = [](double x) {
    if (x <= std::exp(kE)) return 2.0 * x;
    const double l = std::log(x);
    const double ll = std::log(l);
    return (2.0 * x * ll - x / l) / (ll * ll);
  };
  const auto g_inverse = [&](double t) {
    double hi = std::sqrt(t) + 1.0;
    while (g(hi) < t) hi *= 2.0;
    boost::math::tools::eps_tolerance<double> tol(50);
    std::uintmax_t iters = 200;
    const auto [lo, up] = boost::math::tools::toms748_solve([&](double x) { return g(x) - t; }, 0.0, hi, tol, iters);
    return 0.5 * (lo + up);
  };
  const auto truncated_moment = [&](double c) {
    return integrate_split([&](double s) { return o.p * std::pow(s, o.p - 1.0) * tail(s); }, 0.0, c, edge);
  };
  const auto classify = [&](const std::vector<double>& inc) {
    const double last = inc.back();
    const double prev = inc[inc.size() - 2];
    if (!(last > 1e-300) || !(prev > 0.0)) return true;
    return last / prev < o.divergence_ratio;
  };

  MomentCheckReport rep;
  rep.family = sim::to_string(family.base);
  rep.tail_note = family.tail_note();
  rep.p = o.p;
  for (double delta : o.deltas) {
    if (!(delta > 0.0)) throw ConfigError("delta must be positive");
    MomentCheckRow row;
    row.delta = delta;

    std::size_t n = 1;
    for (int j = 0; j < o.series_decades; ++j) {
      const auto end = static_cast<std::size_t>(std::llround(std::pow(10.0, j + 1)));
      double s = 0.0;
      for (; n < end; ++n) s += tail(delta * lil_normalizer(static_cast<double>(n)));
      row.series_increments.push_back(s);
    }

    for (int j = 0; j < o.integral_decades; ++j) {
      const double x0 = g_inverse(std::pow(10.0, j));
      const double x1 = g_inverse(std::pow(10.0, j + 1));
      row.integral_increments.push_back(
          integrate_split([&](double x) { return tail(x) * g_prime(x); }, x0, x1, edge));
    }

    // direct sum for small n, then a log-spaced trapezoid in n (terms are smooth there)
    const auto term = [&](double nn) {
      const double a = lil_normalizer(nn);
      return truncated_moment(delta * a) / std::pow(a, o.p);
    };
    for (int j = 0; j < o.series_decades; ++j) {
      const double lo = std::pow(10.0, j);
      const double hi = std::pow(10.0, j + 1);
      double s = 0.0;
      if (j < 2) {
        for (double k = lo; k < hi; k += 1.0) s += term(k);
      } else {
        constexpr int kSteps = 64;
        const double r = std::pow(hi / lo, 1.0 / kSteps);
        double prev_x = lo;
        double prev_f = term(lo);
        for (int i = 1; i <= kSteps; ++i) {
          const double x = lo * std::pow(r, i);
          const double f = term(x);
          s += 0.5 * (f + prev_f) * (x - prev_x);
          prev_x = x;
          prev_f = f;
        }
      }
      row.power_increments.push_back(s);
    }

    row.series_convergent = classify(row.series_increments);
    row.integral_convergent = classify(row.integral_increments);
    row.power_convergent = classify(row.power_increments);
    if (row.series_convergent != row.integral_convergent) rep.consistent = false;
    if (!row.integral_convergent) rep.satisfied = false;
    rep.rows.push_back(std::move(row));
  }
  return rep;
}

}  // namespace sublin::limits
