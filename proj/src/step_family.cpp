#include <algorithm>
#include <cmath>
#include <random>
#include <limits>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "sublin/adversarial.hpp"
#include "sublin/errors.hpp"

namespace sublin::sim {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }
double normal_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * M_PI); }

// variance of a standard normal truncated to [-c, c]
double truncated_variance(double c) {
  const double mass = 2.0 * normal_cdf(c) - 1.0;
  return 1.0 - 2.0 * c * normal_pdf(c) / mass;
}

double student_scale(double dof) { return std::sqrt((dof - 2.0) / dof); }
double pareto_scale(double alpha) { return std::sqrt(alpha / (alpha - 2.0)); }

template <class F>
double integrate(F f, double a, double b) {
  using boost::math::quadrature::gauss_kronrod;
  return gauss_kronrod<double, 61>::integrate(f, a, b, 15, 1e-12);
}

}  // namespace

BaseKind parse_base(const std::string& tag) {
  if (tag == "two_point") return BaseKind::two_point;
  if (tag == "gaussian") return BaseKind::gaussian;
  if (tag == "truncated_gaussian") return BaseKind::truncated_gaussian;
  if (tag == "student_t") return BaseKind::student_t;
  if (tag == "pareto") return BaseKind::pareto;
  throw ConfigError("unknown step base '" + tag + "'");
}

std::string to_string(BaseKind kind) {
  switch (kind) {
    case BaseKind::two_point: return "two_point";
    case BaseKind::gaussian: return "gaussian";
    case BaseKind::truncated_gaussian: return "truncated_gaussian";
    case BaseKind::student_t: return "student_t";
    case BaseKind::pareto: return "pareto";
  }
  return "unknown";
}

Coupling parse_coupling(const std::string& tag) {
  if (tag == "independent") return Coupling::independent;
  if (tag == "antithetic") return Coupling::antithetic;
  if (tag == "comonotone") return Coupling::comonotone;
  throw ConfigError("unknown coupling mode '" + tag + "'");
}

std::string to_string(Coupling mode) {
  switch (mode) {
    case Coupling::independent: return "independent";
    case Coupling::antithetic: return "antithetic";
    case Coupling::comonotone: return "comonotone";
  }
  return "unknown";
}

void StepFamily::validate() const {
  bounds.validate();
  if (base == BaseKind::truncated_gaussian && !(trunc_level > 0.0)) {
    throw ConfigError("truncated_gaussian needs trunc_level > 0");
  }
  if (base == BaseKind::student_t && !(dof > 0.0)) throw ConfigError("student_t needs dof > 0");
  if (base == BaseKind::pareto && !(tail_index > 0.0)) throw ConfigError("pareto needs tail_index > 0");
  if (cap && !std::isfinite(*cap)) throw ConfigError("truncation level must be finite");
}

bool StepFamily::simulable() const {
  if (base == BaseKind::student_t) return dof > 2.0;
  if (base == BaseKind::pareto) return tail_index > 2.0;
  return true;
}

double StepFamily::draw_standard(PathRng& rng) const {
  switch (base) {
    case BaseKind::two_point:
      return rng.sign();
    case BaseKind::gaussian: {
      std::normal_distribution<double> normal;
      return normal(rng);
    }
    case BaseKind::truncated_gaussian: {
      std::normal_distribution<double> normal;
      double z = normal(rng);
      while (std::abs(z) > trunc_level) z = normal(rng);
      return z / std::sqrt(truncated_variance(trunc_level));
    }
    case BaseKind::student_t: {
      std::student_t_distribution<double> student(dof);
      return student(rng) * student_scale(dof);
    }
    case BaseKind::pareto: {
      const double u = 1.0 - rng.uniform();  // (0, 1]
      const double magnitude = std::pow(u, -1.0 / tail_index);
      return rng.sign() * magnitude / pareto_scale(tail_index);
    }
  }
  return 0.0;
}

namespace {

// P(eps > e) for the standardized base.
double standard_upper(const StepFamily& f, double e) {
  switch (f.base) {
    case BaseKind::two_point:
      return e < -1.0 ? 1.0 : (e < 1.0 ? 0.5 : 0.0);
    case BaseKind::gaussian:
      return 1.0 - normal_cdf(e);
    case BaseKind::truncated_gaussian: {
      const double s = std::sqrt(truncated_variance(f.trunc_level));
      const double z = std::clamp(e * s, -f.trunc_level, f.trunc_level);
      return (normal_cdf(f.trunc_level) - normal_cdf(z)) / (2.0 * normal_cdf(f.trunc_level) - 1.0);
    }
    case BaseKind::student_t: {
      const double k = f.dof > 2.0 ? student_scale(f.dof) : 1.0;
      boost::math::students_t_distribution<double> t(f.dof);
      return boost::math::cdf(boost::math::complement(t, e / k));
    }
    case BaseKind::pareto: {
      const double k = f.tail_index > 2.0 ? pareto_scale(f.tail_index) : 1.0;
      const double y = e * k;
      if (y >= 1.0) return 0.5 * std::pow(y, -f.tail_index);
      if (y > -1.0) return 0.5;
      return 1.0 - 0.5 * std::pow(-y, -f.tail_index);
    }
  }
  return 0.0;
}

// density of the standardized base (continuous bases only)
double standard_density(const StepFamily& f, double e) {
  switch (f.base) {
    case BaseKind::gaussian:
      return normal_pdf(e);
    case BaseKind::truncated_gaussian: {
      const double s = std::sqrt(truncated_variance(f.trunc_level));
      if (std::abs(e * s) > f.trunc_level) return 0.0;
      return s * normal_pdf(e * s) / (2.0 * normal_cdf(f.trunc_level) - 1.0);
    }
    case BaseKind::student_t: {
      const double k = student_scale(f.dof);
      boost::math::students_t_distribution<double> t(f.dof);
      return boost::math::pdf(t, e / k) / k;
    }
    case BaseKind::pareto: {
      const double k = pareto_scale(f.tail_index);
      const double y = std::abs(e) * k;
      if (y < 1.0) return 0.0;
      return 0.5 * f.tail_index * std::pow(y, -f.tail_index - 1.0) * k;
    }
    case BaseKind::two_point:
      break;
  }
  return 0.0;
}

}  // namespace

double StepFamily::abs_moment(double p, double mean, double variance) const {
  const double sigma = std::sqrt(variance);
  if (sigma == 0.0) return std::pow(std::abs(mean), p);
  if (base == BaseKind::two_point) {
    return 0.5 * std::pow(std::abs(mean + sigma), p) + 0.5 * std::pow(std::abs(mean - sigma), p);
  }
  if (base == BaseKind::student_t && p >= dof) return kInf;
  if (base == BaseKind::pareto && p >= tail_index) return kInf;
  if (!simulable()) return kInf;

  const auto integrand = [&](double e) {
    return std::pow(std::abs(mean + sigma * e), p) * standard_density(*this, e);
  };
  const double kink = -mean / sigma;
  if (base == BaseKind::truncated_gaussian) {
    const double edge = trunc_level / std::sqrt(truncated_variance(trunc_level));
    const double k = std::clamp(kink, -edge, edge);
    return integrate(integrand, -edge, k) + integrate(integrand, k, edge);
  }
  if (base == BaseKind::pareto) {
    const double edge = 1.0 / pareto_scale(tail_index);
    double total = integrate(integrand, -kInf, -edge) + integrate(integrand, edge, kInf);
    return total;
  }
  return integrate(integrand, -kInf, kink) + integrate(integrand, kink, kInf);
}

double StepFamily::abs_tail(double x, double variance) const {
  if (x < 0.0) return 1.0;
  const double sigma = std::sqrt(variance);
  if (sigma == 0.0) return 0.0;
  const double e = x / sigma;
  if (base == BaseKind::two_point) return e < 1.0 ? 1.0 : 0.0;
  return 2.0 * standard_upper(*this, e);
}

double StepFamily::upper_tail(double x, double variance) const {
  const double sigma = std::sqrt(variance);
  if (sigma == 0.0) return x < 0.0 ? 1.0 : 0.0;
  return standard_upper(*this, x / sigma);
}

double StepFamily::choquet_positive_moment(double p) const {
  const double s_hi = bounds.sigma_upper();
  const double s_lo = bounds.sigma_lower();
  if (base == BaseKind::two_point) {
    // the tail of a two-point law jumps; the sup over members of P(X > t) is the
    // envelope of step functions, integrated exactly below
    std::vector<std::pair<double, double>> jumps;  // (level, mass above level)
    for (double m : {bounds.mu_lower, bounds.mu_upper}) {
      for (double s : {s_lo, s_hi}) {
        jumps.emplace_back(std::max(m + s, 0.0), 0.5);
        jumps.emplace_back(std::max(m - s, 0.0), 1.0);
      }
    }
    std::vector<double> levels;
    for (const auto& j : jumps) levels.push_back(j.first);
    levels.push_back(0.0);
    std::sort(levels.begin(), levels.end());
    levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
    double total = 0.0;
    for (std::size_t i = 1; i < levels.size(); ++i) {
      // capacity of {X^+ >= t} for t in (levels[i-1], levels[i]]
      double cap = 0.0;
      for (double m : {bounds.mu_lower, bounds.mu_upper}) {
        for (double s : {s_lo, s_hi}) {
          double mass = 0.0;
          if (m + s >= levels[i]) mass += 0.5;
          if (m - s >= levels[i]) mass += 0.5;
          cap = std::max(cap, mass);
        }
      }
      total += cap * (std::pow(levels[i], p) - std::pow(levels[i - 1], p));
    }
    return total;
  }
  const auto integrand = [&](double s) {
    double cap = 0.0;
    for (double m : {bounds.mu_lower, bounds.mu_upper}) {
      for (double sig : {s_lo, s_hi}) {
        const double tail = sig == 0.0 ? (m > s ? 1.0 : 0.0) : standard_upper(*this, (s - m) / sig);
        cap = std::max(cap, tail);
      }
    }
    return p * std::pow(s, p - 1.0) * cap;
  };
  return integrate(integrand, 0.0, kInf);
}

std::vector<std::pair<double, double>> StepFamily::standard_skeleton() const {
  if (base == BaseKind::two_point) return {{-1.0, 0.5}, {1.0, 0.5}};
  const double r = std::sqrt(3.0);
  return {{-r, 1.0 / 6.0}, {0.0, 2.0 / 3.0}, {r, 1.0 / 6.0}};
}

std::string StepFamily::tail_note() const {
  switch (base) {
    case BaseKind::two_point:
    case BaseKind::truncated_gaussian:
      return "bounded support: C_V[X^2/loglog|X|] finite";
    case BaseKind::gaussian:
      return "Gaussian tail: C_V[X^2/loglog|X|] finite";
    case BaseKind::student_t:
      return dof > 2.0 ? "power tail x^-" + std::to_string(dof) + " (> 2): C_V[X^2/loglog|X|] finite"
                       : "power tail x^-" + std::to_string(dof) + " (<= 2): C_V[X^2/loglog|X|] infinite";
    case BaseKind::pareto:
      return tail_index > 2.0
                 ? "power tail x^-" + std::to_string(tail_index) + " (> 2): C_V[X^2/loglog|X|] finite"
                 : "power tail x^-" + std::to_string(tail_index) + " (<= 2): C_V[X^2/loglog|X|] infinite";
  }
  return "";
}

StepFamily nd_coupler(const StepFamily& family, Coupling mode) {
  family.validate();
  StepFamily out = family;
  out.coupling = mode;
  return out;
}

scenario::ScenarioSet two_step_joint(const StepFamily& family) {
  family.validate();
  std::vector<StepChoice> choices;
  for (double v : {family.bounds.sigma_lower_sq, family.bounds.sigma_upper_sq}) {
    for (double m : {family.bounds.mu_lower, family.bounds.mu_upper}) {
      const bool seen = std::any_of(choices.begin(), choices.end(), [&](const StepChoice& c) {
        return c.variance == v && c.mean == m;
      });
      if (!seen) choices.push_back({v, m});
    }
  }
  const auto skeleton = family.standard_skeleton();
  const auto capped = [&family](double x) { return family.cap ? std::min(x, *family.cap) : x; };

  if (family.coupling == Coupling::independent) {
    std::vector<scenario::DiscreteDistribution> members;
    for (const auto& c : choices) {
      std::vector<std::pair<double, double>> atoms;
      for (const auto& [e, w] : skeleton) atoms.emplace_back(capped(c.mean + std::sqrt(c.variance) * e), w);
      members.push_back(scenario::DiscreteDistribution::from_atoms(atoms));
    }
    const scenario::ScenarioSet marginal(std::move(members));
    return scenario::independent_product(marginal, marginal);
  }

  const double sign = family.coupling == Coupling::antithetic ? -1.0 : 1.0;
  std::vector<scenario::DiscreteDistribution> members;
  for (const auto& c1 : choices) {
    for (const auto& c2 : choices) {
      std::vector<double> coords;
      std::vector<double> weights;
      for (const auto& [e, w] : skeleton) {
        coords.push_back(capped(c1.mean + std::sqrt(c1.variance) * e));
        coords.push_back(capped(c2.mean + sign * std::sqrt(c2.variance) * e));
        weights.push_back(w);
      }
      members.emplace_back(2, std::move(coords), std::move(weights));
    }
  }
  return scenario::ScenarioSet(std::move(members));
}

}  // namespace sublin::sim
