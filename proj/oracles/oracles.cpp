#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <stdexcept>

namespace oracle {

HermiteRule gauss_hermite(std::size_t n) {
  // Newton on the normalized Hermite recurrence; initial guesses after Stroud & Secrest
  const double pim4 = 0.7511255444649425;  // pi^{-1/4}
  HermiteRule r;
  r.nodes.assign(n, 0.0);
  r.weights.assign(n, 0.0);
  const std::size_t m = (n + 1) / 2;
  double z = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double nn = static_cast<double>(n);
    if (i == 0) {
      z = std::sqrt(2.0 * nn + 1.0) - 1.85575 * std::pow(2.0 * nn + 1.0, -0.16667);
    } else if (i == 1) {
      z -= 1.14 * std::pow(nn, 0.426) / z;
    } else if (i == 2) {
      z = 1.86 * z - 0.86 * r.nodes[0];
    } else if (i == 3) {
      z = 1.91 * z - 0.91 * r.nodes[1];
    } else {
      z = 2.0 * z - r.nodes[i - 2];
    }
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p1 = pim4;
      double p2 = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        const double p3 = p2;
        p2 = p1;
        const double jj = static_cast<double>(j);
        p1 = z * std::sqrt(2.0 / (jj + 1.0)) * p2 - std::sqrt(jj / (jj + 1.0)) * p3;
      }
      pp = std::sqrt(2.0 * nn) * p2;
      const double z1 = z;
      z = z1 - p1 / pp;
      if (std::abs(z - z1) <= 1e-15 * std::max(1.0, std::abs(z))) break;
    }
    r.nodes[i] = z;
    r.nodes[n - 1 - i] = -z;
    r.weights[i] = 2.0 / (pp * pp);
    r.weights[n - 1 - i] = r.weights[i];
  }
  return r;
}

double gaussian_expect(const std::function<double(double)>& f, double variance, std::size_t n) {
  const auto rule = gauss_hermite(n);
  const double s = std::sqrt(2.0 * variance);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) total += rule.weights[i] * f(s * rule.nodes[i]);
  return total / std::sqrt(M_PI);
}

namespace {
double mean_of(const Atoms& a, const std::function<double(double)>& f) {
  double t = 0.0;
  for (const auto& [v, w] : a) t += w * f(v);
  return t;
}
}  // namespace

double member_sup(const Family& family, const std::function<double(double)>& f) {
  double best = -INFINITY;
  for (const auto& a : family) best = std::max(best, mean_of(a, f));
  return best;
}

double member_inf(const Family& family, const std::function<double(double)>& f) {
  double best = INFINITY;
  for (const auto& a : family) best = std::min(best, mean_of(a, f));
  return best;
}

double nested_sup(const Family& xs, const Family& ys, const std::function<double(double, double)>& phi) {
  double best = -INFINITY;
  for (const auto& a : xs) {
    double t = 0.0;
    for (const auto& [x, p] : a) {
      t += p * member_sup(ys, [&](double y) { return phi(x, y); });
    }
    best = std::max(best, t);
  }
  return best;
}

double binomial_sign_tail(std::size_t n, double x) {
  // S_n = 2K - n with K ~ Bin(n, 1/2)
  double total = 0.0;
  const double nn = static_cast<double>(n);
  for (std::size_t k = 0; k <= n; ++k) {
    const double kk = static_cast<double>(k);
    if (2.0 * kk - nn >= x) {
      total += std::exp(std::lgamma(nn + 1) - std::lgamma(kk + 1) - std::lgamma(nn - kk + 1) - nn * std::log(2.0));
    }
  }
  return total;
}

double normal_upper_tail(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

bool loglog_moment_finite(const std::string& profile, double alpha) {
  if (profile == "bounded" || profile == "gaussian") return true;
  if (profile == "power") return alpha > 2.0;
  throw std::invalid_argument("unknown tail profile " + profile);
}

std::uint64_t digest(const std::vector<double>& values) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (double v : values) {
    unsigned char bytes[sizeof(double)];
    std::memcpy(bytes, &v, sizeof v);
    for (unsigned char b : bytes) {
      h ^= b;
      h *= 0x100000001b3ULL;
    }
  }
  return h;
}

}  // namespace oracle
