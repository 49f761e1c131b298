#pragma once

// Reference computations that share no code with the library under test.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace oracle {

using Atoms = std::vector<std::pair<double, double>>;  // (value, weight)
using Family = std::vector<Atoms>;

/// Physicists' Gauss-Hermite rule (weight e^{-x^2}), roots by Newton iteration.
struct HermiteRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};
HermiteRule gauss_hermite(std::size_t n);

/// E[f(sigma Z)] for standard normal Z.
double gaussian_expect(const std::function<double(double)>& f, double variance, std::size_t n = 100);

/// max over members of sum w f(v).
double member_sup(const Family& family, const std::function<double(double)>& f);
double member_inf(const Family& family, const std::function<double(double)>& f);

/// max over X members of sum_x p(x) max over Y members sum_y q(y) phi(x, y).
double nested_sup(const Family& xs, const Family& ys, const std::function<double(double, double)>& phi);

/// P(S_n >= x) for S_n a sum of n fair +-1 signs.
double binomial_sign_tail(std::size_t n, double x);

/// P(Z > z) for standard normal Z.
double normal_upper_tail(double z);

/// Analytic verdict on whether E[X^2 / loglog|X|] is finite for a tail profile:
/// "bounded", "gaussian", or "power" with index alpha (finite iff alpha > 2).
bool loglog_moment_finite(const std::string& profile, double alpha = 0.0);

/// Deterministic 64-bit FNV-1a over a sequence of doubles.
std::uint64_t digest(const std::vector<double>& values);

}  // namespace oracle
