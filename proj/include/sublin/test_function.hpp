#pragma once

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace sublin {

/// A real test function together with the growth metadata the solvers rely on.
///
/// `growth_order` is the polynomial order m in |phi(x)| <= C(1 + |x|^m); an empty
/// value marks super-polynomial growth (e.g. exp), which moment-based routines reject.
/// `support_radius` is the half-width outside of which phi is affine; solvers use it
/// to size their spatial domains.
struct TestFunction {
  std::string tag;
  std::function<double(double)> evaluator;
  std::optional<int> growth_order;
  bool lipschitz_like = true;
  double support_radius = 0.0;

  double operator()(double x) const { return evaluator(x); }
  bool bounded() const { return growth_order && *growth_order == 0; }
};

/// Builds a test function from the registry.
///
/// Plain tags: identity, sq, neg_sq, abs, neg_abs, pos_part, neg_part, cube, tanh,
/// sin, exp. Parametric tags take one numeric argument after a colon:
/// const:c, clip:c, call:k, put:k, call_spread:w, butterfly:w, small_ball:eps,
/// abs_pow:p, shifted_sq:m. Throws ConfigError on an unknown or malformed tag.
TestFunction make_test_function(std::string_view tag);

/// Returns x -> phi(x / scale); support and tag are adjusted accordingly.
TestFunction rescaled(const TestFunction& phi, double scale);

/// Tags accepted by make_test_function without an argument.
std::vector<std::string> registry_tags();

}  // namespace sublin
