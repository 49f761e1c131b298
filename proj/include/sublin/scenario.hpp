#pragma once

// Sub-linear expectations realized as the upper envelope of finitely many
// discrete probability models.

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sublin/test_function.hpp"

namespace sublin::scenario {

inline constexpr double kEngineTol = 1e-12;
inline constexpr double kInequalityTol = 1e-10;

using Point = std::span<const double>;
using PointFunction = std::function<double(Point)>;
using Event = std::function<bool(Point)>;

/// Finitely supported probability law on R^dim. Atoms are stored row-major.
class DiscreteDistribution {
 public:
  /// Validates weights (in [0,1], summing to one within 1e-12) and finiteness.
  DiscreteDistribution(std::size_t dim, std::vector<double> coords, std::vector<double> weights);

  /// One-dimensional convenience: {(value, weight), ...}.
  static DiscreteDistribution from_atoms(const std::vector<std::pair<double, double>>& atoms);
  static DiscreteDistribution point_mass(double value);
  /// Uniform weights over the given samples (empirical law).
  static DiscreteDistribution empirical(std::vector<double> samples);

  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return weights_.size(); }
  Point point(std::size_t i) const { return {coords_.data() + i * dim_, dim_}; }
  double value(std::size_t i) const { return coords_[i * dim_]; }
  double weight(std::size_t i) const { return weights_[i]; }
  const std::vector<double>& coords() const noexcept { return coords_; }
  const std::vector<double>& weights() const noexcept { return weights_; }

  double expect(const PointFunction& f) const;
  double expect(const TestFunction& f) const;
  double probability(const Event& event) const;

 private:
  std::size_t dim_;
  std::vector<double> coords_;
  std::vector<double> weights_;
};

/// Nonempty family of distributions of a common dimension. E[f] is the maximum of
/// the member means.
class ScenarioSet {
 public:
  explicit ScenarioSet(std::vector<DiscreteDistribution> members);

  std::size_t dim() const noexcept { return members_.front().dim(); }
  std::size_t size() const noexcept { return members_.size(); }
  const DiscreteDistribution& member(std::size_t i) const { return members_[i]; }
  const std::vector<DiscreteDistribution>& members() const noexcept { return members_; }

  /// Distinct first-coordinate values over all members (sorted), for 1-D sets.
  std::vector<double> support() const;

 private:
  std::vector<DiscreteDistribution> members_;
};

double sublinear_expect(const ScenarioSet& set, const PointFunction& f);
double sublinear_expect(const ScenarioSet& set, const TestFunction& f);
double conjugate_expect(const ScenarioSet& set, const PointFunction& f);
double conjugate_expect(const ScenarioSet& set, const TestFunction& f);

/// Lowest member index attaining the supremum.
std::size_t argmax_member(const ScenarioSet& set, const PointFunction& f);

double upper_capacity(const ScenarioSet& set, const Event& event);
/// v(A) = 1 - V(A^c).
double lower_capacity(const ScenarioSet& set, const Event& event);

/// The pair (V, v) induced by a scenario set.
class CapacityPair {
 public:
  explicit CapacityPair(ScenarioSet set) : set_(std::move(set)) {}

  double upper(const Event& event) const { return upper_capacity(set_, event); }
  double lower(const Event& event) const { return lower_capacity(set_, event); }
  const ScenarioSet& set() const noexcept { return set_; }

 private:
  ScenarioSet set_;
};

enum class CapacityKind { upper, lower };

/// Choquet integral of f(X) against V or v. Exact layer-cake sum over the sorted
/// distinct values of f on the union of all atoms.
double choquet_integral(const ScenarioSet& set, CapacityKind kind, const PointFunction& f);
double choquet_integral(const ScenarioSet& set, CapacityKind kind, const TestFunction& f);

/// Joint set in which Y is independent of X: for every member of X and every map
/// from X's support points to members of Y, the law p(x) q_{s(x)}(y). Throws
/// ConfigError when the enumeration would exceed `max_members`.
ScenarioSet independent_product(const ScenarioSet& x_set, const ScenarioSet& y_set,
                                std::size_t max_members = 1u << 16);

/// E[ E[phi(x, Y)] |_{x = X} ] evaluated by direct nested optimization.
double nested_expect(const ScenarioSet& x_set, const ScenarioSet& y_set,
                     const std::function<double(Point, Point)>& phi);

struct NdCheckResult {
  bool negatively_dependent = true;
  double worst_excess = 0.0;  ///< max of E[f1 f2] - E[f1] E[f2] over the registry
  std::string worst_pair;
  std::size_t pairs_checked = 0;
};

/// Checks E[f1(X) f2(Y)] <= E[f1(X)] E[f2(Y)] (within 1e-10) over a registry of
/// nonnegative monotone test pairs. The first `split` coordinates form X.
NdCheckResult nd_product_check(const ScenarioSet& joint, std::size_t split);

/// E|fg| <= (E|f|^p)^(1/p) (E|g|^q)^(1/q) within 1e-10. Requires 1/p + 1/q = 1.
bool holder_check(const ScenarioSet& set, const TestFunction& f, const TestFunction& g, double p,
                  double q);

/// Compares V(X in A, Y in B) under the independent product against V(A) V(B).
/// Diagnostic only: capacity-level independence is not implied.
struct IndependenceProbe {
  double joint_upper = 0.0;
  double product_of_uppers = 0.0;
  double joint_lower = 0.0;
  double product_of_lowers = 0.0;
};
IndependenceProbe independence_probe(const ScenarioSet& x_set, const ScenarioSet& y_set,
                                     const Event& x_event, const Event& y_event);

/// {"members":[{"atoms":[[x..., w], ...]}, ...]}: each atom lists its coordinates
/// followed by its weight.
std::string to_json(const ScenarioSet& set);
ScenarioSet scenario_set_from_json(const std::string& text);

}  // namespace sublin::scenario
