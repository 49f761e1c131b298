#include "sublin/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "sublin/errors.hpp"

namespace sublin::scenario {

namespace {

// Neumaier compensated sum; empirical laws carry 1e5+ equal weights.
double compensated_sum(const std::vector<double>& xs) {
  double sum = 0.0;
  double comp = 0.0;
  for (double x : xs) {
    const double t = sum + x;
    if (std::abs(sum) >= std::abs(x)) {
      comp += (sum - t) + x;
    } else {
      comp += (x - t) + sum;
    }
    sum = t;
  }
  return sum + comp;
}

double checked(double value) {
  if (!std::isfinite(value)) throw NumericError("non-finite test function image on an atom");
  return value;
}

// Per-member sorted images of f with suffix weights, for layer-cake queries.
struct SortedImage {
  std::vector<double> values;
  std::vector<double> tail;  // tail[i] = weight of atoms with value >= values[i]

  double prob_at_least(double level) const {
    const auto it = std::lower_bound(values.begin(), values.end(), level);
    if (it == values.end()) return 0.0;
    return tail[static_cast<std::size_t>(it - values.begin())];
  }
};

SortedImage sorted_image(const DiscreteDistribution& d, const PointFunction& f) {
  std::vector<std::pair<double, double>> img;
  img.reserve(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) img.emplace_back(checked(f(d.point(i))), d.weight(i));
  std::sort(img.begin(), img.end());
  SortedImage out;
  // merge equal values
  for (const auto& [v, w] : img) {
    if (!out.values.empty() && out.values.back() == v) {
      out.tail.back() += w;
    } else {
      out.values.push_back(v);
      out.tail.push_back(w);
    }
  }
  for (std::size_t i = out.tail.size(); i-- > 1;) out.tail[i - 1] += out.tail[i];
  return out;
}

PointFunction lift(const TestFunction& f) {
  return [&f](Point p) { return f(p[0]); };
}

void require_1d(const ScenarioSet& set, const char* op) {
  if (set.dim() != 1) throw ConfigError(std::string(op) + " requires a one-dimensional scenario set");
}

}  // namespace

DiscreteDistribution::DiscreteDistribution(std::size_t dim, std::vector<double> coords,
                                           std::vector<double> weights)
    : dim_(dim), coords_(std::move(coords)), weights_(std::move(weights)) {
  if (dim_ == 0) throw ConfigError("distribution dimension must be positive");
  if (weights_.empty()) throw ConfigError("distribution needs at least one atom");
  if (coords_.size() != weights_.size() * dim_) {
    throw ConfigError("coordinate count does not match atoms x dimension");
  }
  for (double c : coords_) {
    if (!std::isfinite(c)) throw ConfigError("atom values must be finite");
  }
  for (double w : weights_) {
    if (!(w >= 0.0 && w <= 1.0)) throw ConfigError("atom weights must lie in [0, 1]");
  }
  if (std::abs(compensated_sum(weights_) - 1.0) > kEngineTol) {
    throw ConfigError("atom weights must sum to one");
  }
}

DiscreteDistribution DiscreteDistribution::from_atoms(
    const std::vector<std::pair<double, double>>& atoms) {
  std::vector<double> coords;
  std::vector<double> weights;
  for (const auto& [v, w] : atoms) {
    coords.push_back(v);
    weights.push_back(w);
  }
  return DiscreteDistribution(1, std::move(coords), std::move(weights));
}

DiscreteDistribution DiscreteDistribution::point_mass(double value) {
  return DiscreteDistribution(1, {value}, {1.0});
}

DiscreteDistribution DiscreteDistribution::empirical(std::vector<double> samples) {
  if (samples.empty()) throw ConfigError("empirical law needs at least one sample");
  std::vector<double> weights(samples.size(), 1.0 / static_cast<double>(samples.size()));
  return DiscreteDistribution(1, std::move(samples), std::move(weights));
}

double DiscreteDistribution::expect(const PointFunction& f) const {
  double acc = 0.0;
  for (std::size_t i = 0; i < size(); ++i) {
    if (weights_[i] == 0.0) continue;
    acc += weights_[i] * checked(f(point(i)));
  }
  return acc;
}

double DiscreteDistribution::expect(const TestFunction& f) const {
  double acc = 0.0;
  for (std::size_t i = 0; i < size(); ++i) {
    if (weights_[i] == 0.0) continue;
    acc += weights_[i] * checked(f(coords_[i * dim_]));
  }
  return acc;
}

double DiscreteDistribution::probability(const Event& event) const {
  double acc = 0.0;
  for (std::size_t i = 0; i < size(); ++i) {
    if (event(point(i))) acc += weights_[i];
  }
  return std::min(acc, 1.0);
}

ScenarioSet::ScenarioSet(std::vector<DiscreteDistribution> members) : members_(std::move(members)) {
  if (members_.empty()) throw ConfigError("scenario set must have at least one member");
  for (const auto& m : members_) {
    if (m.dim() != members_.front().dim()) throw ConfigError("scenario members differ in dimension");
  }
}

std::vector<double> ScenarioSet::support() const {
  std::vector<double> values;
  for (const auto& m : members_) {
    for (std::size_t i = 0; i < m.size(); ++i) values.push_back(m.value(i));
  }
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());
  return values;
}

double sublinear_expect(const ScenarioSet& set, const PointFunction& f) {
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& m : set.members()) best = std::max(best, m.expect(f));
  return best;
}

double sublinear_expect(const ScenarioSet& set, const TestFunction& f) {
  require_1d(set, "sublinear_expect");
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& m : set.members()) best = std::max(best, m.expect(f));
  return best;
}

double conjugate_expect(const ScenarioSet& set, const PointFunction& f) {
  double worst = std::numeric_limits<double>::infinity();
  for (const auto& m : set.members()) worst = std::min(worst, m.expect(f));
  return worst;
}

double conjugate_expect(const ScenarioSet& set, const TestFunction& f) {
  require_1d(set, "conjugate_expect");
  double worst = std::numeric_limits<double>::infinity();
  for (const auto& m : set.members()) worst = std::min(worst, m.expect(f));
  return worst;
}

std::size_t argmax_member(const ScenarioSet& set, const PointFunction& f) {
  std::size_t best_index = 0;
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < set.size(); ++i) {
    const double v = set.member(i).expect(f);
    if (v > best) {
      best = v;
      best_index = i;
    }
  }
  return best_index;
}

double upper_capacity(const ScenarioSet& set, const Event& event) {
  double best = 0.0;
  for (const auto& m : set.members()) best = std::max(best, m.probability(event));
  return best;
}

double lower_capacity(const ScenarioSet& set, const Event& event) {
  const Event complement = [&event](Point p) { return !event(p); };
  return 1.0 - upper_capacity(set, complement);
}

double choquet_integral(const ScenarioSet& set, CapacityKind kind, const PointFunction& f) {
  std::vector<SortedImage> images;
  images.reserve(set.size());
  std::vector<double> levels;
  for (const auto& m : set.members()) {
    images.push_back(sorted_image(m, f));
    levels.insert(levels.end(), images.back().values.begin(), images.back().values.end());
  }
  std::sort(levels.begin(), levels.end());
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());

  // Below the smallest level every member puts full mass on {f >= t}; above each
  // level the capacity of {f >= t} is constant up to the next level.
  double total = levels.front();
  for (std::size_t k = 1; k < levels.size(); ++k) {
    double cap = kind == CapacityKind::upper ? 0.0 : 1.0;
    for (const auto& img : images) {
      const double p = img.prob_at_least(levels[k]);
      cap = kind == CapacityKind::upper ? std::max(cap, p) : std::min(cap, p);
    }
    total += (levels[k] - levels[k - 1]) * cap;
  }
  return total;
}

double choquet_integral(const ScenarioSet& set, CapacityKind kind, const TestFunction& f) {
  require_1d(set, "choquet_integral");
  return choquet_integral(set, kind, lift(f));
}

ScenarioSet independent_product(const ScenarioSet& x_set, const ScenarioSet& y_set,
                                std::size_t max_members) {
  const std::size_t dx = x_set.dim();
  const std::size_t dy = y_set.dim();
  const std::size_t my = y_set.size();

  double planned = 0.0;
  for (const auto& xm : x_set.members()) {
    planned += std::pow(static_cast<double>(my), static_cast<double>(xm.size()));
  }
  if (planned > static_cast<double>(max_members)) {
    throw ConfigError("independent product would need " + std::to_string(planned) +
                      " members (limit " + std::to_string(max_members) + ")");
  }

  std::vector<DiscreteDistribution> out;
  out.reserve(static_cast<std::size_t>(planned));
  for (const auto& xm : x_set.members()) {
    const std::size_t k = xm.size();
    std::vector<std::size_t> choice(k, 0);
    while (true) {
      std::vector<double> coords;
      std::vector<double> weights;
      for (std::size_t a = 0; a < k; ++a) {
        const auto& ym = y_set.member(choice[a]);
        for (std::size_t b = 0; b < ym.size(); ++b) {
          const auto xp = xm.point(a);
          const auto yp = ym.point(b);
          coords.insert(coords.end(), xp.begin(), xp.end());
          coords.insert(coords.end(), yp.begin(), yp.end());
          weights.push_back(xm.weight(a) * ym.weight(b));
        }
      }
      out.emplace_back(dx + dy, std::move(coords), std::move(weights));
      // odometer over selection maps
      std::size_t pos = 0;
      while (pos < k && ++choice[pos] == my) choice[pos++] = 0;
      if (pos == k) break;
    }
  }
  return ScenarioSet(std::move(out));
}

double nested_expect(const ScenarioSet& x_set, const ScenarioSet& y_set,
                     const std::function<double(Point, Point)>& phi) {
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& xm : x_set.members()) {
    double acc = 0.0;
    for (std::size_t a = 0; a < xm.size(); ++a) {
      if (xm.weight(a) == 0.0) continue;
      const auto xp = xm.point(a);
      const double inner = sublinear_expect(y_set, [&](Point yp) { return phi(xp, yp); });
      acc += xm.weight(a) * inner;
    }
    best = std::max(best, acc);
  }
  return best;
}

NdCheckResult nd_product_check(const ScenarioSet& joint, std::size_t split) {
  if (split == 0 || split >= joint.dim()) {
    throw ConfigError("nd_product_check split must separate the joint coordinates");
  }
  const auto sum_x = [split](Point p) {
    return std::accumulate(p.begin(), p.begin() + static_cast<std::ptrdiff_t>(split), 0.0);
  };
  const auto sum_y = [split](Point p) {
    return std::accumulate(p.begin() + static_cast<std::ptrdiff_t>(split), p.end(), 0.0);
  };

  auto thresholds = [&joint](auto&& proj) {
    std::vector<double> vals;
    for (const auto& m : joint.members()) {
      for (std::size_t i = 0; i < m.size(); ++i) vals.push_back(proj(m.point(i)));
    }
    std::sort(vals.begin(), vals.end());
    vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
    std::vector<double> picks;
    const std::size_t cap = 12;
    if (vals.size() <= cap) {
      picks = vals;
    } else {
      for (std::size_t i = 0; i < cap; ++i) picks.push_back(vals[i * (vals.size() - 1) / (cap - 1)]);
    }
    picks.push_back(vals.front() - 1.0);
    return picks;
  };
  const auto cx = thresholds(sum_x);
  const auto cy = thresholds(sum_y);

  NdCheckResult result;
  result.worst_excess = -std::numeric_limits<double>::infinity();
  auto check_pair = [&](const PointFunction& f1, const PointFunction& f2, const std::string& label) {
    const double lhs = sublinear_expect(joint, [&](Point p) { return f1(p) * f2(p); });
    const double rhs = sublinear_expect(joint, f1) * sublinear_expect(joint, f2);
    const double excess = lhs - rhs;
    ++result.pairs_checked;
    if (excess > result.worst_excess) {
      result.worst_excess = excess;
      result.worst_pair = label;
    }
  };
  for (double a : cx) {
    for (double b : cy) {
      check_pair([&](Point p) { return std::max(sum_x(p) - a, 0.0); },
                 [&](Point p) { return std::max(sum_y(p) - b, 0.0); },
                 "nondecreasing (" + std::to_string(a) + ", " + std::to_string(b) + ")");
      check_pair([&](Point p) { return std::max(a - sum_x(p), 0.0); },
                 [&](Point p) { return std::max(b - sum_y(p), 0.0); },
                 "nonincreasing (" + std::to_string(a) + ", " + std::to_string(b) + ")");
    }
  }
  result.negatively_dependent = result.worst_excess <= kInequalityTol;
  return result;
}

bool holder_check(const ScenarioSet& set, const TestFunction& f, const TestFunction& g, double p,
                  double q) {
  require_1d(set, "holder_check");
  if (!(p > 1.0 && q > 1.0) || std::abs(1.0 / p + 1.0 / q - 1.0) > kEngineTol) {
    throw ConfigError("Hoelder exponents must satisfy p, q > 1 and 1/p + 1/q = 1");
  }
  const double lhs = sublinear_expect(set, [&](Point x) { return std::abs(f(x[0]) * g(x[0])); });
  const double fp = sublinear_expect(set, [&](Point x) { return std::pow(std::abs(f(x[0])), p); });
  const double gq = sublinear_expect(set, [&](Point x) { return std::pow(std::abs(g(x[0])), q); });
  return lhs <= std::pow(fp, 1.0 / p) * std::pow(gq, 1.0 / q) + kInequalityTol;
}

IndependenceProbe independence_probe(const ScenarioSet& x_set, const ScenarioSet& y_set,
                                     const Event& x_event, const Event& y_event) {
  const std::size_t dx = x_set.dim();
  const auto joint = independent_product(x_set, y_set);
  const Event both = [&](Point p) { return x_event(p.first(dx)) && y_event(p.subspan(dx)); };
  IndependenceProbe probe;
  probe.joint_upper = upper_capacity(joint, both);
  probe.product_of_uppers = upper_capacity(x_set, x_event) * upper_capacity(y_set, y_event);
  probe.joint_lower = lower_capacity(joint, both);
  probe.product_of_lowers = lower_capacity(x_set, x_event) * lower_capacity(y_set, y_event);
  return probe;
}

}  // namespace sublin::scenario
