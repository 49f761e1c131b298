// One-time grid search for the constants of the bounds whose constants are
// existential. Prints the JSON that data/calibrated_constants.json freezes.
//
//   calibrate > data/calibrated_constants.json

#include <cmath>
#include <cstdio>
#include <iostream>
#include <map>

#include <json.hpp>

#include "sublin/inequality.hpp"

using namespace sublin;

namespace {

sim::StepFamily family_for(const std::string& base) {
  sim::StepFamily f;
  f.base = sim::parse_base(base);
  f.bounds = gnormal::GParams::variance(0.25, 1.0);
  f.dof = 5.0;
  return f;
}

ineq::VerifyConfig config_for(const std::string& base) {
  ineq::VerifyConfig c;
  c.family = family_for(base);
  c.family_tag = base;
  c.n = 200;
  c.n_paths = 20000;
  c.seed = 20240601;
  c.x_grid = {1.0, 1.5, 2.0, 2.5, 3.0};
  c.deltas = {0.25, 0.5, 1.0};
  return c;
}

std::vector<double> geometric_grid(double lo, double hi, double factor) {
  std::vector<double> g;
  for (double v = lo; v <= hi * 1.0000001; v *= factor) g.push_back(std::round(v * 1000.0) / 1000.0);
  return g;
}

}  // namespace

int main() {
  nlohmann::ordered_json out;
  const std::vector<std::string> bases = {"two_point", "truncated_gaussian", "student_t"};
  const std::vector<double> ps = {2.0, 3.0, 4.0};
  const auto fn_grid = geometric_grid(1.0, 1000.0, 1.25);
  const auto r_grid = geometric_grid(0.01, 1000.0, 1.25);

  for (const std::string bound : {"fuk-nagaev", "rosenthal-choquet", "rosenthal-moment"}) {
    for (const auto& base : bases) {
      for (double p : ps) {
        auto c = config_for(base);
        c.p_list = {p};
        const auto v = ineq::calibrate_constant(bound, c, bound == "fuk-nagaev" ? fn_grid : r_grid);
        if (!v) {
          std::cerr << bound << ' ' << base << " p=" << p << ": no grid value dominates\n";
          return 1;
        }
        std::cerr << bound << ' ' << base << " p=" << p << ": " << *v << '\n';
        out[bound][base][std::to_string(static_cast<int>(p))] = *v;
      }
    }
  }
  for (const auto& base : bases) {
    out["chebyshev"][base]["2"] = ineq::chebyshev_constant(out["fuk-nagaev"][base]["2"].get<double>());
  }
  std::cout << out.dump(2) << '\n';
  return 0;
}
