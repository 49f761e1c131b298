#include "sublin/sublin_c.h"

#include <cstring>
#include <memory>
#include <string>

#include "sublin/app.hpp"
#include "sublin/errors.hpp"
#include "sublin/gnormal.hpp"
#include "sublin/scenario.hpp"

struct sublin_scenario_set {
  sublin::scenario::ScenarioSet set;
};

struct sublin_pde_solution {
  sublin::gnormal::PdeSolution sol;
};

namespace {

thread_local std::string last_error;

template <class F>
sublin_status guarded(F&& body) {
  last_error.clear();
  try {
    body();
    return SUBLIN_OK;
  } catch (const sublin::ConfigError& e) {
    last_error = e.what();
    return SUBLIN_ERR_CONFIG;
  } catch (const sublin::NumericError& e) {
    last_error = e.what();
    return SUBLIN_ERR_NUMERIC;
  } catch (const sublin::DomainError& e) {
    last_error = e.what();
    return SUBLIN_ERR_DOMAIN;
  } catch (const sublin::InvariantError& e) {
    last_error = e.what();
    return SUBLIN_ERR_INVARIANT;
  } catch (const std::exception& e) {
    last_error = e.what();
    return SUBLIN_ERR_INTERNAL;
  } catch (...) {
    last_error = "unknown error";
    return SUBLIN_ERR_INTERNAL;
  }
}

sublin_status bad_argument(const char* what) {
  last_error = what;
  return SUBLIN_ERR_ARGUMENT;
}

char* copy_string(const std::string& s) {
  char* out = new char[s.size() + 1];
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

}  // namespace

extern "C" {

const char* sublin_version(void) { return "1.0.0"; }

const char* sublin_last_error(void) { return last_error.c_str(); }

void sublin_string_free(char* s) { delete[] s; }

sublin_status sublin_scenario_set_from_json(const char* json, sublin_scenario_set** out) {
  if (!json || !out) return bad_argument("null argument");
  *out = nullptr;
  return guarded([&] { *out = new sublin_scenario_set{sublin::scenario::scenario_set_from_json(json)}; });
}

void sublin_scenario_set_free(sublin_scenario_set* set) { delete set; }

size_t sublin_scenario_set_size(const sublin_scenario_set* set) { return set ? set->set.size() : 0; }

sublin_status sublin_scenario_eval(const sublin_scenario_set* set, const char* phi, sublin_functional which,
                                   double* out) {
  if (!set || !phi || !out) return bad_argument("null argument");
  return guarded([&] {
    namespace sc = sublin::scenario;
    const auto f = sublin::make_test_function(phi);
    const sc::PointFunction g = [&f](sc::Point x) { return f(x[0]); };
    switch (which) {
      case SUBLIN_SUBLINEAR: *out = sc::sublinear_expect(set->set, g); break;
      case SUBLIN_CONJUGATE: *out = sc::conjugate_expect(set->set, g); break;
      case SUBLIN_CHOQUET_UPPER: *out = sc::choquet_integral(set->set, sc::CapacityKind::upper, g); break;
      case SUBLIN_CHOQUET_LOWER: *out = sc::choquet_integral(set->set, sc::CapacityKind::lower, g); break;
      default: throw sublin::ConfigError("unknown functional");
    }
  });
}

sublin_status sublin_solve_g_heat(const char* phi, double sigma_lower_sq, double sigma_upper_sq,
                                  double t_horizon, size_t nx, sublin_pde_solution** out) {
  if (!phi || !out) return bad_argument("null argument");
  *out = nullptr;
  return guarded([&] {
    namespace g = sublin::gnormal;
    const auto f = sublin::make_test_function(phi);
    const auto params = g::GParams::variance(sigma_lower_sq, sigma_upper_sq);
    params.validate();
    const double half = g::truncation_half_width(f, params, t_horizon);
    const auto grid = g::stable_grid(params, -half, half, nx, t_horizon);
    g::SolveOptions so;
    so.store_every = grid.nt;
    *out = new sublin_pde_solution{g::solve_g_heat(f, params, grid, so)};
  });
}

void sublin_pde_free(sublin_pde_solution* solution) { delete solution; }

size_t sublin_pde_nx(const sublin_pde_solution* solution) { return solution ? solution->sol.grid.nx : 0; }

sublin_status sublin_pde_final_row(const sublin_pde_solution* solution, double* x, double* u) {
  if (!solution || !x || !u) return bad_argument("null argument");
  const auto row = solution->sol.final_row();
  for (size_t i = 0; i < row.size(); ++i) {
    x[i] = solution->sol.grid.x(i);
    u[i] = row[i];
  }
  return SUBLIN_OK;
}

sublin_status sublin_pde_value_at(const sublin_pde_solution* solution, double x, double* out) {
  if (!solution || !out) return bad_argument("null argument");
  return guarded([&] { *out = solution->sol.value_at(solution->sol.time_indices.size() - 1, x); });
}

sublin_status sublin_gnormal_expect(const char* phi, double sigma_lower_sq, double sigma_upper_sq, double* out) {
  if (!phi || !out) return bad_argument("null argument");
  return guarded([&] {
    *out = sublin::gnormal::gnormal_expect(sublin::make_test_function(phi),
                                           sublin::gnormal::GParams::variance(sigma_lower_sq, sigma_upper_sq));
  });
}

size_t sublin_subcommand_count(void) { return sublin::app::subcommands().size(); }

const char* sublin_subcommand_name(size_t index) {
  static const auto names = sublin::app::subcommands();
  return index < names.size() ? names[index].c_str() : nullptr;
}

sublin_status sublin_run(const char* subcommand, const char* config_json, const char* output_dir,
                         unsigned workers, int quick, int* exit_code, char** summary_json) {
  if (!subcommand || !config_json || !exit_code) return bad_argument("null argument");
  if (summary_json) *summary_json = nullptr;
  return guarded([&] {
    sublin::app::RunOptions o;
    o.output_dir = output_dir ? output_dir : "";
    o.workers = workers == 0 ? 1 : workers;
    o.quick = quick != 0;
    const auto r = sublin::app::run(subcommand, sublin::app::parse_config(config_json), o);
    *exit_code = r.exit_code;
    if (summary_json) *summary_json = copy_string(r.summary.dump(2));
  });
}

}  // extern "C"
