#ifndef SUBLIN_C_H
#define SUBLIN_C_H

/* Plain C interface to the library. Every call returns a status; on failure
   sublin_last_error() describes the problem for the calling thread. */

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum {
  SUBLIN_OK = 0,
  SUBLIN_ERR_CONFIG = 1,
  SUBLIN_ERR_NUMERIC = 2,
  SUBLIN_ERR_DOMAIN = 3,
  SUBLIN_ERR_INVARIANT = 4,
  SUBLIN_ERR_ARGUMENT = 5,
  SUBLIN_ERR_INTERNAL = 6
} sublin_status;

typedef enum {
  SUBLIN_SUBLINEAR = 0,
  SUBLIN_CONJUGATE = 1,
  SUBLIN_CHOQUET_UPPER = 2,
  SUBLIN_CHOQUET_LOWER = 3
} sublin_functional;

typedef struct sublin_scenario_set sublin_scenario_set;
typedef struct sublin_pde_solution sublin_pde_solution;

const char* sublin_version(void);
/* Message of the last failed call on this thread; empty when none. */
const char* sublin_last_error(void);
/* Frees strings returned through char** out-parameters. */
void sublin_string_free(char* s);

/* {"members":[{"atoms":[[x..., w], ...]}, ...]} */
sublin_status sublin_scenario_set_from_json(const char* json, sublin_scenario_set** out);
void sublin_scenario_set_free(sublin_scenario_set* set);
size_t sublin_scenario_set_size(const sublin_scenario_set* set);
/* phi is a registry tag applied to the first coordinate. */
sublin_status sublin_scenario_eval(const sublin_scenario_set* set, const char* phi, sublin_functional which,
                                   double* out);

sublin_status sublin_solve_g_heat(const char* phi, double sigma_lower_sq, double sigma_upper_sq,
                                  double t_horizon, size_t nx, sublin_pde_solution** out);
void sublin_pde_free(sublin_pde_solution* solution);
size_t sublin_pde_nx(const sublin_pde_solution* solution);
/* Copies the grid and the final-time row; both buffers hold sublin_pde_nx values. */
sublin_status sublin_pde_final_row(const sublin_pde_solution* solution, double* x, double* u);
sublin_status sublin_pde_value_at(const sublin_pde_solution* solution, double x, double* out);

sublin_status sublin_gnormal_expect(const char* phi, double sigma_lower_sq, double sigma_upper_sq, double* out);

size_t sublin_subcommand_count(void);
const char* sublin_subcommand_name(size_t index);

/* Runs a subcommand on a JSON config. exit_code is 0 on success and 1 when a
   dominance or acceptance check fails; config problems return SUBLIN_ERR_CONFIG.
   output_dir may be NULL or empty to skip file output. summary_json, when
   non-NULL, receives a string to release with sublin_string_free. */
sublin_status sublin_run(const char* subcommand, const char* config_json, const char* output_dir,
                         unsigned workers, int quick, int* exit_code, char** summary_json);

#ifdef __cplusplus
}
#endif

#endif
