#ifndef RECBF_RECBF_H
#define RECBF_RECBF_H

#include <stddef.h>

#if defined(_WIN32)
#define RECBF_API __declspec(dllexport)
#else
#define RECBF_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum recbf_status {
  RECBF_OK = 0,
  RECBF_ERR_INVALID_ARGUMENT = 1,
  RECBF_ERR_NON_FINITE = 2,
  RECBF_ERR_NESTING_DEPTH = 3,
  RECBF_ERR_UNKNOWN_SYSTEM = 4,
  RECBF_ERR_WRONG_SYSTEM = 5,
  RECBF_ERR_UNKNOWN_EXPERIMENT = 6,
  RECBF_ERR_CONFIG = 7,
  RECBF_ERR_IO = 8,
  RECBF_ERR_INTERNAL = 99
} recbf_status;

/* Process exit codes of the recbf_cmd_* entry points. */
enum {
  RECBF_EXIT_OK = 0,
  RECBF_EXIT_VIOLATIONS = 1,
  RECBF_EXIT_SAFETY_EVENT = 2,
  RECBF_EXIT_USAGE = 64
};

typedef struct recbf_system recbf_system;
typedef struct recbf_barrier recbf_barrier;

typedef enum recbf_filter_mode { RECBF_FILTER_CBF = 0, RECBF_FILTER_HOCBF = 1 } recbf_filter_mode;

typedef struct recbf_filter_options {
  recbf_filter_mode mode;
  double alpha_coeff;    /* alpha(s) = alpha_coeff * s */
  double zero_tolerance; /* |L_g h| at or below this counts as zero */
} recbf_filter_options;

typedef struct recbf_filter_result {
  int feasible;
  int active;
  double margin;
} recbf_filter_result;

RECBF_API const char* recbf_version(void);
RECBF_API const char* recbf_status_string(recbf_status status);
/* Message of the last failed call on this thread; "" when none. */
RECBF_API const char* recbf_last_error(void);

/* "double_integrator", "triple_integrator", "aircraft_pitch", "mixed_two_input". */
RECBF_API recbf_status recbf_system_builtin(const char* name, recbf_system** out);
/* A "system" object of the run-config schema, as JSON text. */
RECBF_API recbf_status recbf_system_from_json(const char* json, recbf_system** out);
RECBF_API void recbf_system_free(recbf_system* sys);
RECBF_API recbf_status recbf_system_dims(const recbf_system* sys, size_t* n, size_t* m);
/* dx = f(x) + g(x) u. */
RECBF_API recbf_status recbf_system_dynamics(const recbf_system* sys, const double* x, size_t n,
                                             const double* u, size_t m, double* dx);

/* A "barrier" object of the run-config schema; NULL or "{}" picks the
   system's default barrier. */
RECBF_API recbf_status recbf_barrier_create(const recbf_system* sys, const char* json, recbf_barrier** out);
RECBF_API void recbf_barrier_free(recbf_barrier* barrier);
/* Writes h(x), L_f h(x) and the m entries of L_g h(x); lf and lg may be NULL. */
RECBF_API recbf_status recbf_barrier_eval(const recbf_barrier* barrier, const double* x, size_t n, double* h,
                                          double* lf, double* lg, size_t m);
/* Safe-set membership value: h, or min psi_i for HOCBF chains. */
RECBF_API recbf_status recbf_barrier_set_value(const recbf_barrier* barrier, const double* x, size_t n,
                                               double* value);
RECBF_API recbf_status recbf_barrier_psi(const recbf_barrier* barrier, const double* x, size_t n,
                                         double* value);

RECBF_API recbf_filter_options recbf_filter_default_options(void);
/* Min-norm correction of u_nom; u_out has m entries, result may be NULL. */
RECBF_API recbf_status recbf_filter(const recbf_barrier* barrier, const recbf_filter_options* options,
                                    const double* x, size_t n, const double* u_nom, size_t m, double* u_out,
                                    recbf_filter_result* result);

/* Command entry points. out_root NULL means $RECBF_OUT, then the config's
   "output". jobs < 1 means 1. The return value is a process exit code. */
RECBF_API int recbf_cmd_simulate(const char* config_path, const char* out_root, int jobs);
RECBF_API int recbf_cmd_verify(const char* config_path, const char* out_root, int jobs);
RECBF_API int recbf_cmd_levelset(const char* config_path, const char* out_root, int jobs);
RECBF_API int recbf_cmd_reproduce(const char* experiment, const char* out_root, int jobs);
/* Newline-separated names of the pinned experiments. */
RECBF_API const char* recbf_experiment_names(void);

#ifdef __cplusplus
}
#endif

#endif
