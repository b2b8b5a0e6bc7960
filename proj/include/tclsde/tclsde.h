/*
 * tclsde C API.
 *
 * Opaque handles own their resources and are released with the matching
 * *_destroy call. Every fallible function returns a tclsde_status; on
 * failure, tclsde_last_error() describes the problem for the calling thread.
 */
#ifndef TCLSDE_TCLSDE_H
#define TCLSDE_TCLSDE_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(TCLSDE_BUILDING_LIBRARY)
#    define TCLSDE_API __declspec(dllexport)
#  else
#    define TCLSDE_API __declspec(dllimport)
#  endif
#else
#  define TCLSDE_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum tclsde_status {
  TCLSDE_OK = 0,
  TCLSDE_ERR_INVALID_ARGUMENT = 1,
  TCLSDE_ERR_HORIZON_TOO_SHORT = 2,
  TCLSDE_ERR_QUADRATURE_FAILURE = 3,
  TCLSDE_ERR_NEWTON_DIVERGENCE = 4,
  TCLSDE_ERR_LENGTH_MISMATCH = 5,
  TCLSDE_ERR_INSUFFICIENT_DATA = 6,
  TCLSDE_ERR_PARSE = 7,
  TCLSDE_ERR_VALIDATION = 8,
  TCLSDE_ERR_IO = 9,
  TCLSDE_ERR_TOO_MANY_FAILURES = 10,
  TCLSDE_ERR_INTERNAL = 99
} tclsde_status;

typedef struct tclsde_config tclsde_config;
typedef struct tclsde_report tclsde_report;

typedef enum tclsde_format { TCLSDE_FORMAT_CSV = 0, TCLSDE_FORMAT_JSON = 1 } tclsde_format;

typedef struct tclsde_report_row {
  double delta;
  double estimate;
  double reference;
  double abs_error;
  double std_error;
  uint64_t paths_failed;
} tclsde_report_row;

typedef struct tclsde_laplace_row {
  double lambda;
  double estimate;
  double target;
  double std_error;
} tclsde_laplace_row;

typedef struct tclsde_validation {
  int probes;
  int violations;
  int jacobian_fallback;
  double declared_L;
  double max_lipschitz_ratio;
  double max_jacobian_norm;
  double max_jacobian_rel_error;
} tclsde_validation;

TCLSDE_API const char* tclsde_version(void);
/* Message of the last failure on this thread; empty string if none. */
TCLSDE_API const char* tclsde_last_error(void);
TCLSDE_API const char* tclsde_status_name(tclsde_status status);

/* Configuration documents (key = value text, or a run manifest). */
TCLSDE_API tclsde_status tclsde_config_load_file(const char* path, tclsde_config** out);
TCLSDE_API tclsde_status tclsde_config_load_text(const char* text, tclsde_config** out);
/* Overrides a key, e.g. ("seed", "42"); value uses config-file syntax. */
TCLSDE_API tclsde_status tclsde_config_set(tclsde_config* config, const char* key, const char* value);
TCLSDE_API tclsde_status tclsde_config_validate_experiment(const tclsde_config* config);
TCLSDE_API void tclsde_config_destroy(tclsde_config* config);

/* Weak-order study; threads <= 0 falls back to TCLSDE_THREADS, then 1. */
TCLSDE_API tclsde_status tclsde_weak_order_run(const tclsde_config* config, int threads,
                                               tclsde_report** out);
TCLSDE_API size_t tclsde_report_row_count(const tclsde_report* report);
TCLSDE_API tclsde_status tclsde_report_get_row(const tclsde_report* report, size_t index,
                                           tclsde_report_row* out);
TCLSDE_API double tclsde_report_fitted_order(const tclsde_report* report);
/* 1 when fewer than three rows clear the 3-sigma guard. */
TCLSDE_API int tclsde_report_noise_floor(const tclsde_report* report);
TCLSDE_API double tclsde_report_max_residual(const tclsde_report* report);
/* Number of steps that took `iterations` Newton iterations. */
TCLSDE_API uint64_t tclsde_report_newton_count(const tclsde_report* report, int iterations);
/* path NULL, "" or "-" writes to stdout. */
TCLSDE_API tclsde_status tclsde_report_write(const tclsde_report* report, tclsde_format format,
                                             const char* path);
TCLSDE_API tclsde_status tclsde_report_write_manifest(const tclsde_report* report, const char* path);
TCLSDE_API void tclsde_report_destroy(tclsde_report* report);

/* One time-changed path; CSV "t,x1[,x2]" at the knots D(t_n) and at T. */
TCLSDE_API tclsde_status tclsde_simulate_path(const tclsde_config* config, const char* csv_path);

/* Monte Carlo E[exp(-lambda D(1))] vs exp(-lambda^alpha); out_rows has n entries. */
TCLSDE_API tclsde_status tclsde_subordinator_check(double alpha, int lepage_terms,
                                                   const double* lambdas, size_t n,
                                                   uint64_t paths, uint64_t seed, int threads,
                                                   tclsde_laplace_row* out_rows);

/* Spot-checks the configured model's drift against its declared L and Jacobian. */
TCLSDE_API tclsde_status tclsde_validate_model(const tclsde_config* config, int probes,
                                               uint64_t seed, tclsde_validation* out);
/* Message of violation `index` from the last tclsde_validate_model call on this thread. */
TCLSDE_API const char* tclsde_validation_message(size_t index);

/* Resolves a worker count: explicit > 0, else TCLSDE_THREADS, else 1. */
TCLSDE_API int tclsde_resolve_threads(int requested);

#ifdef __cplusplus
}
#endif

#endif /* TCLSDE_TCLSDE_H */
