#ifndef HALFSPACE_H
#define HALFSPACE_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Classification of a finished run.
 */
typedef enum HsRunStatus {
  /**
   * The handle was null (see `hs_last_error`).
   */
  HsRunInvalid = -1,
  HsRunBlewUp = 0,
  HsRunDecayed = 1,
  HsRunUndecided = 2,
} HsRunStatus;

/**
 * Outcome of an `hs_*` call that does not return a pointer.
 */
typedef enum HsStatus {
  HsOk = 0,
  /**
   * A required pointer argument was null.
   */
  HsErrNullArg = 1,
  /**
   * Arguments were structurally invalid (bad index, non-UTF-8 string).
   */
  HsErrInvalidArg = 2,
  /**
   * The spec or the parameters were rejected.
   */
  HsErrConfig = 3,
  /**
   * The computation failed numerically.
   */
  HsErrNumerics = 4,
  /**
   * File access failed.
   */
  HsErrIo = 5,
  /**
   * An internal panic was contained.
   */
  HsErrPanic = 6,
} HsStatus;

/**
 * Parsed and materialized run spec. Opaque.
 */
typedef struct HsConfig HsConfig;

/**
 * Finished run. Opaque.
 */
typedef struct HsResult HsResult;

/**
 * One scalar sample of a run's history.
 */
typedef struct HsRecord {
  double t;
  double sup_norm;
  /**
   * Half-space first moment.
   */
  double m1;
  /**
   * Value at the moving probe; NaN when the run did not track one.
   */
  double probe_value;
  /**
   * Step size used to leave this state.
   */
  double dt;
} HsRecord;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Last failure message on this thread, or null if the most recent call
 * succeeded. The pointer stays valid until the next `hs_*` call on the
 * same thread; copy it if it must outlive that.
 */
const char *hs_last_error(void);

/**
 * Parse a TOML run spec from memory and materialize it. Relative CSV paths
 * resolve against `base_dir` (or the working directory when null).
 * Returns null on failure; see `hs_last_error`.
 *
 * # Safety
 * `toml_text` must be a valid NUL-terminated string; `base_dir` must be
 * null or a valid NUL-terminated string.
 */
struct HsConfig *hs_config_parse(const char *toml_text, const char *base_dir);

/**
 * Load and materialize a TOML run spec file. Relative CSV paths resolve
 * against the file's directory. Returns null on failure.
 *
 * # Safety
 * `path` must be a valid NUL-terminated string.
 */
struct HsConfig *hs_config_load(const char *path);

/**
 * Release a config handle. Null is a no-op.
 *
 * # Safety
 * `config` must be null or a pointer from `hs_config_parse`/
 * `hs_config_load` that has not been freed.
 */
void hs_config_free(struct HsConfig *config);

/**
 * Run the simulation described by a config handle. The handle stays valid
 * and can be rerun. Returns null on failure.
 *
 * # Safety
 * `config` must be a live pointer from `hs_config_parse`/`hs_config_load`.
 */
struct HsResult *hs_simulate(const struct HsConfig *config);

/**
 * Release a result handle. Null is a no-op.
 *
 * # Safety
 * `result` must be null or a pointer from `hs_simulate` that has not been
 * freed.
 */
void hs_result_free(struct HsResult *result);

/**
 * Classification of the run.
 *
 * # Safety
 * `result` must be null or a live pointer from `hs_simulate`.
 */
enum HsRunStatus hs_result_status(const struct HsResult *result);

/**
 * Extrapolated singular time; NaN unless the run blew up.
 *
 * # Safety
 * `result` must be null or a live pointer from `hs_simulate`.
 */
double hs_result_t_star(const struct HsResult *result);

/**
 * Fitted sup-norm decay slope; NaN unless the run decayed.
 *
 * # Safety
 * `result` must be null or a live pointer from `hs_simulate`.
 */
double hs_result_fitted_rate(const struct HsResult *result);

/**
 * Time the run ended (threshold crossing or horizon). NaN on null.
 *
 * # Safety
 * `result` must be null or a live pointer from `hs_simulate`.
 */
double hs_result_t_final(const struct HsResult *result);

/**
 * Number of recorded history samples. Zero on null.
 *
 * # Safety
 * `result` must be null or a live pointer from `hs_simulate`.
 */
uintptr_t hs_result_record_count(const struct HsResult *result);

/**
 * Copy history sample `index` into `out`.
 *
 * # Safety
 * `result` must be a live pointer from `hs_simulate`; `out` must point to
 * writable memory for one `HsRecord`.
 */
enum HsStatus hs_result_record(const struct HsResult *result,
                               uintptr_t index,
                               struct HsRecord *out);

/**
 * Serialize the run (status, diagnostics, history, spec echo) as a JSON
 * document. Returns a heap string to release with `hs_string_free`, or
 * null on failure.
 *
 * # Safety
 * `result` must be a live pointer from `hs_simulate`.
 */
char *hs_result_to_json(const struct HsResult *result);

/**
 * Release a string returned by `hs_result_to_json`. Null is a no-op.
 *
 * # Safety
 * `s` must be null or a pointer from `hs_result_to_json` that has not been
 * freed.
 */
void hs_string_free(char *s);

/**
 * Critical exponent `1 + beta / (dim + 1)` in the `u^p` normalization;
 * the threshold for `alpha` in `|u|^alpha u` is this minus one. NaN on bad
 * arguments.
 */
double hs_fujita_exponent(double beta, uintptr_t dim);

/**
 * Data-norm smallness threshold of the global regime for decay constant
 * `c_decay`; written to `out`.
 *
 * # Safety
 * `out` must point to writable memory for one double.
 */
enum HsStatus hs_epsilon_star(double alpha,
                              double beta,
                              uintptr_t dim,
                              double c_decay,
                              double *out);

/**
 * Probe-plateau constant `C1(gamma)` for the symbol expansion
 * `1 - a |xi|^beta`; written to `out`.
 *
 * # Safety
 * `out` must point to writable memory for one double.
 */
enum HsStatus hs_compute_c1(double a, double beta, uintptr_t dim, double gamma, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HALFSPACE_H */
