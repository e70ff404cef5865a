#ifndef PHASEFIELD_LAB_H
#define PHASEFIELD_LAB_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum PflabStatus {
  PFLAB_STATUS_OK = 0,
  PFLAB_STATUS_NULL_POINTER = 1,
  PFLAB_STATUS_INVALID_UTF8 = 2,
  PFLAB_STATUS_CONFIG = 3,
  /**
   * The state became non-finite or a cell left the simplex.
   */
  PFLAB_STATUS_NUMERICAL = 4,
  /**
   * The RHS-evaluation budget ran out.
   */
  PFLAB_STATUS_BUDGET = 5,
  /**
   * The requested field does not exist.
   */
  PFLAB_STATUS_NOT_FOUND = 6,
  /**
   * The output buffer is smaller than the data; the needed length is
   * still reported.
   */
  PFLAB_STATUS_BUFFER_TOO_SMALL = 7,
  PFLAB_STATUS_SETUP = 8,
  PFLAB_STATUS_PANIC = 9,
} PflabStatus;

/**
 * The outcome of a finished run.
 */
typedef struct PflabReport PflabReport;

/**
 * A configured run.
 */
typedef struct PflabRun PflabRun;

typedef struct PflabSummary {
  double reference;
  double measured;
  double error;
  double relative_error;
  uint64_t rhs_evals;
  uint64_t accepted;
  uint64_t rejected;
  double dt_e;
  double final_time;
  /**
   * 1 when an equilibrium run met its criterion, 0 when it hit the time
   * cap, -1 for fixed-horizon runs.
   */
  int32_t converged;
} PflabSummary;

typedef struct PflabFrame {
  double time;
  double observable;
  double energy;
} PflabFrame;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread; empty after a success.
 * Valid until the next call into this library on the same thread.
 */
const char *pflab_last_error(void);

const char *pflab_status_str(enum PflabStatus status);

const char *pflab_version(void);

/**
 * Creates a run of `benchmark` ("embedding", "triple-junction",
 * "single-grain" or "stefan") with default settings.
 *
 * # Safety
 * `benchmark` must be a NUL-terminated string and `out` a valid pointer.
 */
enum PflabStatus pflab_run_new(const char *benchmark, struct PflabRun **out);

/**
 * Sets a configuration key, using the same keys and values as the
 * configuration file (`integrator`, `dt_factor`, `tol_phi_abs`, `dx`,
 * `end_time`, `budget`, ...).
 *
 * # Safety
 * `run` must come from `pflab_run_new`; `key` and `value` must be
 * NUL-terminated strings.
 */
enum PflabStatus pflab_run_set(struct PflabRun *run, const char *key, const char *value);

/**
 * # Safety
 * `run` must come from `pflab_run_new` or be null.
 */
void pflab_run_free(struct PflabRun *run);

/**
 * Executes the run to its termination rule.
 *
 * # Safety
 * `run` must come from `pflab_run_new`; `out` must be a valid pointer.
 */
enum PflabStatus pflab_run_execute(const struct PflabRun *run, struct PflabReport **out);

/**
 * # Safety
 * `report` must come from `pflab_run_execute`; `out` must be valid.
 */
enum PflabStatus pflab_report_summary(const struct PflabReport *report, struct PflabSummary *out);

/**
 * Copies up to `len` output frames into `buf` and stores the total count
 * in `count`. `buf` may be null when `len` is 0.
 *
 * # Safety
 * `report` must come from `pflab_run_execute`; `buf` must hold `len`
 * frames; `count` must be valid.
 */
enum PflabStatus pflab_report_frames(const struct PflabReport *report,
                                     struct PflabFrame *buf,
                                     size_t len,
                                     size_t *count);

/**
 * Copies the final field `name` ("phi0", "phi1", ..., "c") into `buf`,
 * first axis fastest, and stores the cell count in `count`.
 *
 * # Safety
 * `report` must come from `pflab_run_execute`; `name` must be a
 * NUL-terminated string; `buf` must hold `len` doubles; `count` valid.
 */
enum PflabStatus pflab_report_field(const struct PflabReport *report,
                                    const char *name,
                                    double *buf,
                                    size_t len,
                                    size_t *count);

/**
 * Grid extents of the final fields; unused trailing entries are 0.
 *
 * # Safety
 * `report` must come from `pflab_run_execute`; `extents` must hold 3
 * values.
 */
enum PflabStatus pflab_report_extents(const struct PflabReport *report, size_t *extents);

/**
 * # Safety
 * `report` must come from `pflab_run_execute` or be null.
 */
void pflab_report_free(struct PflabReport *report);

/**
 * Equilibrium dihedral angle (radians) of a lens on a grain boundary.
 *
 * # Safety
 * `out` must be valid.
 */
enum PflabStatus pflab_theta_eq(double gamma_gb, double gamma_ab, double *out);

/**
 * Planar Stefan growth constant `A` with `X(t) = A sqrt(t)`.
 *
 * # Safety
 * `out` must be valid.
 */
enum PflabStatus pflab_stefan_growth_constant(double diffusivity,
                                              double c_alpha,
                                              double c_beta,
                                              double c_alpha_beta,
                                              double c_beta_alpha,
                                              double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PHASEFIELD_LAB_H */
