#ifndef EDM_LOCATE_H
#define EDM_LOCATE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum LocStatus {
  LOC_STATUS_OK = 0,
  LOC_STATUS_NULL_POINTER = 1,
  LOC_STATUS_INVALID_ARGUMENT = 2,
  LOC_STATUS_TOO_FEW_ANCHORS = 3,
  LOC_STATUS_DIMENSION_MISMATCH = 4,
  LOC_STATUS_NUMERICAL_FAILURE = 5,
  LOC_STATUS_PARSE = 6,
  LOC_STATUS_BUFFER_TOO_SMALL = 7,
  LOC_STATUS_PANIC = 99,
} LocStatus;

/**
 * Exposing vector of the anchor face.
 */
typedef struct LocCertificate LocCertificate;

/**
 * A localization problem built from anchors and measured ranges.
 */
typedef struct LocInstance LocInstance;

/**
 * Solver output together with the recovered source.
 */
typedef struct LocSolution LocSolution;

/**
 * Solver parameters. Start from [`loc_solver_config_default`].
 */
typedef struct LocSolverConfig {
  double rho;
  double tol;
  uintptr_t max_iter;
  uintptr_t rank;
} LocSolverConfig;

/**
 * Scalar results of a solve. `err` and `c_re` are NaN when the instance
 * carries no true source.
 */
typedef struct LocSummary {
  double err;
  double c_re;
  double eigenratio;
  double f;
  double g;
  double runtime_seconds;
  uintptr_t iterations;
  bool converged;
} LocSummary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the calling thread's last error message into `buf` (NUL
 * terminated, truncated to `len`). Returns the full message length plus one,
 * or 0 when there is no message.
 *
 * # Safety
 * `buf` must be null or valid for `len` bytes.
 */
uintptr_t loc_last_error_message(char *buf, uintptr_t len);

/**
 * Library version as a static NUL-terminated string.
 */
const char *loc_version(void);

/**
 * Builds an instance from `n` anchors in `r` dimensions (`anchors` is
 * `n × r` row-major) and `n` measured ranges. `true_source` may be null;
 * otherwise it holds `r` values and enables the error metrics.
 *
 * # Safety
 * Pointers must be valid for the stated lengths; `out` must be writable.
 */
enum LocStatus loc_instance_new(const double *anchors,
                                uintptr_t n,
                                uintptr_t r,
                                const double *ranges,
                                const double *true_source,
                                struct LocInstance **out);

/**
 * Parses an instance from JSON with fields `r`, `anchors`, `delta` and
 * optional `true_source`.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be writable.
 */
enum LocStatus loc_instance_from_json(const char *json, struct LocInstance **out);

/**
 * Number of anchors, or 0 for a null handle.
 *
 * # Safety
 * `inst` must be null or a live handle.
 */
uintptr_t loc_instance_anchor_count(const struct LocInstance *inst);

/**
 * # Safety
 * `inst` must be null or a handle from `loc_instance_new` /
 * `loc_instance_from_json` not yet freed.
 */
void loc_instance_free(struct LocInstance *inst);

/**
 * Computes the exposing vector for the instance's anchors.
 *
 * # Safety
 * `inst` must be a live handle; `out` must be writable.
 */
enum LocStatus loc_certificate_new(const struct LocInstance *inst, struct LocCertificate **out);

/**
 * Side length of `H` (`n + 1`), or 0 for a null handle.
 *
 * # Safety
 * `cert` must be null or a live handle.
 */
uintptr_t loc_certificate_dim(const struct LocCertificate *cert);

/**
 * Dimension of the Gale space, `n − 1 − rank`.
 *
 * # Safety
 * `cert` must be null or a live handle.
 */
uintptr_t loc_certificate_gale_dim(const struct LocCertificate *cert);

/**
 * Writes `H` row-major into `out`, which must hold `dim²` values.
 *
 * # Safety
 * `cert` must be a live handle; `out` must be valid for `len` doubles.
 */
enum LocStatus loc_certificate_h(const struct LocCertificate *cert, double *out, uintptr_t len);

/**
 * # Safety
 * `cert` must be null or a handle from `loc_certificate_new` not yet freed.
 */
void loc_certificate_free(struct LocCertificate *cert);

/**
 * Default parameters for embedding dimension `rank`.
 */
struct LocSolverConfig loc_solver_config_default(uintptr_t rank);

/**
 * Runs the full pipeline. A null `cfg` means the defaults for the
 * instance's dimension.
 *
 * # Safety
 * `inst` must be a live handle and `out` writable; `cfg` may be null.
 */
enum LocStatus loc_solve(const struct LocInstance *inst,
                         const struct LocSolverConfig *cfg,
                         struct LocSolution **out);

/**
 * Recovered source coordinates; `out` must hold `r` values.
 *
 * # Safety
 * `sol` must be a live handle; `out` must be valid for `len` doubles.
 */
enum LocStatus loc_solution_source(const struct LocSolution *sol, double *out, uintptr_t len);

/**
 * Final matrix `D` row-major; `out` must hold `(n + 1)²` values.
 *
 * # Safety
 * `sol` must be a live handle; `out` must be valid for `len` doubles.
 */
enum LocStatus loc_solution_matrix(const struct LocSolution *sol, double *out, uintptr_t len);

/**
 * # Safety
 * `sol` must be a live handle; `out` must be writable.
 */
enum LocStatus loc_solution_summary(const struct LocSolution *sol, struct LocSummary *out);

/**
 * # Safety
 * `sol` must be null or a handle from `loc_solve` not yet freed.
 */
void loc_solution_free(struct LocSolution *sol);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* EDM_LOCATE_H */
