#ifndef SLPROJ_H
#define SLPROJ_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum SlprojStatus {
  SLPROJ_STATUS_OK = 0,
  SLPROJ_STATUS_NULL_POINTER = 1,
  SLPROJ_STATUS_INVALID_ARGUMENT = 2,
  SLPROJ_STATUS_SHAPE = 3,
  SLPROJ_STATUS_NON_FINITE = 4,
  SLPROJ_STATUS_SINGULAR_INPUT = 5,
  SLPROJ_STATUS_ILL_POSED = 6,
  SLPROJ_STATUS_DEGENERATE = 7,
  SLPROJ_STATUS_NUMERICAL = 8,
  SLPROJ_STATUS_PANIC = 9,
} SlprojStatus;

typedef enum SlprojSolverStatus {
  SLPROJ_SOLVER_STATUS_CONVERGED = 0,
  SLPROJ_SOLVER_STATUS_MAX_ITERATIONS = 1,
  SLPROJ_SOLVER_STATUS_SINGULAR_HESSIAN = 2,
  SLPROJ_SOLVER_STATUS_NO_BRACKET = 3,
  SLPROJ_SOLVER_STATUS_DIVERGED = 4,
} SlprojSolverStatus;

typedef enum SlprojAlgorithm {
  /**
   * Newton in log coordinates, bisection if it fails or stops at a saddle.
   */
  SLPROJ_ALGORITHM_AUTO = 0,
  SLPROJ_ALGORITHM_BISECTION = 1,
  SLPROJ_ALGORITHM_COMPOSITE = 2,
  SLPROJ_ALGORITHM_NEWTON_HYP = 3,
  SLPROJ_ALGORITHM_NEWTON_LOG = 4,
} SlprojAlgorithm;

/**
 * Opaque square matrix.
 */
typedef struct SlprojMatrix SlprojMatrix;

/**
 * Opaque projection result.
 */
typedef struct SlprojProjection SlprojProjection;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *slproj_version(void);

/**
 * Message of the last failed call on this thread. Valid until the next call
 * that fails on the same thread.
 */
const char *slproj_last_error(void);

/**
 * Creates an `n x n` matrix from `n * n` row-major values.
 *
 * # Safety
 * `data` must point to `n * n` readable doubles and `out` must be writable.
 */
enum SlprojStatus slproj_matrix_new(size_t n, const double *data, struct SlprojMatrix **out);

/**
 * # Safety
 * `m` must be null or a handle from this library that has not been freed.
 */
void slproj_matrix_free(struct SlprojMatrix *m);

/**
 * Dimension `n`, or 0 for a null handle.
 *
 * # Safety
 * `m` must be null or a live handle.
 */
size_t slproj_matrix_dim(const struct SlprojMatrix *m);

/**
 * Copies the row-major entries into `out`, which holds `len >= n * n` doubles.
 *
 * # Safety
 * `m` must be a live handle and `out` must point to `len` writable doubles.
 */
enum SlprojStatus slproj_matrix_copy(const struct SlprojMatrix *m, double *out, size_t len);

/**
 * Projects `a` onto `SL(n)` with the solver `alg` (an `SlprojAlgorithm`
 * value). `tol = 0` and `max_iter = 0` select the defaults.
 *
 * A solver that stops without converging still yields a result; inspect
 * [`slproj_projection_status`].
 *
 * # Safety
 * `a` must be a live matrix handle and `out` writable.
 */
enum SlprojStatus slproj_project(const struct SlprojMatrix *a,
                                 uint32_t alg,
                                 double tol,
                                 size_t max_iter,
                                 struct SlprojProjection **out);

/**
 * # Safety
 * `p` must be null or a live projection handle.
 */
void slproj_projection_free(struct SlprojProjection *p);

/**
 * New matrix handle holding the projection `P`.
 *
 * # Safety
 * `p` must be a live projection handle and `out` writable.
 */
enum SlprojStatus slproj_projection_matrix(const struct SlprojProjection *p,
                                           struct SlprojMatrix **out);

/**
 * Copies the projected singular values (`n` doubles) into `out`.
 *
 * # Safety
 * `p` must be a live projection handle and `out` must hold `len` doubles.
 */
enum SlprojStatus slproj_projection_diag(const struct SlprojProjection *p, double *out, size_t len);

/**
 * Lagrange multiplier, or NaN for a null handle.
 *
 * # Safety
 * `p` must be null or a live projection handle.
 */
double slproj_projection_lambda(const struct SlprojProjection *p);

/**
 * `1/2 |A - P|_F^2`, or NaN for a null handle.
 *
 * # Safety
 * `p` must be null or a live projection handle.
 */
double slproj_projection_distance(const struct SlprojProjection *p);

/**
 * # Safety
 * `p` must be null or a live projection handle.
 */
size_t slproj_projection_iterations(const struct SlprojProjection *p);

/**
 * # Safety
 * `p` must be a live projection handle.
 */
enum SlprojSolverStatus slproj_projection_status(const struct SlprojProjection *p);

/**
 * Algorithm that produced the result (never `SLPROJ_ALGORITHM_AUTO`).
 *
 * # Safety
 * `p` must be a live projection handle.
 */
enum SlprojAlgorithm slproj_projection_algorithm(const struct SlprojProjection *p);

/**
 * Derivative of the projection of `a` (already projected into `proj`) in
 * direction `direction`. Writes a new matrix handle for `dP` and `d_lambda`.
 *
 * # Safety
 * All handles must be live; `out_dp` and `out_dlambda` writable.
 */
enum SlprojStatus slproj_derivative(const struct SlprojMatrix *a,
                                    const struct SlprojProjection *proj,
                                    const struct SlprojMatrix *direction,
                                    struct SlprojMatrix **out_dp,
                                    double *out_dlambda);

/**
 * Solves the diagonal problem for a non-increasing, non-negative `a` of
 * length `n` with the solver `alg` (an `SlprojAlgorithm` value).
 *
 * # Safety
 * `a` must hold `n` readable doubles, `p_out` `n` writable doubles;
 * `lambda_out` and `status_out` must be writable.
 */
enum SlprojStatus slproj_project_spectrum(const double *a,
                                          size_t n,
                                          uint32_t alg,
                                          double *p_out,
                                          double *lambda_out,
                                          enum SlprojSolverStatus *status_out);

/**
 * Length of the message returned by [`slproj_last_error`], excluding the NUL.
 */
size_t slproj_last_error_length(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SLPROJ_H */
