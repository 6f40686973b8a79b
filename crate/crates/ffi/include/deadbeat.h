#ifndef DEADBEAT_H
#define DEADBEAT_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum {
  DEADBEAT_STATUS_OK = 0,
  DEADBEAT_STATUS_NULL_POINTER = 1,
  DEADBEAT_STATUS_INVALID_INPUT = 2,
  DEADBEAT_STATUS_NUMERICAL_FAILURE = 3,
  DEADBEAT_STATUS_SINGULAR_A = 4,
  DEADBEAT_STATUS_UNCONTROLLABLE = 5,
  DEADBEAT_STATUS_UNSUPPORTED_INPUT_WIDTH = 6,
  DEADBEAT_STATUS_NOT_CONTROLLABLE = 7,
  DEADBEAT_STATUS_DOMAIN_VIOLATION = 8,
  DEADBEAT_STATUS_DIVERGED = 9,
  DEADBEAT_STATUS_NOT_NILPOTENT = 10,
  DEADBEAT_STATUS_INTERNAL = 11,
  DEADBEAT_STATUS_PANIC = 12,
} DeadbeatStatus;

/**
 * Plant form: `x⁺ = A(x + Bu)` or `x⁺ = Ax + Bu`.
 */
typedef enum {
  DEADBEAT_FORM_FACTORED = 0,
  DEADBEAT_FORM_STANDARD = 1,
} DeadbeatForm;

typedef enum {
  DEADBEAT_DEMO_HOMOGENEOUS = 0,
  DEADBEAT_DEMO_POSITIVE = 1,
} DeadbeatDemo;

/**
 * Opaque linear system handle.
 */
typedef struct DeadbeatSystem DeadbeatSystem;

/**
 * Opaque set-intersection tracker handle.
 */
typedef struct DeadbeatTracker DeadbeatTracker;

typedef struct {
  double rank_rel;
  double residual_rel;
} DeadbeatTolerance;

typedef struct {
  bool pbh_pass;
  bool geometric_pass;
  bool has_failing_eigenvalue;
  double failing_re;
  double failing_im;
  /**
   * Deadbeat horizon `p` of the subspace chain; 0 if it never fills ℝⁿ.
   */
  size_t horizon;
} DeadbeatReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Default tolerances.
 */
DeadbeatTolerance deadbeat_tolerance_default(void);

/**
 * Copies the calling thread's last error message into `buf` (NUL
 * terminated, truncated to `len`). Returns the full message length in bytes,
 * excluding the terminator; empty after a successful call.
 *
 * # Safety
 * `buf` must be null or valid for `len` bytes.
 */
size_t deadbeat_last_error_message(char *buf, size_t len);

/**
 * Creates a system from row-major `A` (`n × n`) and `B` (`n × m`).
 *
 * # Safety
 * `a` must point to `n*n` doubles, `b` to `n*m` doubles, `out` to writable
 * storage for one pointer.
 */
DeadbeatStatus deadbeat_system_new(const double *a,
                                   const double *b,
                                   size_t n,
                                   size_t m,
                                   DeadbeatForm form,
                                   DeadbeatSystem **out);

/**
 * Releases a system. Null is ignored.
 *
 * # Safety
 * `sys` must be null or a handle from [`deadbeat_system_new`] not yet freed.
 */
void deadbeat_system_free(DeadbeatSystem *sys);

/**
 * State dimension `n`; 0 for a null handle.
 *
 * # Safety
 * `sys` must be null or a live handle.
 */
size_t deadbeat_system_state_dim(const DeadbeatSystem *sys);

/**
 * Input dimension `m`; 0 for a null handle.
 *
 * # Safety
 * `sys` must be null or a live handle.
 */
size_t deadbeat_system_input_dim(const DeadbeatSystem *sys);

/**
 * PBH and subspace-chain controllability tests. `tol` may be null for
 * defaults.
 *
 * # Safety
 * Pointers must be null or valid; `out` must be writable.
 */
DeadbeatStatus deadbeat_check(const DeadbeatSystem *sys,
                              const DeadbeatTolerance *tol,
                              DeadbeatReport *out);

/**
 * Scalar-input deadbeat gain. Writes `K₂` and `K = K₂A` (each `n` doubles)
 * and the nilpotency residual. `k` and `residual` may be null.
 *
 * # Safety
 * `k2` (and `k` if non-null) must be writable for `len` doubles.
 */
DeadbeatStatus deadbeat_gain(const DeadbeatSystem *sys,
                             bool dual,
                             const DeadbeatTolerance *tol,
                             double *k2,
                             double *k,
                             size_t len,
                             double *residual);

/**
 * Builds the set-intersection tracker for a factored-form system.
 *
 * # Safety
 * `sys` must be a live handle and `out` writable.
 */
DeadbeatStatus deadbeat_tracker_new(const DeadbeatSystem *sys,
                                    const DeadbeatTolerance *tol,
                                    DeadbeatTracker **out);

/**
 * Releases a tracker. Null is ignored.
 *
 * # Safety
 * `tracker` must be null or a handle from [`deadbeat_tracker_new`] not yet
 * freed.
 */
void deadbeat_tracker_free(DeadbeatTracker *tracker);

/**
 * Deadbeat horizon `p`; 0 for a null handle.
 *
 * # Safety
 * `tracker` must be null or a live handle.
 */
size_t deadbeat_tracker_horizon(const DeadbeatTracker *tracker);

/**
 * One tracker step `x̂⁺ = g(x̂, x)`; all buffers hold `n` doubles.
 *
 * # Safety
 * `xhat`, `x` must be readable and `out` writable for `n` doubles.
 */
DeadbeatStatus deadbeat_tracker_step(const DeadbeatTracker *tracker,
                                     const double *xhat,
                                     const double *x,
                                     size_t n,
                                     double *out);

/**
 * Closed-form tracker step of a nonlinear demo plant (3 doubles each).
 *
 * # Safety
 * `xhat`, `x` must be readable and `out` writable for 3 doubles.
 */
DeadbeatStatus deadbeat_demo_step(DeadbeatDemo which,
                                  const double *xhat,
                                  const double *x,
                                  double *out);

/**
 * Plant map `f(x)` of a nonlinear demo.
 *
 * # Safety
 * `x` must be readable and `out` writable for 3 doubles.
 */
DeadbeatStatus deadbeat_demo_f(DeadbeatDemo which, const double *x, double *out);

/**
 * Feedback `u = κ(x̂, x)` of a nonlinear demo.
 *
 * # Safety
 * `xhat`, `x` must be readable for 3 doubles; `u` writable.
 */
DeadbeatStatus deadbeat_demo_kappa(DeadbeatDemo which,
                                   const double *xhat,
                                   const double *x,
                                   double *u);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DEADBEAT_H */
