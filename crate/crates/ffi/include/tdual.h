#ifndef TDUAL_H
#define TDUAL_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum TdStatus {
  TD_STATUS_OK = 0,
  TD_STATUS_NULL_POINTER = 1,
  TD_STATUS_INVALID_ARGUMENT = 2,
  TD_STATUS_DIMENSION = 3,
  TD_STATUS_SUPPORT = 4,
  TD_STATUS_POSITIVITY = 5,
  TD_STATUS_NORMALIZATION = 6,
  TD_STATUS_NOT_INVARIANT = 7,
  TD_STATUS_REDUCIBLE = 8,
  TD_STATUS_CONVERGENCE = 9,
  TD_STATUS_PANIC = 10,
} TdStatus;

/**
 * Opaque handle to a transfer operator over a system.
 */
typedef struct TdOperator TdOperator;

/**
 * Opaque handle to a finite dynamical system.
 */
typedef struct TdSystem TdSystem;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *td_version(void);

/**
 * Message of the last failed call on this thread, or NULL. The pointer is
 * valid until the next failing call on the same thread.
 */
const char *td_last_error_message(void);

/**
 * Creates the system `x -> alpha[x]` on `n` points.
 *
 * # Safety
 * `alpha` must point to `n` readable values; `out` must be writable.
 */
enum TdStatus td_system_new(const size_t *alpha, size_t n, struct TdSystem **out);

/**
 * # Safety
 * `sys` must come from [`td_system_new`] and not be used afterwards. NULL is ignored.
 */
void td_system_free(struct TdSystem *sys);

/**
 * Number of points of a system, or 0 for NULL.
 *
 * # Safety
 * `sys` must be NULL or a live handle.
 */
size_t td_system_n_points(const struct TdSystem *sys);

/**
 * Creates an operator from `len` triplets `(xs[i], ys[i], values[i])`.
 * The system is copied; `sys` stays owned by the caller.
 *
 * # Safety
 * The three arrays must hold `len` values; `sys` must be a live handle.
 */
enum TdStatus td_operator_new(const struct TdSystem *sys,
                              const size_t *xs,
                              const size_t *ys,
                              const double *values,
                              size_t len,
                              struct TdOperator **out);

/**
 * # Safety
 * `op` must come from [`td_operator_new`] and not be used afterwards. NULL is ignored.
 */
void td_operator_free(struct TdOperator *op);

/**
 * Log spectral radius of the operator twisted by `phi`.
 *
 * # Safety
 * `phi` must hold `n` values; `out_lambda` must be writable.
 */
enum TdStatus td_spectral_potential(const struct TdOperator *op,
                                    const double *phi,
                                    size_t n,
                                    double tol,
                                    double *out_lambda);

/**
 * Equilibrium measure at `phi`, written to `out_weights` (`n` values).
 *
 * # Safety
 * `phi` and `out_weights` must hold `n` values.
 */
enum TdStatus td_gibbs_gradient(const struct TdOperator *op,
                                const double *phi,
                                size_t n,
                                double tol,
                                double *out_weights);

/**
 * t-entropy by minimizing `lambda(phi) - mu[phi]`. When `out_witness` is
 * not NULL it receives the minimizing (or divergence) potential, `n` values.
 *
 * # Safety
 * `mu` must hold `n` values; `out_witness` is NULL or holds `n` values.
 */
enum TdStatus td_tau_legendre(const struct TdOperator *op,
                              const double *mu,
                              size_t n,
                              double *out_tau,
                              double *out_witness);

/**
 * t-entropy by the partition formula over the point partition, `n <= n_max`.
 *
 * # Safety
 * `mu` must hold `n` values; `out_tau` must be writable.
 */
enum TdStatus td_tau_direct(const struct TdOperator *op,
                            const double *mu,
                            size_t n,
                            size_t n_max,
                            double *out_tau);

/**
 * `lambda(phi) - tau(mu*) - mu*[phi]` at the equilibrium measure `mu*`.
 * `out_pass` (may be NULL) receives 1 when the gap is within `tol`, else 0.
 *
 * # Safety
 * `phi` must hold `n` values; `out_gap` must be writable.
 */
enum TdStatus td_duality_gap(const struct TdOperator *op,
                             const double *phi,
                             size_t n,
                             double tol,
                             double *out_gap,
                             int32_t *out_pass);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TDUAL_H */
