#ifndef NGSTATE_H
#define NGSTATE_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum NgsRegime {
  NGS_REGIME_MONOTONE = 0,
  NGS_REGIME_PEAKED = 1,
} NgsRegime;

typedef enum NgsStatus {
  NGS_STATUS_OK = 0,
  NGS_STATUS_NULL_POINTER = 1,
  NGS_STATUS_DOMAIN = 2,
  NGS_STATUS_INVALID_CONFIG = 3,
  NGS_STATUS_UNREACHABLE = 4,
  NGS_STATUS_REGIME = 5,
  NGS_STATUS_NOT_CONVERGED = 6,
  NGS_STATUS_NUMERICAL = 7,
  NGS_STATUS_PANIC = 8,
} NgsStatus;

// Opaque reduced state `(n, x)`.
typedef struct NgsState NgsState;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failed call on this thread, or NULL. The pointer stays
// valid until the next failing call on the same thread.
const char *ngs_last_error(void);

// Library version as a static NUL-terminated string.
const char *ngs_version(void);

// # Safety
// `out` must be a valid pointer to writable storage for one handle.
enum NgsStatus ngs_state_new(double n, double x, struct NgsState **out);

// State at occupation `n` whose `C4/2F^2` equals `c4_ratio`.
//
// # Safety
// `out` must be a valid pointer to writable storage for one handle.
enum NgsStatus ngs_state_from_c4(double n, double c4_ratio, struct NgsState **out);

// # Safety
// `state` must be NULL or a handle from this library that has not been freed.
void ngs_state_free(struct NgsState *state);

// # Safety
// `state` must be a live handle; `n` and `x` may be NULL.
enum NgsStatus ngs_state_params(const struct NgsState *state, double *n, double *x);

// `C4 / 2F^2`.
//
// # Safety
// `state` must be a live handle and `out` writable.
enum NgsStatus ngs_c4_ratio(const struct NgsState *state, double *out);

// Purity per degree of freedom and its ratio to the Gaussian value; either out-pointer may be NULL.
//
// # Safety
// `state` must be a live handle.
enum NgsStatus ngs_purity(const struct NgsState *state, double *p, double *ratio);

// Entropy per degree of freedom, which depends on `n` only.
//
// # Safety
// `out` must be writable.
enum NgsStatus ngs_entropy_per_dof(double n, double *out);

// # Safety
// `state` must be a live handle and `out` writable.
enum NgsStatus ngs_regime(const struct NgsState *state, enum NgsRegime *out);

// `(1/N) ln d` at the scaled point `(u^2, v^2)`.
//
// # Safety
// `state` must be a live handle and `out` writable.
enum NgsStatus ngs_ln_d(const struct NgsState *state, double u_sq, double v_sq, double *out);

// Peak position and widths of `d` in the peaked regime; fails with `Regime` otherwise.
//
// # Safety
// `state` must be a live handle; the out-pointers must be writable.
enum NgsStatus ngs_peak(const struct NgsState *state,
                        double *u0,
                        double *delta_u_sq,
                        double *delta_v_sq);

// Large-N `(1/N) ln w` at `(u^2, r^2)` with default settings. On
// `NotConverged` the value and spread are still written.
//
// # Safety
// `state` must be a live handle; `value` must be writable and `spread` may be NULL.
enum NgsStatus ngs_ln_w(const struct NgsState *state,
                        double u_sq,
                        double r_sq,
                        double *value,
                        double *spread);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* NGSTATE_H */
