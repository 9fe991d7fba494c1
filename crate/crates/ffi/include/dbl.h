#ifndef DBL_H
#define DBL_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result code of every fallible call.
typedef enum DblStatus {
  DBL_STATUS_OK = 0,
  DBL_STATUS_NULL_POINTER = 1,
  DBL_STATUS_INVALID_INPUT = 2,
  DBL_STATUS_NOT_POSITIVE_DEFINITE = 3,
  DBL_STATUS_SINGULAR = 4,
  DBL_STATUS_GAMMA_OUT_OF_RANGE = 5,
  DBL_STATUS_PANIC = 99,
} DblStatus;

// Opaque market: drifts, covariance, risk-free rate and horizon.
typedef struct DblMarket DblMarket;

// Opaque dynamic policy for one view and one risk aversion.
typedef struct DblPolicy DblPolicy;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string.
const char *dbl_version(void);

// Copies the last error message of this thread into `buf` (truncated and
// NUL-terminated when `len > 0`) and returns the full message length.
//
// # Safety
// `buf` must be null or point to `len` writable bytes.
size_t dbl_last_error_message(char *buf, size_t len);

// Creates a market with `n` assets. `mu` has `n` entries and `sigma` holds
// the `n × n` covariance.
//
// # Safety
// Pointers must be valid for the stated sizes; `out` must be writable.
enum DblStatus dbl_market_new(size_t n,
                              const double *mu,
                              const double *sigma,
                              double r_f,
                              double horizon,
                              struct DblMarket **out);

// Releases a market; null is ignored.
//
// # Safety
// `market` must come from [`dbl_market_new`] and not be used afterwards.
void dbl_market_free(struct DblMarket *market);

// Number of assets of a market, 0 for null.
//
// # Safety
// `market` must be null or a live handle.
size_t dbl_market_n_assets(const struct DblMarket *market);

// Writes the view-free constant-coefficient portfolio `Σ⁻¹(μ − r_f)/γ`.
//
// # Safety
// `market` must be live and `out` must hold `n` doubles.
enum DblStatus dbl_market_merton_weights(const struct DblMarket *market, double gamma, double *out);

// Solves the dynamic policy for `k` views `y = P X(T) + ε`, `ε ~ N(0, T Ω)`.
// `pick` is `k × n`, `omega` is the `k × k` noise covariance per unit time
// and `gamma ≥ 1` (1 is log utility).
//
// # Safety
// Pointers must be valid for the stated sizes; `out` must be writable.
enum DblStatus dbl_policy_new(const struct DblMarket *market,
                              size_t k,
                              const double *pick,
                              const double *omega,
                              const double *y,
                              double gamma,
                              struct DblPolicy **out);

// Releases a policy; null is ignored.
//
// # Safety
// `policy` must come from [`dbl_policy_new`] and not be used afterwards.
void dbl_policy_free(struct DblPolicy *policy);

// Risky weights at time `t` and cumulative log-return `x` (`n` entries).
// `out_total` receives mean-variance plus hedging demand; `out_hedging`
// may be null and otherwise receives the hedging part alone.
//
// # Safety
// `policy` must be live; `x` and the outputs must hold `n` doubles.
enum DblStatus dbl_policy_weights(const struct DblPolicy *policy,
                                  double t,
                                  const double *x,
                                  double *out_total,
                                  double *out_hedging);

// Weights of the investor who re-solves the single-period problem at `t`
// with the same view treated as fresh, for comparison.
//
// # Safety
// `policy` must be live; `x` and `out` must hold `n` doubles.
enum DblStatus dbl_policy_rebalancing_weights(const struct DblPolicy *policy,
                                              double t,
                                              const double *x,
                                              double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DBL_H */
