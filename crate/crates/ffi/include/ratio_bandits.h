#ifndef RATIO_BANDITS_H
#define RATIO_BANDITS_H

/* Generated by cbindgen; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum RbStatus {
  RB_STATUS_OK = 0,
  RB_STATUS_NULL_POINTER = 1,
  RB_STATUS_INVALID_ARGUMENT = 2,
  RB_STATUS_PRECONDITION = 3,
  RB_STATUS_NUMERIC = 4,
  RB_STATUS_CONFIG = 5,
  RB_STATUS_IO = 6,
  RB_STATUS_PANIC = 7,
} RbStatus;

typedef enum RbEnvKind {
  RB_ENV_KIND_KARMED = 0,
  RB_ENV_KIND_LINEAR_CONTEXTUAL = 1,
} RbEnvKind;

typedef enum RbPolicyKind {
  RB_POLICY_KIND_TS = 0,
  RB_POLICY_KIND_TSUCB = 1,
  RB_POLICY_KIND_GREEDY = 2,
  RB_POLICY_KIND_UCB = 3,
  RB_POLICY_KIND_IDS = 4,
} RbPolicyKind;

/**
 * K-armed Bernoulli statistics plus the Beta posterior.
 */
typedef struct RbKArm RbKArm;

/**
 * OFUL confidence-set state.
 */
typedef struct RbLinear RbLinear;

/**
 * Normal-inverse-gamma regression posterior.
 */
typedef struct RbNig RbNig;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the calling thread's last error message (NUL-terminated, possibly
 * truncated) into `buf` and returns the full message length in bytes,
 * excluding the terminator. Returns 0 when there is no error.
 *
 * # Safety
 * `buf` must be null or valid for `len` bytes.
 */
size_t rb_last_error(char *buf, size_t len);

/**
 * Ψ = (f̃ − μ̂) / radius.
 *
 * # Safety
 * `out_psi` must be valid for writes.
 */
enum RbStatus rb_psi(double f_tilde, double mu_hat, double radius, double *out_psi);

/**
 * Index of the smallest Ψ over `k` arms; ties go to the lowest index.
 *
 * # Safety
 * `mu_hat` and `radius` must hold `k` values.
 */
enum RbStatus rb_select_arm(double f_tilde,
                            const double *mu_hat,
                            const double *radius,
                            size_t k,
                            size_t *out_arm);

/**
 * Smallest α with `max_a (μ̂ + α·radius) = f̃`.
 *
 * # Safety
 * `mu_hat` and `radius` must hold `k` values.
 */
enum RbStatus rb_dynamic_alpha(double f_tilde,
                               const double *mu_hat,
                               const double *radius,
                               size_t k,
                               double *out_alpha);

/**
 * Creates an OFUL state with `V = I`. `r` is the sub-Gaussian noise scale,
 * `s` bounds ‖θ‖, `l` bounds ‖x‖.
 *
 * # Safety
 * `out_handle` must be valid for writes.
 */
enum RbStatus rb_linear_new(size_t d,
                            double r,
                            double s,
                            double l,
                            double horizon,
                            struct RbLinear **out_handle);

/**
 * # Safety
 * `h` must come from [`rb_linear_new`] and not be used afterwards.
 */
void rb_linear_free(struct RbLinear *h);

/**
 * # Safety
 * `x` must hold `d` values.
 */
enum RbStatus rb_linear_update(struct RbLinear *h, const double *x, size_t d, double y);

/**
 * Bounds of `k` actions (`k x d`); writes `k` values to each output.
 *
 * # Safety
 * `actions` must hold `k·d` values, the outputs `k` each.
 */
enum RbStatus rb_linear_bounds(struct RbLinear *h,
                               const double *actions,
                               size_t k,
                               size_t d,
                               double *out_mu,
                               double *out_radius);

/**
 * TS-UCB choice among `k` actions (`k x d`) for target `f_tilde`.
 *
 * # Safety
 * `actions` must hold `k·d` values.
 */
enum RbStatus rb_linear_select(struct RbLinear *h,
                               double f_tilde,
                               const double *actions,
                               size_t k,
                               size_t d,
                               size_t *out_arm);

/**
 * # Safety
 * `out_handle` must be valid for writes.
 */
enum RbStatus rb_karm_new(size_t arms, uint64_t horizon, struct RbKArm **out_handle);

/**
 * # Safety
 * `h` must come from [`rb_karm_new`] and not be used afterwards.
 */
void rb_karm_free(struct RbKArm *h);

/**
 * Records a reward in `[0, 1]`.
 *
 * # Safety
 * `h` must be a live handle.
 */
enum RbStatus rb_karm_update(struct RbKArm *h, size_t arm, double reward);

/**
 * TS-UCB choice; fails with `Precondition` until every arm was pulled.
 *
 * # Safety
 * `h` must be a live handle.
 */
enum RbStatus rb_karm_select(struct RbKArm *h, double f_tilde, size_t *out_arm);

/**
 * # Safety
 * Outputs must hold `k` values, `k` being the handle's arm count.
 */
enum RbStatus rb_karm_bounds(struct RbKArm *h, size_t k, double *out_mu, double *out_radius);

/**
 * Beta parameters of one arm.
 *
 * # Safety
 * `h` must be a live handle.
 */
enum RbStatus rb_karm_beta(struct RbKArm *h, size_t arm, double *out_a, double *out_b);

/**
 * NIG posterior with `a₀ = b₀ = 6`, `μ₀ = 0`, `Λ₀ = 4I`.
 *
 * # Safety
 * `out_handle` must be valid for writes.
 */
enum RbStatus rb_nig_new_default(size_t d, struct RbNig **out_handle);

/**
 * # Safety
 * `h` must come from [`rb_nig_new_default`] and not be used afterwards.
 */
void rb_nig_free(struct RbNig *h);

/**
 * Folds in `n` rows (`x` is `n x d`).
 *
 * # Safety
 * `x` must hold `n·d` values and `y` `n` values.
 */
enum RbStatus rb_nig_update(struct RbNig *h, const double *x, const double *y, size_t n);

/**
 * Posterior mean (`d` values) and the inverse-gamma shape and scale.
 *
 * # Safety
 * `out_mean` must hold `d` values.
 */
enum RbStatus rb_nig_state(struct RbNig *h,
                           double *out_mean,
                           size_t d,
                           double *out_shape,
                           double *out_scale);

/**
 * Ratio-minimizing two-point IDS distribution: play `first` with
 * probability `q`, else `second`.
 *
 * # Safety
 * `delta` and `v` must hold `k` values.
 */
enum RbStatus rb_ids_distribution(const double *delta,
                                  const double *v,
                                  size_t k,
                                  size_t *out_first,
                                  size_t *out_second,
                                  double *out_q,
                                  double *out_ratio);

/**
 * Simulates one episode and returns its cumulative regret. `d` and `sigma`
 * are ignored for the K-armed model; `samples` is the TS-UCB sample count
 * or the IDS sample count and is ignored otherwise. Linear cells use the
 * known-noise Gaussian posterior. `env` takes an [`RbEnvKind`] value and
 * `policy` an [`RbPolicyKind`] value.
 *
 * # Safety
 * `out_regret` must be valid for writes.
 */
enum RbStatus rb_run_one(uint32_t env,
                         size_t d,
                         size_t k,
                         double sigma,
                         uint64_t horizon,
                         uint32_t policy,
                         size_t samples,
                         uint64_t master_seed,
                         uint64_t run_id,
                         double *out_regret);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RATIO_BANDITS_H */
