#ifndef ONLINE_PCA_H
#define ONLINE_PCA_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum OpcaStatus {
  OPCA_STATUS_OK = 0,
  OPCA_STATUS_INVALID_ARGUMENT = 1,
  OPCA_STATUS_NUMERIC_FAILURE = 2,
  OPCA_STATUS_UNSUPPORTED = 3,
  OPCA_STATUS_SEQUENCE_EXHAUSTED = 4,
  OPCA_STATUS_NULL_POINTER = 5,
  OPCA_STATUS_PANIC = 6,
} OpcaStatus;

enum OpcaAlgorithm
#if defined(__cplusplus) || __STDC_VERSION__ >= 202311L
  : uint32_t
#endif // defined(__cplusplus) || __STDC_VERSION__ >= 202311L
 {
  OPCA_ALGORITHM_LOSS_MEG = 0,
  OPCA_ALGORITHM_GAIN_MEG = 1,
  OPCA_ALGORITHM_GD = 2,
};
#ifndef __cplusplus
#if __STDC_VERSION__ >= 202311L
typedef enum OpcaAlgorithm OpcaAlgorithm;
#else
typedef uint32_t OpcaAlgorithm;
#endif // __STDC_VERSION__ >= 202311L
#endif // __cplusplus

enum OpcaRegime
#if defined(__cplusplus) || __STDC_VERSION__ >= 202311L
  : uint32_t
#endif // defined(__cplusplus) || __STDC_VERSION__ >= 202311L
 {
  OPCA_REGIME_SPARSE = 0,
  OPCA_REGIME_DENSE = 1,
  /**
   * Infer from the adversary (game configs only).
   */
  OPCA_REGIME_INFER = 2,
};
#ifndef __cplusplus
#if __STDC_VERSION__ >= 202311L
typedef enum OpcaRegime OpcaRegime;
#else
typedef uint32_t OpcaRegime;
#endif // __STDC_VERSION__ >= 202311L
#endif // __cplusplus

enum OpcaBoundMode
#if defined(__cplusplus) || __STDC_VERSION__ >= 202311L
  : uint32_t
#endif // defined(__cplusplus) || __STDC_VERSION__ >= 202311L
 {
  OPCA_BOUND_MODE_HORIZON = 0,
  OPCA_BOUND_MODE_BUDGET = 1,
  OPCA_BOUND_MODE_GAIN_BUDGET = 2,
};
#ifndef __cplusplus
#if __STDC_VERSION__ >= 202311L
typedef enum OpcaBoundMode OpcaBoundMode;
#else
typedef uint32_t OpcaBoundMode;
#endif // __STDC_VERSION__ >= 202311L
#endif // __cplusplus

enum OpcaAdversary
#if defined(__cplusplus) || __STDC_VERSION__ >= 202311L
  : uint32_t
#endif // defined(__cplusplus) || __STDC_VERSION__ >= 202311L
 {
  OPCA_ADVERSARY_FIRST2K = 0,
  OPCA_ADVERSARY_UNIFORM = 1,
  OPCA_ADVERSARY_DENSE_BERNOULLI = 2,
  OPCA_ADVERSARY_GD_KILLER = 3,
  OPCA_ADVERSARY_ZERO = 4,
};
#ifndef __cplusplus
#if __STDC_VERSION__ >= 202311L
typedef enum OpcaAdversary OpcaAdversary;
#else
typedef uint32_t OpcaAdversary;
#endif // __STDC_VERSION__ >= 202311L
#endif // __cplusplus

/**
 * Opaque learner handle.
 */
typedef struct OpcaLearner OpcaLearner;

/**
 * Game description for [`opca_run_game`].
 */
typedef struct OpcaGameConfig {
  size_t n;
  size_t k;
  /**
   * Non-zero: play to `budget`; zero: play `horizon` trials.
   */
  uint32_t use_budget;
  size_t horizon;
  double budget;
  uint32_t algorithm;
  uint32_t adversary;
  uint32_t regime;
  /**
   * Learning rate; zero or negative selects the tuned rate.
   */
  double eta;
  /**
   * Non-zero charges sampled instead of expected losses.
   */
  uint32_t sampled;
  /**
   * Non-zero plays the matrix learner on rotated instances.
   */
  uint32_t matrix;
} OpcaGameConfig;

typedef struct OpcaGameSummary {
  size_t trials;
  double eta;
  double alg_loss;
  double comp_loss;
  double regret;
  /**
   * NaN when no closed-form bound applies.
   */
  double bound;
} OpcaGameSummary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the calling thread's last error message into `buf` (NUL
 * terminated, truncated to `len`). Returns the full message length, or 0
 * when there is none.
 *
 * # Safety
 * `buf` must be null or point to `len` writable bytes.
 */
size_t opca_last_error_message(char *buf, size_t len);

/**
 * Euclidean projection of `v[0..n]` onto `{w in [0,1]^n : sum w = m}`.
 *
 * # Safety
 * `v` and `out` must point to `n` doubles.
 */
enum OpcaStatus opca_euclidean_project(const double *v, size_t n, size_t m, double *out);

/**
 * Relative-entropy projection of positive `v[0..n]` onto the capped
 * simplex with sum `m`.
 *
 * # Safety
 * `v` and `out` must point to `n` doubles.
 */
enum OpcaStatus opca_entropic_project(const double *v, size_t n, size_t m, double *out);

/**
 * Creates a learner at the uniform start. `matrix` non-zero selects the
 * matrix form. The handle must be released with [`opca_learner_free`].
 *
 * # Safety
 * `out` must be a valid pointer to a handle slot.
 */
enum OpcaStatus opca_learner_new(uint32_t algorithm_id,
                                 size_t n,
                                 size_t k,
                                 double eta,
                                 uint32_t matrix,
                                 struct OpcaLearner **out);

/**
 * # Safety
 * `learner` must be null or a handle from [`opca_learner_new`] that has not
 * been freed.
 */
void opca_learner_free(struct OpcaLearner *learner);

/**
 * One update on the loss vector `loss[0..n]` (a diagonal instance for
 * matrix learners).
 *
 * # Safety
 * `learner` must be a live handle and `loss` must point to `n` doubles.
 */
enum OpcaStatus opca_learner_step_vector(struct OpcaLearner *learner, const double *loss, size_t n);

/**
 * One update on the symmetric instance `x` (row-major `n × n`).
 *
 * # Safety
 * `learner` must be a live handle and `x` must point to `n * n` doubles.
 */
enum OpcaStatus opca_learner_step_matrix(struct OpcaLearner *learner, const double *x, size_t n);

/**
 * Per-expert loss weights (diagonal of the parameter in the standard
 * basis, complemented for Gain MEG) into `out[0..n]`.
 *
 * # Safety
 * `learner` must be a live handle and `out` must point to `n` doubles.
 */
enum OpcaStatus opca_learner_weights(const struct OpcaLearner *learner, double *out, size_t n);

/**
 * Expected loss the learner would pay on the loss vector `loss[0..n]`.
 *
 * # Safety
 * `learner` must be a live handle, `loss` must point to `n` doubles and
 * `out` to one double.
 */
enum OpcaStatus opca_learner_expected_loss(const struct OpcaLearner *learner,
                                           const double *loss,
                                           size_t n,
                                           double *out);

/**
 * Closed-form regret bound; `OPCA_STATUS_UNSUPPORTED` when none applies.
 *
 * # Safety
 * `out` must point to one double.
 */
enum OpcaStatus opca_regret_bound(uint32_t algorithm_id,
                                  uint32_t regime_id,
                                  uint32_t mode,
                                  double value,
                                  size_t n,
                                  size_t k,
                                  double *out);

/**
 * Default learning rate; `OPCA_STATUS_UNSUPPORTED` when none applies.
 *
 * # Safety
 * `out` must point to one double.
 */
enum OpcaStatus opca_tune_eta(uint32_t algorithm_id,
                              uint32_t regime_id,
                              uint32_t mode,
                              double value,
                              size_t n,
                              size_t k,
                              double *out);

/**
 * Plays one seeded game and writes its totals.
 *
 * # Safety
 * `config` must point to a valid config and `out` to a summary slot.
 */
enum OpcaStatus opca_run_game(const struct OpcaGameConfig *config,
                              uint64_t seed,
                              struct OpcaGameSummary *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ONLINE_PCA_H */
