#ifndef MUSIC_LITE_H
#define MUSIC_LITE_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum MlStatus {
  ML_STATUS_OK = 0,
  ML_STATUS_NULL_POINTER = 1,
  ML_STATUS_INVALID_ARGUMENT = 2,
  ML_STATUS_CONFIG = 3,
  ML_STATUS_NON_CONVERGENCE = 4,
  ML_STATUS_PANIC = 5,
} MlStatus;

/**
 * Opaque adder handle.
 */
typedef struct MlAdder MlAdder;

/**
 * Opaque CORDIC handle.
 */
typedef struct MlCordic MlCordic;

typedef struct MlErrorMetrics {
  double error_rate;
  double mean_absolute_error;
  uint64_t worst_case_error;
  double mean_relative_error;
  double normalized_error_distance;
  uint64_t sample_count;
} MlErrorMetrics;

typedef struct MlRunResult {
  /**
   * NaN when the run failed.
   */
  double estimated_range_m;
  double abs_error_pct;
  bool converged;
  bool cp_warning;
} MlRunResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Error message of the previous call on this thread, or NULL if it
 * succeeded. Valid until the next call on the same thread.
 */
const char *ml_last_error(void);

/**
 * Library version, a static NUL-terminated string.
 */
const char *ml_version(void);

/**
 * Parses an adder spec such as `"acla:16:4"`.
 *
 * # Safety
 * `spec` must be a NUL-terminated string; `out` must be writable.
 */
enum MlStatus ml_adder_new(const char *spec, struct MlAdder **out);

/**
 * # Safety
 * `adder` must come from [`ml_adder_new`] and not be freed twice. NULL is
 * ignored.
 */
void ml_adder_free(struct MlAdder *adder);

/**
 * Bit width, 0 for NULL.
 *
 * # Safety
 * `adder` must be NULL or a live handle.
 */
uint32_t ml_adder_width(const struct MlAdder *adder);

/**
 * `a + b + cin` through the adder; inputs are masked to the width.
 *
 * # Safety
 * `adder` must be a live handle; `sum` and `cout` must be writable.
 */
enum MlStatus ml_adder_eval(const struct MlAdder *adder,
                            uint64_t a,
                            uint64_t b,
                            bool cin,
                            uint64_t *sum,
                            bool *cout);

/**
 * Proxy area and energy costs.
 *
 * # Safety
 * `adder` must be a live handle; `area` and `power` must be writable.
 */
enum MlStatus ml_adder_cost(const struct MlAdder *adder, double *area, double *power);

/**
 * Error metrics against exact addition. `samples == 0` requests
 * exhaustive evaluation.
 *
 * # Safety
 * `adder` must be a live handle; `out` must be writable.
 */
enum MlStatus ml_adder_characterize(const struct MlAdder *adder,
                                    uint64_t samples,
                                    uint64_t seed,
                                    struct MlErrorMetrics *out);

/**
 * CORDIC unit on `width`-bit words with `frac` fraction bits, using a copy
 * of `adder`. `iterations == 0` means `width`.
 *
 * # Safety
 * `adder` must be a live handle; `out` must be writable.
 */
enum MlStatus ml_cordic_new(const struct MlAdder *adder,
                            uint32_t width,
                            uint32_t frac,
                            uint32_t iterations,
                            struct MlCordic **out);

/**
 * # Safety
 * `cordic` must come from [`ml_cordic_new`] and not be freed twice. NULL
 * is ignored.
 */
void ml_cordic_free(struct MlCordic *cordic);

/**
 * Rotates `(x, y)` by `theta` radians with gain compensation. Inputs are
 * quantized to the unit's format.
 *
 * # Safety
 * `cordic` must be a live handle; `x_out` and `y_out` must be writable.
 */
enum MlStatus ml_cordic_rotate(const struct MlCordic *cordic,
                               double x,
                               double y,
                               double theta,
                               double *x_out,
                               double *y_out);

/**
 * Magnitude (gain compensated) and angle of `(x, y)`.
 *
 * # Safety
 * `cordic` must be a live handle; `magnitude` and `angle` must be writable.
 */
enum MlStatus ml_cordic_vector(const struct MlCordic *cordic,
                               double x,
                               double y,
                               double *magnitude,
                               double *angle);

/**
 * Singular values, non-increasing, of the `rows x cols` complex matrix
 * given as row-major real and imaginary parts. `s_out` receives
 * `min(rows, cols)` values.
 *
 * # Safety
 * `re` and `im` must hold `rows * cols` values; `s_out` must hold
 * `min(rows, cols)`.
 */
enum MlStatus ml_svd_singular_values(const struct MlCordic *cordic,
                                     size_t rows,
                                     size_t cols,
                                     const double *re,
                                     const double *im,
                                     double *s_out);

/**
 * One pipeline run with default frame, scene and MUSIC settings, the
 * target at `range_m` and the given SNR (`noiseless` ignores it). Seeds
 * match the CLI's `simulate`.
 *
 * # Safety
 * `cordic` must be a live handle; `out` must be writable.
 */
enum MlStatus ml_simulate(const struct MlCordic *cordic,
                          double range_m,
                          double snr_db,
                          bool noiseless,
                          uint64_t seed,
                          struct MlRunResult *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MUSIC_LITE_H */
