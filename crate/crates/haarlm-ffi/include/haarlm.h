#ifndef HAARLM_H
#define HAARLM_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Run mode for block norms.
 */
typedef enum HlmMode {
  HLM_MODE_DIRECT = 0,
  HLM_MODE_PERIODIC = 1,
  HLM_MODE_BOTH = 2,
} HlmMode;

/**
 * Status codes.
 */
typedef enum HlmStatus {
  HLM_STATUS_OK = 0,
  HLM_STATUS_NULL_POINTER = 1,
  HLM_STATUS_CARDINALITY = 2,
  HLM_STATUS_SEPARATION = 3,
  HLM_STATUS_DOMAIN = 4,
  HLM_STATUS_TOLERANCE = 5,
  HLM_STATUS_SUPPORT = 6,
  HLM_STATUS_DEGENERATE = 7,
  HLM_STATUS_ADMISSIBILITY = 8,
  HLM_STATUS_CALIBRATION = 9,
  HLM_STATUS_MODE = 10,
  HLM_STATUS_TAIL = 11,
  HLM_STATUS_REGIME = 12,
  HLM_STATUS_COST = 13,
  HLM_STATUS_FIT = 14,
  HLM_STATUS_PARSE = 15,
  HLM_STATUS_ASSERT_FAIL = 16,
  HLM_STATUS_IO = 17,
  HLM_STATUS_PANIC = 18,
} HlmStatus;

/**
 * Experiment configuration.
 */
typedef struct HlmConfig HlmConfig;

/**
 * Calibrated kernels.
 */
typedef struct HlmKernels HlmKernels;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the last error message of this thread into `buf` (NUL-terminated,
 * truncated to `len`). Returns the full message length.
 *
 * # Safety
 * `buf` must be null or point to `len` writable bytes.
 */
uintptr_t hlm_last_error(char *buf, uintptr_t len);

/**
 * Builds the default kernel set (shared, built once per process).
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum HlmStatus hlm_kernels_default(struct HlmKernels **out);

/**
 * Reads a kernel file written by `haarlm kernels build`.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` a valid pointer.
 */
enum HlmStatus hlm_kernels_load(const char *path, struct HlmKernels **out);

/**
 * `c_0` and the calibration interval `[left, right]`.
 *
 * # Safety
 * All pointers must be valid.
 */
enum HlmStatus hlm_kernels_calibration(const struct HlmKernels *k,
                                       double *c0,
                                       double *left,
                                       double *right);

/**
 * # Safety
 * `k` must come from this library or be null.
 */
void hlm_kernels_free(struct HlmKernels *k);

/**
 * `<eta_{l,nu}, h_{j,mu}>` as a double; exact in the library.
 *
 * # Safety
 * `k` and `out` must be valid.
 */
enum HlmStatus hlm_haar_coefficient(const struct HlmKernels *k,
                                    int64_t j,
                                    int64_t mu,
                                    int64_t l,
                                    int64_t nu,
                                    double *out);

/**
 * New configuration with `(p, q, s)`, separation `R`, periodic mode.
 *
 * # Safety
 * `out` must be valid.
 */
enum HlmStatus hlm_config_new(double p, double q, double s, int64_t r, struct HlmConfig **out);

/**
 * # Safety
 * `cfg` must be valid.
 */
enum HlmStatus hlm_config_set_mode(struct HlmConfig *cfg, enum HlmMode mode);

/**
 * Exact window `|m|, |n| <= window` for the off-diagonal sums; negative restores the default.
 *
 * # Safety
 * `cfg` must be valid.
 */
enum HlmStatus hlm_config_set_window(struct HlmConfig *cfg, int64_t window);

/**
 * # Safety
 * `cfg` must come from this library or be null.
 */
void hlm_config_free(struct HlmConfig *cfg);

/**
 * `D(N)` and its lower bound.
 *
 * # Safety
 * All pointers must be valid.
 */
enum HlmStatus hlm_diagonal(const struct HlmConfig *cfg,
                            const struct HlmKernels *k,
                            int64_t n,
                            double *d,
                            double *lower);

/**
 * `U(N)`, `D(N)` and the exact window sum.
 *
 * # Safety
 * All pointers must be valid.
 */
enum HlmStatus hlm_offdiagonal(const struct HlmConfig *cfg,
                               const struct HlmKernels *k,
                               int64_t n,
                               double *u,
                               double *d,
                               double *window_sum);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HAARLM_H */
