#ifndef ROADSPEED_H
#define ROADSPEED_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum RsStatus {
  RS_STATUS_OK = 0,
  /**
   * Null pointer or out-of-range argument.
   */
  RS_STATUS_INVALID_ARGUMENT = 1,
  /**
   * Invalid parameters or kernels (CLI exit code 2).
   */
  RS_STATUS_CONFIG_ERROR = 2,
  /**
   * Solver, bracketing or simulation failure (CLI exit code 3).
   */
  RS_STATUS_NUMERICAL_FAILURE = 3,
  RS_STATUS_VALIDATION_FAILURE = 4,
  /**
   * A Rust panic was caught at the boundary.
   */
  RS_STATUS_PANIC = 5,
} RsStatus;

typedef enum RsKernelShape {
  RS_KERNEL_SHAPE_BOX = 0,
  RS_KERNEL_SHAPE_TRIANGLE = 1,
  RS_KERNEL_SHAPE_RAISED_COSINE = 2,
} RsKernelShape;

typedef enum RsRescaleTarget {
  RS_RESCALE_TARGET_MU = 0,
  RS_RESCALE_TARGET_NU = 1,
  RS_RESCALE_TARGET_BOTH = 2,
} RsRescaleTarget;

/**
 * Opaque handle: model, kernels and the discretized transverse problem.
 */
typedef struct RsSpeedProblem RsSpeedProblem;

typedef struct RsModelParams {
  /**
   * Field diffusivity `d`.
   */
  double d_field;
  /**
   * Road diffusivity `D`.
   */
  double d_road;
  /**
   * `f'(0)`.
   */
  double growth;
  double mu_bar;
  double nu_bar;
} RsModelParams;

typedef struct RsKernel {
  enum RsKernelShape shape;
  double half_width;
  double mass;
  /**
   * Long-range scale `R >= 1`; the kernel is `k(y / R) / R`.
   */
  double range_scale;
} RsKernel;

typedef struct RsSpeedResult {
  double c_star;
  /**
   * NaN for the subcritical shortcut.
   */
  double lambda_star;
  /**
   * 1 when `D <= 2d` and `c* = c_K` without a search.
   */
  int32_t subcritical;
  double gap_at_cstar;
  uint32_t iterations;
  double bracket_lower;
  double bracket_upper;
} RsSpeedResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the calling thread's last error message into `buf` (NUL
 * terminated, truncated to `len`). Returns the full message length plus
 * one, or 0 when there is no pending error.
 *
 * # Safety
 * `buf` must be null or point to `len` writable bytes.
 */
size_t rs_last_error_message(char *buf, size_t len);

/**
 * Library version as a static NUL-terminated string.
 */
const char *rs_version(void);

/**
 * Classical KPP speed `2 sqrt(d a)`.
 *
 * # Safety
 * Pointers must be null or valid.
 */
enum RsStatus rs_c_kpp(const struct RsModelParams *params, double *out);

/**
 * Threshold road diffusivity `d (2 + mu_bar / a)`.
 *
 * # Safety
 * Pointers must be null or valid.
 */
enum RsStatus rs_threshold_d(const struct RsModelParams *params, double *out);

/**
 * `D sqrt(a / (D - d))`; fails with `RS_STATUS_NUMERICAL_FAILURE` when `D <= d`.
 *
 * # Safety
 * Pointers must be null or valid.
 */
enum RsStatus rs_upper_bound_speed(const struct RsModelParams *params, double *out);

/**
 * Speed where `lambda1+ = lambda2-`; only defined above the threshold.
 *
 * # Safety
 * Pointers must be null or valid.
 */
enum RsStatus rs_c_min_crossing(const struct RsModelParams *params, double *out);

/**
 * Builds a speed problem. `spacing <= 0` selects the default grid spacing.
 *
 * # Safety
 * Pointers must be null or valid; `*out` receives a handle to free with
 * `rs_speed_problem_free`.
 */
enum RsStatus rs_speed_problem_new(const struct RsModelParams *params,
                                   const struct RsKernel *mu,
                                   const struct RsKernel *nu,
                                   double spacing,
                                   struct RsSpeedProblem **out);

/**
 * Releases a handle; null is ignored.
 *
 * # Safety
 * `problem` must come from `rs_speed_problem_new` and not be used afterwards.
 */
void rs_speed_problem_free(struct RsSpeedProblem *problem);

/**
 * `Psi2(lambda, c) = int nu phi`.
 *
 * # Safety
 * Pointers must be null or valid.
 */
enum RsStatus rs_speed_problem_psi2(const struct RsSpeedProblem *problem,
                                    double lambda,
                                    double c,
                                    double *out);

/**
 * Intersection gap `G(c)`; nonnegative iff the curves meet at speed `c`.
 *
 * # Safety
 * Pointers must be null or valid.
 */
enum RsStatus rs_speed_problem_gap(const struct RsSpeedProblem *problem, double c, double *out);

/**
 * # Safety
 * Pointers must be null or valid.
 */
enum RsStatus rs_speed_problem_find_cstar(const struct RsSpeedProblem *problem,
                                          struct RsSpeedResult *out);

/**
 * `c*(R)` for each of the `count` scales, written to `speeds`.
 *
 * # Safety
 * `scales` and `speeds` must point to `count` readable / writable doubles.
 */
enum RsStatus rs_speed_problem_sweep(const struct RsSpeedProblem *problem,
                                     enum RsRescaleTarget which,
                                     const double *scales,
                                     size_t count,
                                     double *speeds);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ROADSPEED_H */
