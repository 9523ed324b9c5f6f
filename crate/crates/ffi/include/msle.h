#ifndef MSLE_H
#define MSLE_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes. Zero is success.
 */
typedef enum MsleStatus {
  MSLE_STATUS_OK = 0,
  MSLE_STATUS_NULL_POINTER = 1,
  /**
   * A parameter lies outside its admissible range.
   */
  MSLE_STATUS_BOUNDS = 2,
  MSLE_STATUS_INVALID_ARGUMENT = 3,
  /**
   * A point lies outside its domain or is swallowed by a hull.
   */
  MSLE_STATUS_DOMAIN = 4,
  MSLE_STATUS_NUMERIC = 5,
  MSLE_STATUS_GEOMETRY = 6,
  /**
   * Lattice tracing or loop representation invariants.
   */
  MSLE_STATUS_LATTICE = 7,
  MSLE_STATUS_STATISTICS = 8,
  MSLE_STATUS_IO = 9,
  /**
   * A buffer is too small; the required length was written.
   */
  MSLE_STATUS_BUFFER_TOO_SMALL = 10,
  MSLE_STATUS_PANIC = 11,
  MSLE_STATUS_OTHER = 12,
} MsleStatus;

/**
 * A curve in the plane.
 */
typedef struct MsleCurve MsleCurve;

/**
 * A driving function sampled on a time grid.
 */
typedef struct MsleDriver MsleDriver;

/**
 * `N` disjoint curves in a domain with a link pattern.
 */
typedef struct MsleState MsleState;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failure on this thread, or null. The pointer stays
 * valid until the next call into this library on the same thread.
 */
const char *msle_last_error(void);

/**
 * Number of link patterns with `n` links.
 *
 * # Safety
 * `count` must be null or valid for writes.
 */
enum MsleStatus msle_count_patterns(size_t n, uint64_t *count);

/**
 * `n_kappa` for `kappa` in `(4, 8)`.
 *
 * # Safety
 * `value` must be null or valid for writes.
 */
enum MsleStatus msle_n_kappa(double kappa, size_t *value);

/**
 * Chordal SLE from 0 to infinity in the upper half-plane up to capacity
 * `t_total`, on a grid of step `dt`.
 *
 * # Safety
 * `curve` must be null or valid for writes.
 */
enum MsleStatus msle_sample_chordal_sle(double kappa,
                                        double t_total,
                                        double dt,
                                        uint64_t seed,
                                        struct MsleCurve **curve);

/**
 * Builds a curve from coordinate arrays of length `n`.
 *
 * # Safety
 * `xs` and `ys` must point to `n` readable doubles; `curve` must be null
 * or valid for writes.
 */
enum MsleStatus msle_curve_new(const double *xs,
                               const double *ys,
                               size_t n,
                               struct MsleCurve **curve);

/**
 * Number of points of a curve (0 for null).
 *
 * # Safety
 * `curve` must be null or a live handle.
 */
size_t msle_curve_len(const struct MsleCurve *curve);

/**
 * Copies the curve into `xs` and `ys`, which hold `capacity` doubles each.
 * Fails with `BufferTooSmall` when they cannot hold every point.
 *
 * # Safety
 * `curve` must be a live handle; `xs` and `ys` must be writable for
 * `capacity` doubles.
 */
enum MsleStatus msle_curve_points(const struct MsleCurve *curve,
                                  double *xs,
                                  double *ys,
                                  size_t capacity);

/**
 * # Safety
 * `curve` must be null or a handle not yet freed.
 */
void msle_curve_free(struct MsleCurve *curve);

/**
 * Driver of a curve in the upper half-plane by unzipping at most
 * `n_steps` points.
 *
 * # Safety
 * `curve` must be a live handle; `driver` must be null or valid for writes.
 */
enum MsleStatus msle_extract_driver(const struct MsleCurve *curve,
                                    size_t n_steps,
                                    struct MsleDriver **driver);

/**
 * Number of grid times of a driver (0 for null).
 *
 * # Safety
 * `driver` must be null or a live handle.
 */
size_t msle_driver_len(const struct MsleDriver *driver);

/**
 * Copies times and values into buffers of `capacity` doubles each.
 *
 * # Safety
 * `driver` must be a live handle; `times` and `values` must be writable
 * for `capacity` doubles.
 */
enum MsleStatus msle_driver_values(const struct MsleDriver *driver,
                                   double *times,
                                   double *values,
                                   size_t capacity);

/**
 * # Safety
 * `driver` must be null or a handle not yet freed.
 */
void msle_driver_free(struct MsleDriver *driver);

/**
 * Boundary Poisson kernel of the `width x height` rectangle between
 * boundary points `(x1, y1)` and `(x2, y2)`.
 *
 * # Safety
 * `value` must be null or valid for writes.
 */
enum MsleStatus msle_poisson_kernel_rectangle(double width,
                                              double height,
                                              double x1,
                                              double y1,
                                              double x2,
                                              double y2,
                                              double *value);

/**
 * Monte Carlo estimate of `f_alpha` at `kappa = 8/3` for increasing real
 * points `x[0..n]` and a pattern written `N;a-b,...`.
 *
 * # Safety
 * `x` must point to `n` doubles, `pattern` to a nul-terminated string,
 * and `mean`, `stderr_out` must be null or valid for writes.
 */
enum MsleStatus msle_f_alpha_mc(const double *x,
                                size_t n,
                                const char *pattern_text,
                                size_t samples,
                                uint64_t seed,
                                double *mean,
                                double *stderr_out);

/**
 * Curves hugging the boundary of the `width x height` rectangle, one
 * per link, with marks given as `n_marks` coordinate pairs in
 * counterclockwise order.
 *
 * # Safety
 * `mark_x`, `mark_y` must point to `n_marks` doubles, `pattern` to a
 * nul-terminated string, and `state` must be null or valid for writes.
 */
enum MsleStatus msle_state_hugging_rectangle(double kappa,
                                             double width,
                                             double height,
                                             const double *mark_x,
                                             const double *mark_y,
                                             size_t n_marks,
                                             const char *pattern_text,
                                             double offset,
                                             double spacing,
                                             struct MsleState **state);

/**
 * Number of curves (0 for null).
 *
 * # Safety
 * `state` must be null or a live handle.
 */
size_t msle_state_n_curves(const struct MsleState *state);

/**
 * Signed area between curve `j` and the chord joining its ends.
 *
 * # Safety
 * `state` must be a live handle; `area` must be null or valid for writes.
 */
enum MsleStatus msle_state_signed_area(const struct MsleState *state, size_t j, double *area);

/**
 * Copy of curve `j` as a new curve handle.
 *
 * # Safety
 * `state` must be a live handle; `curve` must be null or valid for writes.
 */
enum MsleStatus msle_state_curve(const struct MsleState *state, size_t j, struct MsleCurve **curve);

/**
 * One resampling step of curve `j`, in place.
 *
 * # Safety
 * `state` must be a live handle.
 */
enum MsleStatus msle_state_resample(struct MsleState *state, size_t j, uint64_t seed);

/**
 * # Safety
 * `state` must be null or a handle not yet freed.
 */
void msle_state_free(struct MsleState *state);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MSLE_H */
