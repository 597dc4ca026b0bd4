#ifndef AP3_H
#define AP3_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum Ap3Status {
  AP3_STATUS_OK = 0,
  AP3_STATUS_NULL_POINTER = 1,
  AP3_STATUS_INVALID_ARGUMENT = 2,
  AP3_STATUS_IO = 3,
  AP3_STATUS_PARSE = 4,
  /**
   * Bad group parameters, out-of-range values or mismatched sizes.
   */
  AP3_STATUS_DOMAIN = 5,
  /**
   * The improvement pipeline could not run with the given parameters.
   */
  AP3_STATUS_PIPELINE = 6,
  AP3_STATUS_INTERNAL = 7,
} Ap3Status;

/**
 * A density function `f: F_p^n → [0, 1]`.
 */
typedef struct Ap3Density Ap3Density;

/**
 * A subset of `F_p^n`.
 */
typedef struct Ap3PointSet Ap3PointSet;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *ap3_last_error_message(void);

/**
 * # Safety
 * `s` must be null or a string returned by this library, not yet freed.
 */
void ap3_string_free(char *s);

/**
 * Builds a density from `p^n` values in canonical index order.
 *
 * # Safety
 * `values` must point to `len` readable doubles; `out_density` must be writable.
 */
enum Ap3Status ap3_density_new(uint32_t p,
                               uint32_t n,
                               const double *values,
                               size_t len,
                               struct Ap3Density **out_density);

/**
 * Reads an `.apf` file.
 *
 * # Safety
 * `path` must be a nul-terminated string; `out_density` must be writable.
 */
enum Ap3Status ap3_density_load(const char *path, struct Ap3Density **out_density);

/**
 * Writes an `.apf` file.
 *
 * # Safety
 * `density` must be a live handle and `path` a nul-terminated string.
 */
enum Ap3Status ap3_density_save(const struct Ap3Density *density, const char *path);

/**
 * # Safety
 * `density` must be null or a live handle; it is invalid afterwards.
 */
void ap3_density_free(struct Ap3Density *density);

/**
 * Number of points `p^n`.
 *
 * # Safety
 * `density` must be a live handle and `out_len` writable.
 */
enum Ap3Status ap3_density_len(const struct Ap3Density *density, size_t *out_len);

/**
 * Copies the values into `buffer`, which must hold exactly `p^n` doubles.
 *
 * # Safety
 * `buffer` must point to `len` writable doubles.
 */
enum Ap3Status ap3_density_values(const struct Ap3Density *density, double *buffer, size_t len);

/**
 * # Safety
 * `density` must be a live handle and `out_value` writable.
 */
enum Ap3Status ap3_density_expectation(const struct Ap3Density *density, double *out_value);

/**
 * `Λ₃` by the direct double sum.
 *
 * # Safety
 * `density` must be a live handle and `out_value` writable.
 */
enum Ap3Status ap3_lambda3_direct(const struct Ap3Density *density, double *out_value);

/**
 * `Λ₃` through the Fourier transform.
 *
 * # Safety
 * `density` must be a live handle and `out_value` writable.
 */
enum Ap3Status ap3_lambda3_spectral(const struct Ap3Density *density, double *out_value);

/**
 * Averages over the cosets of the subspace spanned by `generators`
 * (for example `"1,0;0,1"`, `"full"` or `"zero"`).
 *
 * # Safety
 * `density` must be a live handle, `generators` a nul-terminated string and
 * `out_density` writable.
 */
enum Ap3Status ap3_density_average(const struct Ap3Density *density,
                                   const char *generators,
                                   struct Ap3Density **out_density);

/**
 * Builds `g` from `f`. `delta <= 0` uses the default `Δ(ε)`; `ell == 0`
 * uses the default codimension. The report is written as JSON to
 * `out_report_json` when that pointer is non-null.
 *
 * # Safety
 * `density` must be a live handle; `out_g` must be writable;
 * `out_report_json` must be null or writable.
 */
enum Ap3Status ap3_improve(const struct Ap3Density *density,
                           double epsilon,
                           double delta,
                           size_t ell,
                           struct Ap3Density **out_g,
                           char **out_report_json);

/**
 * Rounds to an indicator with mean at least `E(j)`.
 *
 * # Safety
 * `density` must be a live handle; `out_set` must be writable;
 * `out_report_json` must be null or writable.
 */
enum Ap3Status ap3_round(const struct Ap3Density *density,
                         uint64_t seed,
                         struct Ap3PointSet **out_set,
                         char **out_report_json);

/**
 * Builds a set from member indices, in any order, duplicates allowed.
 *
 * # Safety
 * `members` must point to `len` readable indices (may be null when `len`
 * is 0); `out_set` must be writable.
 */
enum Ap3Status ap3_set_new(uint32_t p,
                           uint32_t n,
                           const size_t *members,
                           size_t len,
                           struct Ap3PointSet **out_set);

/**
 * Reads an `.aps` file.
 *
 * # Safety
 * `path` must be a nul-terminated string; `out_set` must be writable.
 */
enum Ap3Status ap3_set_load(const char *path, struct Ap3PointSet **out_set);

/**
 * # Safety
 * `set` must be null or a live handle; it is invalid afterwards.
 */
void ap3_set_free(struct Ap3PointSet *set);

/**
 * # Safety
 * `set` must be a live handle and `out_len` writable.
 */
enum Ap3Status ap3_set_len(const struct Ap3PointSet *set, size_t *out_len);

/**
 * Number of progressions `(m, m+d, m+2d)` with `d ≠ 0` inside the set.
 *
 * # Safety
 * `set` must be a live handle and `out_count` writable.
 */
enum Ap3Status ap3_t3_nontrivial(const struct Ap3PointSet *set, uint64_t *out_count);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* AP3_H */
