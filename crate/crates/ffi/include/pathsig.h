#ifndef PATHSIG_H
#define PATHSIG_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes of every fallible call.
 */
typedef enum PsStatus {
  PS_STATUS_OK = 0,
  PS_STATUS_NULL_POINTER = 1,
  PS_STATUS_INVALID_ARGUMENT = 2,
  PS_STATUS_DIMENSION = 3,
  PS_STATUS_DOMAIN = 4,
  PS_STATUS_INVALID_PATH = 5,
  PS_STATUS_PARSE = 6,
  PS_STATUS_BUFFER_TOO_SMALL = 7,
  PS_STATUS_COMPUTE = 8,
  PS_STATUS_PANIC = 9,
} PsStatus;

/**
 * A sampled path.
 */
typedef struct PsPath PsPath;

/**
 * A truncated tensor, e.g. a signature.
 */
typedef struct PsTensor PsTensor;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *ps_version(void);

/**
 * Message of the last failed call on this thread, or NULL. Valid until the
 * next call into the library from the same thread.
 */
const char *ps_last_error_message(void);

/**
 * Builds a path from `samples` strictly increasing `times` and row-major
 * `values` of `samples * channels` entries.
 *
 * # Safety
 * `times` and `values` must point to arrays of the stated lengths and `out`
 * to writable storage for one handle.
 */
enum PsStatus ps_path_new(const double *times,
                          const double *values,
                          size_t samples,
                          size_t channels,
                          struct PsPath **out);

/**
 * Parses CSV text (header row, time in the first column) into a path.
 *
 * # Safety
 * `csv` must be a NUL-terminated string and `out` writable.
 */
enum PsStatus ps_path_from_csv(const char *csv, struct PsPath **out);

/**
 * # Safety
 * `path` must be NULL or a handle from this library not yet freed.
 */
void ps_path_free(struct PsPath *path);

/**
 * Number of samples, or 0 for NULL.
 *
 * # Safety
 * `path` must be NULL or a live handle.
 */
size_t ps_path_len(const struct PsPath *path);

/**
 * Number of channels, or 0 for NULL.
 *
 * # Safety
 * `path` must be NULL or a live handle.
 */
size_t ps_path_channels(const struct PsPath *path);

/**
 * Truncated signature at `level`.
 *
 * # Safety
 * `path` must be a live handle and `out` writable.
 */
enum PsStatus ps_signature(const struct PsPath *path, size_t level, struct PsTensor **out);

/**
 * Truncated log-signature at `level`.
 *
 * # Safety
 * `path` must be a live handle and `out` writable.
 */
enum PsStatus ps_log_signature(const struct PsPath *path, size_t level, struct PsTensor **out);

/**
 * # Safety
 * `tensor` must be NULL or a handle from this library not yet freed.
 */
void ps_tensor_free(struct PsTensor *tensor);

/**
 * Truncation level, or 0 for NULL.
 *
 * # Safety
 * `tensor` must be NULL or a live handle.
 */
size_t ps_tensor_level(const struct PsTensor *tensor);

/**
 * Alphabet size, or 0 for NULL.
 *
 * # Safety
 * `tensor` must be NULL or a live handle.
 */
size_t ps_tensor_alphabet_size(const struct PsTensor *tensor);

/**
 * Coefficient of the word `letters[0..len]` (1-based letters; `len = 0`
 * gives the constant term).
 *
 * # Safety
 * `tensor` must be a live handle, `letters` must hold `len` entries and
 * `out` must be writable.
 */
enum PsStatus ps_tensor_coeff(const struct PsTensor *tensor,
                              const size_t *letters,
                              size_t len,
                              double *out);

/**
 * Copies grade `k` (`N^k` entries, lexicographic word order) into `buf`.
 * `needed` receives the grade size; with too small a buffer nothing is
 * copied and `BUFFER_TOO_SMALL` is returned.
 *
 * # Safety
 * `tensor` must be a live handle, `buf` must hold `buf_len` entries (or be
 * NULL when `buf_len` is 0) and `needed` must be writable.
 */
enum PsStatus ps_tensor_grade(const struct PsTensor *tensor,
                              size_t k,
                              double *buf,
                              size_t buf_len,
                              size_t *needed);

/**
 * Serializes the tensor as JSON `{"N":..,"L":..,"levels":[..]}` into a new
 * string, released with [`ps_string_free`].
 *
 * # Safety
 * `tensor` must be a live handle and `out` writable.
 */
enum PsStatus ps_tensor_to_json(const struct PsTensor *tensor, char **out);

/**
 * # Safety
 * `s` must be NULL or a string returned by this library not yet freed.
 */
void ps_string_free(char *s);

/**
 * Signed area between 0-based channels `i` and `j`.
 *
 * # Safety
 * `path` must be a live handle and `out` writable.
 */
enum PsStatus ps_signed_area(const struct PsPath *path, size_t i, size_t j, double *out);

/**
 * Writes the `N x N` lead matrix row-major into `buf`. `needed` receives
 * `N * N`; with too small a buffer nothing is copied.
 *
 * # Safety
 * `path` must be a live handle, `buf` must hold `buf_len` entries (or be
 * NULL when `buf_len` is 0) and `needed` must be writable.
 */
enum PsStatus ps_lead_matrix(const struct PsPath *path,
                             double *buf,
                             size_t buf_len,
                             size_t *needed);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PATHSIG_H */
