#ifndef SWEATKIT_H
#define SWEATKIT_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Outcome of a call. Values are stable across releases.
 */
typedef enum SweatStatus {
  SWEAT_STATUS_OK = 0,
  SWEAT_STATUS_NULL_POINTER = 1,
  SWEAT_STATUS_INVALID_UTF8 = 2,
  /**
   * Bad configuration or arguments.
   */
  SWEAT_STATUS_VALIDATION = 3,
  /**
   * Inputs are well-formed but unusable: missing words, degenerate data.
   */
  SWEAT_STATUS_DATA = 4,
  SWEAT_STATUS_IO = 5,
  SWEAT_STATUS_PANIC = 6,
} SweatStatus;

/**
 * Opaque embedding space.
 */
typedef struct SweatSpace SweatSpace;

/**
 * Scalar part of a SWEAT result. The full result, per-word values
 * included, is available as JSON from [`sweat_run`].
 */
typedef struct SweatSummary {
  double score;
  double effect_size;
  double p_value;
  uint64_t n_permutations;
  /**
   * 1 when every partition was enumerated, 0 for Monte Carlo.
   */
  uint8_t exact;
} SweatSummary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null after a
 * success. Valid until the next call into the library on this thread.
 */
const char *sweat_last_error_message(void);

/**
 * Library version as a static nul-terminated string.
 */
const char *sweat_version(void);

/**
 * Releases a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and not have been freed already.
 */
void sweat_string_free(char *s);

/**
 * Loads a word2vec text file into a new space handle.
 *
 * # Safety
 * `path` and `label` must be nul-terminated strings; `out` must be writable.
 */
enum SweatStatus sweat_space_load(const char *path, const char *label, struct SweatSpace **out);

/**
 * Releases a space. Null is ignored.
 *
 * # Safety
 * `space` must come from this library and not have been freed already.
 */
void sweat_space_free(struct SweatSpace *space);

/**
 * Vector dimension, or 0 for a null handle.
 *
 * # Safety
 * `space` must be null or a live handle.
 */
size_t sweat_space_dimension(const struct SweatSpace *space);

/**
 * Vocabulary size, or 0 for a null handle.
 *
 * # Safety
 * `space` must be null or a live handle.
 */
size_t sweat_space_len(const struct SweatSpace *space);

/**
 * Cosine similarity of two words of one space.
 *
 * # Safety
 * Pointers must be valid; `a` and `b` nul-terminated; `out` writable.
 */
enum SweatStatus sweat_space_cosine(const struct SweatSpace *space,
                                    const char *a,
                                    const char *b,
                                    double *out);

/**
 * Zipf score `log10(count / total · 10⁹)`.
 *
 * # Safety
 * `out` must be writable.
 */
enum SweatStatus sweat_zipf(uint64_t count, uint64_t total_tokens, double *out);

/**
 * Runs SWEAT on two spaces. `request_json` holds `topic` (`label`,
 * `words`), `poles` (`label_a`, `words_a`, `label_b`, `words_b`) and
 * optionally `permutations` and `tail`, with the same shapes as the run
 * configuration file. `summary` receives the scalars; when `out_json` is
 * not null it receives the full result, to be freed with
 * [`sweat_string_free`].
 *
 * # Safety
 * Handles must be live; `request_json` nul-terminated; `summary` writable;
 * `out_json` null or writable.
 */
enum SweatStatus sweat_run(const struct SweatSpace *space1,
                           const struct SweatSpace *space2,
                           const char *request_json,
                           struct SweatSummary *summary,
                           char **out_json);

/**
 * Aligns `source` onto `target` using `n_anchors` anchor words; writes a
 * new handle for the mapped source space and the mean squared anchor
 * residual.
 *
 * # Safety
 * Handles must be live; `anchors` must point to `n_anchors` nul-terminated
 * strings; `out` and `residual` writable.
 */
enum SweatStatus sweat_align(const struct SweatSpace *source,
                             const struct SweatSpace *target,
                             const char *const *anchors,
                             size_t n_anchors,
                             bool center,
                             struct SweatSpace **out,
                             double *residual);

/**
 * Runs the `sweat` command on a configuration file, writing the
 * configured outputs, and returns the report JSON through `out_json`
 * (free with [`sweat_string_free`]).
 *
 * # Safety
 * `config_path` nul-terminated; `out_json` writable.
 */
enum SweatStatus sweat_run_config(const char *config_path, char **out_json);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SWEATKIT_H */
