#ifndef STORYGEM_H
#define STORYGEM_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum StorygemStatus {
  STORYGEM_STATUS_OK = 0,
  STORYGEM_STATUS_NULL_ARGUMENT = 1,
  STORYGEM_STATUS_INVALID_UTF8 = 2,
  STORYGEM_STATUS_INVALID_CONFIG = 3,
  STORYGEM_STATUS_IO = 4,
  STORYGEM_STATUS_PIPELINE = 5,
  STORYGEM_STATUS_PANIC = 6,
} StorygemStatus;

/**
 * Loaded word vectors and filter lists; safe to share across threads.
 */
typedef struct StorygemEngine StorygemEngine;

/**
 * A solved layout.
 */
typedef struct StorygemLayout StorygemLayout;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Loads `vectors_path` (fastText .vec) and, if non-null, a stop-word list.
 *
 * # Safety
 * String arguments must be null or valid NUL-terminated strings; `out` must
 * be a valid pointer. On success `*out` owns a handle for
 * [`storygem_engine_free`].
 */
enum StorygemStatus storygem_engine_new(const char *vectors_path,
                                        const char *stopwords_path,
                                        struct StorygemEngine **out);

/**
 * # Safety
 * `engine` must be null or a handle from [`storygem_engine_new`] not yet freed.
 */
void storygem_engine_free(struct StorygemEngine *engine);

/**
 * Runs the pipeline on `text`. `params_json` may be null for defaults, or a
 * JSON object with kebab-case keys (`max-words`, `k`, `weighting`,
 * `container`, `font`, `optimize-font`, `rotation-step`, `hyphenate`, `seed`,
 * `language`).
 *
 * # Safety
 * `engine` must be a live handle; strings null or NUL-terminated; `out` valid.
 */
enum StorygemStatus storygem_layout(const struct StorygemEngine *engine,
                                    const char *text,
                                    const char *params_json,
                                    struct StorygemLayout **out);

/**
 * # Safety
 * `layout` must be null or a handle from [`storygem_layout`] not yet freed.
 */
void storygem_layout_free(struct StorygemLayout *layout);

/**
 * Number of words laid out; 0 for a null handle.
 *
 * # Safety
 * `layout` must be null or a live handle.
 */
size_t storygem_layout_word_count(const struct StorygemLayout *layout);

/**
 * # Safety
 * `layout` must be null or a live handle.
 */
size_t storygem_layout_cluster_count(const struct StorygemLayout *layout);

/**
 * Largest relative cell-area error over all levels; NaN for a null handle.
 *
 * # Safety
 * `layout` must be null or a live handle.
 */
double storygem_layout_max_area_error(const struct StorygemLayout *layout);

/**
 * # Safety
 * `layout` must be a live handle and `out` a valid pointer. The string is
 * released with [`storygem_string_free`].
 */
enum StorygemStatus storygem_layout_to_json(const struct StorygemLayout *layout, char **out);

/**
 * # Safety
 * As for [`storygem_layout_to_json`].
 */
enum StorygemStatus storygem_layout_to_svg(const struct StorygemLayout *layout, char **out);

/**
 * # Safety
 * `s` must be null or a string returned by this library, not yet freed.
 */
void storygem_string_free(char *s);

/**
 * JSON `{error, stage, detail}` for the last failure on this thread, or
 * null. Valid until the next call into the library on the same thread.
 */
const char *storygem_last_error(void);

/**
 * Library version as a static string.
 */
const char *storygem_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* STORYGEM_H */
