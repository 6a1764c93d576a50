#ifndef HETEX_H
#define HETEX_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Distance method. Only the listed values may be passed.
 */
typedef enum HetexMethod {
  HETEX_METHOD_CLASSICAL = 0,
  HETEX_METHOD_HETEROGENEOUS = 1,
} HetexMethod;

/**
 * Result code of every call. Values 1 to 3 match the command-line exit codes.
 */
typedef enum HetexStatus {
  HETEX_STATUS_OK = 0,
  HETEX_STATUS_VALIDATION = 1,
  HETEX_STATUS_IO = 2,
  HETEX_STATUS_INTERNAL = 3,
  /**
   * A required pointer was null or a buffer was too small.
   */
  HETEX_STATUS_INVALID_ARGUMENT = 4,
  HETEX_STATUS_PANIC = 5,
} HetexStatus;

typedef struct HetexImage HetexImage;

typedef struct HetexSignature HetexSignature;

typedef struct HetexStats HetexStats;

/**
 * Signature parameters. The gray-level count is taken from the image.
 */
typedef struct HetexParams {
  uint32_t patterns;
  uint32_t window_size;
  double trim_fraction;
  uint64_t seed;
  bool symmetric;
} HetexParams;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null. Valid until the
 * next call on the same thread.
 */
const char *hetex_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *hetex_version(void);

struct HetexParams hetex_default_params(void);

/**
 * Load a PGM or PNG file and quantize it to `levels` gray levels.
 */
enum HetexStatus hetex_image_load(const char *path, uint16_t levels, struct HetexImage **out);

/**
 * Quantize a row-major 8-bit buffer of `width * height` bytes.
 */
enum HetexStatus hetex_image_from_gray8(size_t width,
                                        size_t height,
                                        const uint8_t *pixels,
                                        size_t len,
                                        uint16_t levels,
                                        struct HetexImage **out);

void hetex_image_free(struct HetexImage *img);

/**
 * Width in pixels, or 0 for a null handle.
 */
size_t hetex_image_width(const struct HetexImage *img);

size_t hetex_image_height(const struct HetexImage *img);

uint16_t hetex_image_levels(const struct HetexImage *img);

/**
 * Whole-image descriptor; `out` must hold 32 values.
 */
enum HetexStatus hetex_image_describe(const struct HetexImage *img, bool symmetric, double *out);

/**
 * Normalized co-occurrence matrix, row-major; `out` must hold `levels * levels` values.
 */
enum HetexStatus hetex_image_glcm(const struct HetexImage *img,
                                  size_t distance,
                                  uint32_t angle_degrees,
                                  bool symmetric,
                                  double *out,
                                  size_t out_len);

/**
 * Fit normalization statistics over the windows of `count` images.
 */
enum HetexStatus hetex_stats_fit(const struct HetexImage *const *images,
                                 size_t count,
                                 uint32_t window_size,
                                 bool symmetric,
                                 struct HetexStats **out);

void hetex_stats_free(struct HetexStats *stats);

/**
 * Build the pattern signature of `img`. The window size and symmetry must
 * match those the statistics were fitted with.
 */
enum HetexStatus hetex_signature_build(const struct HetexImage *img,
                                       const struct HetexStats *stats,
                                       const struct HetexParams *params,
                                       struct HetexSignature **out);

void hetex_signature_free(struct HetexSignature *sig);

/**
 * Number of patterns, or 0 for a null handle.
 */
size_t hetex_signature_pattern_count(const struct HetexSignature *sig);

/**
 * Distance between two signatures built with the same statistics and parameters.
 */
enum HetexStatus hetex_signature_distance(const struct HetexSignature *a,
                                          const struct HetexSignature *b,
                                          enum HetexMethod method,
                                          double *out);

/**
 * Cheapest one-to-one pattern matching. `permutation[i]` receives the pattern
 * of `b` matched to pattern `i` of `a`; it must hold `perm_len >= k` entries.
 */
enum HetexStatus hetex_signature_match(const struct HetexSignature *a,
                                       const struct HetexSignature *b,
                                       size_t *permutation,
                                       size_t perm_len,
                                       double *total_cost);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HETEX_H */
