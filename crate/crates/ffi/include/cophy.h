#ifndef COPHY_H
#define COPHY_H

/* This file is regenerated by build.rs; edit the Rust sources instead. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

typedef enum CophyStatus {
  COPHY_STATUS_OK = 0,
  COPHY_STATUS_NULL_POINTER = 1,
  COPHY_STATUS_INVALID_UTF8 = 2,
  COPHY_STATUS_PARSE_ERROR = 3,
  COPHY_STATUS_INVALID_RECONCILIATION = 4,
  COPHY_STATUS_NOT_PLANAR = 5,
  COPHY_STATUS_NOT_TIME_CONSISTENT = 6,
  COPHY_STATUS_OUT_OF_RANGE = 7,
  COPHY_STATUS_LIMIT_EXCEEDED = 8,
  COPHY_STATUS_PANIC = 9,
} CophyStatus;

typedef enum CophyAlgorithm {
  COPHY_ALGORITHM_PLANAR = 0,
  COPHY_ALGORITHM_SHS = 1,
  COPHY_ALGORITHM_SMP = 2,
} CophyAlgorithm;

/*
 Parsed instance file.
 */
typedef struct CophyInstance CophyInstance;

/*
 A computed drawing with its document.
 */
typedef struct CophyLayout CophyLayout;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message of the last failure on this thread, or NULL. The pointer stays
 valid until the next failing call on the same thread.
 */
const char *cophy_last_error_message(void);

/*
 Library version as a static NUL-terminated string.
 */
const char *cophy_version(void);

/*
 Parses an instance file's text.

 # Safety
 `text` must be NUL-terminated; `out` must be writable.
 */
enum CophyStatus cophy_instance_parse(const char *text, struct CophyInstance **out);

/*
 # Safety
 `inst` must come from [`cophy_instance_parse`] and not be used afterwards.
 */
void cophy_instance_free(struct CophyInstance *inst);

/*
 Number of named mappings in the instance.

 # Safety
 Pointers must be valid.
 */
enum CophyStatus cophy_instance_gamma_count(const struct CophyInstance *inst, size_t *out);

/*
 Whether the instance admits a crossing-free drawing.

 # Safety
 Pointers must be valid.
 */
enum CophyStatus cophy_instance_is_planar(const struct CophyInstance *inst, bool *out);

/*
 Checks the validity conditions of one mapping; `*valid` is false with
 the violations in the error message when they fail.

 # Safety
 Pointers must be valid.
 */
enum CophyStatus cophy_validate(const struct CophyInstance *inst, int32_t gamma, bool *valid);

/*
 # Safety
 Pointers must be valid.
 */
enum CophyStatus cophy_time_consistent(const struct CophyInstance *inst, int32_t gamma, bool *out);

/*
 Draws one mapping.

 # Safety
 Pointers must be valid; `out` receives a handle to free with
 [`cophy_layout_free`].
 */
enum CophyStatus cophy_layout(const struct CophyInstance *inst,
                              int32_t gamma,
                              enum CophyAlgorithm algorithm,
                              bool compact_y,
                              struct CophyLayout **out);

/*
 # Safety
 `layout` must come from [`cophy_layout`] and not be used afterwards.
 */
void cophy_layout_free(struct CophyLayout *layout);

/*
 # Safety
 Pointers must be valid.
 */
enum CophyStatus cophy_layout_crossings(const struct CophyLayout *layout, size_t *out);

/*
 Canonical JSON of the layout; free the string with [`cophy_string_free`].

 # Safety
 Pointers must be valid.
 */
enum CophyStatus cophy_layout_json(const struct CophyLayout *layout, char **out);

/*
 SVG of the layout. `style` is `plain`, `default`, a style file path or
 NULL for the default style.

 # Safety
 Pointers must be valid; `style` may be NULL.
 */
enum CophyStatus cophy_layout_svg(const struct CophyLayout *layout, const char *style, char **out);

/*
 Exhaustive minimum crossing count of one mapping.

 # Safety
 Pointers must be valid.
 */
enum CophyStatus cophy_oracle_min_crossings(const struct CophyInstance *inst,
                                            int32_t gamma,
                                            uint64_t max_states,
                                            size_t *out);

/*
 Frees a string returned by this library.

 # Safety
 `s` must come from this library and not be used afterwards.
 */
void cophy_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* COPHY_H */
