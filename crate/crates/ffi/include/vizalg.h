#ifndef VIZALG_H
#define VIZALG_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result of every FFI call.
typedef enum VizStatus {
  VIZ_STATUS_OK = 0,
  // A required pointer argument was null.
  VIZ_STATUS_NULL_ARGUMENT = 1,
  // A string argument was not valid UTF-8.
  VIZ_STATUS_INVALID_UTF8 = 2,
  // The specification or weight document could not be parsed.
  VIZ_STATUS_PARSE_ERROR = 3,
  // An operator rejected its inputs.
  VIZ_STATUS_OPERATOR_ERROR = 4,
  // A three-way merge found conflicting edits.
  VIZ_STATUS_CONFLICT = 5,
  // An enumeration argument was out of range.
  VIZ_STATUS_INVALID_ARGUMENT = 6,
  // The library panicked; this is a bug.
  VIZ_STATUS_PANIC = 7,
} VizStatus;

// Join columns for the set operators.
typedef enum VizOn {
  VIZ_ON_KEY = 0,
  VIZ_ON_ALL = 1,
} VizOn;

// Conflict policy for union.
typedef enum VizHow {
  VIZ_HOW_LEFT = 0,
  VIZ_HOW_RIGHT = 1,
  VIZ_HOW_MERGE = 2,
} VizHow;

// Opaque relational visualization.
typedef struct VizRel VizRel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failed call on this thread, or null. Valid until the
// next call on the same thread; do not free.
const char *viz_last_error(void);

// Releases a string returned by this library. Null is ignored.
//
// # Safety
// `s` must come from this library and not have been freed.
void viz_string_free(char *s);

// Parses a JSON specification into a handle.
//
// # Safety
// `json` must be a nul-terminated string; `out` must be writable.
enum VizStatus viz_rel_from_json(const char *json, bool keep_unencoded, struct VizRel **out);

// Releases a handle. Null is ignored.
//
// # Safety
// `rel` must come from this library and not have been freed.
void viz_rel_free(struct VizRel *rel);

// Serializes a handle back to a JSON specification.
//
// # Safety
// `rel` must be a live handle; `out` must be writable.
enum VizStatus viz_rel_to_json(const struct VizRel *rel, char **out);

// Union of two visualizations, link repair and indicator encoding included.
//
// # Safety
// `left` and `right` must be live handles; `out` must be writable.
enum VizStatus viz_union(const struct VizRel *left,
                         const struct VizRel *right,
                         uint32_t on,
                         uint32_t how,
                         bool auto_encoding,
                         struct VizRel **out);

// Rows present on both sides, as CSV with an indicator column.
//
// # Safety
// `left` and `right` must be live handles; both outputs must be writable.
enum VizStatus viz_intersect(const struct VizRel *left,
                             const struct VizRel *right,
                             uint32_t on,
                             char **data_csv,
                             char **style_csv);

// Rows present on one side only, as CSV with an indicator column.
//
// # Safety
// `left` and `right` must be live handles; both outputs must be writable.
enum VizStatus viz_difference(const struct VizRel *left,
                              const struct VizRel *right,
                              uint32_t on,
                              char **data_csv,
                              char **style_csv);

// Weighted distance. `weights_toml` may be null for uniform weights.
//
// # Safety
// `a` and `b` must be live handles; `weights_toml` null or nul-terminated;
// `out` must be writable.
enum VizStatus viz_distance(const struct VizRel *a,
                            const struct VizRel *b,
                            const char *weights_toml,
                            double *out);

// Three-way merge. On success `merged` receives a new handle. On
// `VizStatus::Conflict` `conflicts` receives the conflict listing, one per
// line; `conflicts` may be null if the caller does not want it.
//
// # Safety
// All three inputs must be live handles; `merged` must be writable.
enum VizStatus viz_merge(const struct VizRel *base,
                         const struct VizRel *ours,
                         const struct VizRel *theirs,
                         struct VizRel **merged,
                         char **conflicts);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* VIZALG_H */
