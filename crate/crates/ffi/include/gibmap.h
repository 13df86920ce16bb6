#ifndef GIBMAP_H
#define GIBMAP_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

// Result codes.
typedef enum GibStatus {
  GIB_STATUS_OK = 0,
  // A required pointer argument was null.
  GIB_STATUS_NULL_ARGUMENT = 1,
  // A string argument was not valid UTF-8.
  GIB_STATUS_INVALID_UTF8 = 2,
  // The network, evidence or query parameters were rejected.
  GIB_STATUS_INVALID_INPUT = 3,
  // No explanation of positive probability exists.
  GIB_STATUS_NO_EXPLANATION = 4,
  // Exhaustive enumeration would exceed its cap.
  GIB_STATUS_TOO_LARGE = 5,
  // An internal error; the library state is still usable.
  GIB_STATUS_INTERNAL = 6,
} GibStatus;

// Opaque validated network.
typedef struct GibNetwork GibNetwork;

// Query parameters for [`gib_explain_json`].
typedef struct GibQuery {
  // Relaxation of the independence test; 0 demands exact independence.
  double delta;
  // Relative tolerance for treating two conditionals as equal.
  double eps;
  // Number of explanations to return.
  uint32_t k;
  // Allow expansions to narrow the set of a non-evidence node.
  bool refine_target;
} GibQuery;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Default query: exact test with relative tolerance 1e-9, one explanation,
// target narrowing enabled.
struct GibQuery gib_query_default(void);

// Parses and validates a network from JSON text.
//
// # Safety
// `json` must be a NUL-terminated string and `out` valid for writes.
enum GibStatus gib_network_from_json(const char *json, struct GibNetwork **out);

// Reads and validates a network file.
//
// # Safety
// `path` must be a NUL-terminated string and `out` valid for writes.
enum GibStatus gib_network_from_file(const char *path, struct GibNetwork **out);

// Releases a network. Null is ignored.
//
// # Safety
// `net` must be null or a handle from this library not yet freed.
void gib_network_free(struct GibNetwork *net);

// Number of variables; 0 for a null handle.
//
// # Safety
// `net` must be null or a live handle.
size_t gib_network_variable_count(const struct GibNetwork *net);

// Runs the best-first search and writes the explanations as JSON to `out`.
// `evidence_json` may be null for no evidence and `query` null for
// [`gib_query_default`].
//
// # Safety
// `net` must be a live handle, string arguments NUL-terminated, `query`
// null or valid for reads, and `out` valid for writes.
enum GibStatus gib_explain_json(const struct GibNetwork *net,
                                const char *evidence_json,
                                const struct GibQuery *query,
                                char **out);

// Finds the best explanation by exhaustive enumeration and writes it as
// JSON to `out`.
//
// # Safety
// As for [`gib_explain_json`].
enum GibStatus gib_oracle_json(const struct GibNetwork *net, const char *evidence_json, char **out);

// Releases a string returned by this library. Null is ignored.
//
// # Safety
// `s` must be null or a string from this library not yet freed.
void gib_string_free(char *s);

// Message for the last failed call on this thread; empty after a success.
// The pointer stays valid until the next call into the library on the same
// thread.
const char *gib_last_error(void);

// Library version as a static NUL-terminated string.
const char *gib_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GIBMAP_H */
