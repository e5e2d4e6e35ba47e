#ifndef LATTICE_INDEX_H
#define LATTICE_INDEX_H

/* Generated by cbindgen; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/*
 Result codes; 0 to 2 coincide with the command-line exit codes.
 */
typedef enum LiStatus {
  LI_STATUS_OK = 0,
  /*
   The input failed to parse or validate.
   */
  LI_STATUS_INPUT_ERROR = 1,
  /*
   Index routes or invariants disagree.
   */
  LI_STATUS_DISAGREEMENT = 2,
  LI_STATUS_NULL_ARGUMENT = 3,
  LI_STATUS_INVALID_UTF8 = 4,
  /*
   A Rust panic was caught at the boundary.
   */
  LI_STATUS_PANIC = 5,
} LiStatus;

/*
 Outcome of a verification run.
 */
typedef struct LiReport LiReport;

/*
 A validated system of any supported kind.
 */
typedef struct LiSystem LiSystem;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message of the last failure on this thread; valid until the next `li_*` call
 on the same thread. Never null.
 */
const char *li_last_error_message(void);

/*
 Library version as a static string.
 */
const char *li_version(void);

/*
 Parses a system from JSON text.

 # Safety
 `json` must be a NUL-terminated string and `out` a valid pointer.
 */
enum LiStatus li_system_from_json(const char *json, struct LiSystem **out);

/*
 Loads a system file.

 # Safety
 `path` must be a NUL-terminated string and `out` a valid pointer.
 */
enum LiStatus li_system_from_file(const char *path, struct LiSystem **out);

/*
 Builds a named builtin system; its known index is checked by [`li_verify`].

 # Safety
 `name` must be a NUL-terminated string and `out` a valid pointer.
 */
enum LiStatus li_system_builtin(const char *name, struct LiSystem **out);

/*
 Releases a system; null is ignored.

 # Safety
 `sys` must come from an `li_system_*` constructor and not be freed twice.
 */
void li_system_free(struct LiSystem *sys);

/*
 Schema name of the system ("walk", "qca_circuit", …), or null for a null handle.

 # Safety
 `sys` must be null or a live handle.
 */
const char *li_system_kind(const struct LiSystem *sys);

/*
 Index as a fraction num/den in lowest terms; walks give den = 1 and a signed num.

 # Safety
 `sys` must be a live handle; `num` and `den` valid pointers.
 */
enum LiStatus li_index(const struct LiSystem *sys, int64_t *num, int64_t *den);

/*
 Runs the full invariant suite. `tol_factor` scales every tolerance (1.0 for the
 defaults); `grid` is the dispersion grid (0 for the default). The report is
 returned even when checks fail; the status tells whether it passed.

 # Safety
 `sys` must be a live handle and `out` a valid pointer.
 */
enum LiStatus li_verify(const struct LiSystem *sys,
                        double tol_factor,
                        size_t grid,
                        uint64_t seed,
                        struct LiReport **out);

/*
 Whether the report passed; false for null.

 # Safety
 `r` must be null or a live handle.
 */
bool li_report_passed(const struct LiReport *r);

/*
 The report as JSON; free with [`li_string_free`]. Null on failure.

 # Safety
 `r` must be null or a live handle.
 */
char *li_report_json(const struct LiReport *r);

/*
 Releases a report; null is ignored.

 # Safety
 `r` must come from [`li_verify`] and not be freed twice.
 */
void li_report_free(struct LiReport *r);

/*
 Releases a string returned by this library; null is ignored.

 # Safety
 `s` must come from this library and not be freed twice.
 */
void li_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LATTICE_INDEX_H */
