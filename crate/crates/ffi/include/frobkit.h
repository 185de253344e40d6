#ifndef FROBKIT_H
#define FROBKIT_H

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

typedef enum FkStatus {
  FK_STATUS_OK = 0,
  FK_STATUS_NULL_POINTER = 1,
  FK_STATUS_UTF8 = 2,
  FK_STATUS_PARSE = 3,
  FK_STATUS_INVALID = 4,
  FK_STATUS_PRECONDITION = 5,
  FK_STATUS_OUT_OF_RANGE = 6,
  FK_STATUS_EVAL = 7,
  FK_STATUS_PANIC = 8,
} FkStatus;

typedef struct FkChart FkChart;

typedef struct FkField FkField;

typedef struct FkOutcome FkOutcome;

// Overrides for [`fk_run`]; negative `points` or `seed` and non-positive `tol` keep the manifest's value.
typedef struct FkFlags {
  int64_t points;
  int64_t seed;
  double tol;
} FkFlags;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread (empty after a success). Valid until the next call.
const char *fk_last_error(void);

// Library name and version, statically allocated.
const char *fk_version(void);

// # Safety
// `s` must come from this library or be null.
void fk_string_free(char *s);

// Chart with coordinates `names[0..n]`; a complex chart also carries conjugate variables.
//
// # Safety
// `names` must point to `n` NUL-terminated strings.
enum FkStatus fk_chart_new(const char *const *names, size_t n, bool complex, struct FkChart **out);

// # Safety
// `chart` must come from [`fk_chart_new`] or be null.
void fk_chart_free(struct FkChart *chart);

// Number of coordinates.
//
// # Safety
// `chart` must be a live handle.
size_t fk_chart_dim(const struct FkChart *chart);

// # Safety
// `chart` must be a live handle and `src` a NUL-terminated string.
enum FkStatus fk_field_parse(const struct FkChart *chart, const char *src, struct FkField **out);

// # Safety
// `field` must come from this library or be null.
void fk_field_free(struct FkField *field);

// Partial derivative with respect to variable `var` (conjugate variables follow the coordinates).
//
// # Safety
// `field` must be a live handle.
enum FkStatus fk_field_diff(const struct FkField *field, size_t var, struct FkField **out);

// Canonical text of the field, parseable by [`fk_field_parse`]; release with [`fk_string_free`].
//
// # Safety
// `field` must be a live handle.
enum FkStatus fk_field_to_string(const struct FkField *field, char **out);

// Value at the point whose coordinates are the constant expressions `coords[0..n]`.
//
// # Safety
// `field` must be a live handle, `coords` must point to `n` NUL-terminated strings and
// `re`, `im` to writable doubles.
enum FkStatus fk_field_eval(const struct FkField *field,
                            const char *const *coords,
                            size_t n,
                            double *re,
                            double *im);

// Run `subcommand` on manifest text. Succeeds whenever a report was produced; the check
// verdict is [`fk_outcome_exit_code`] (0 pass, 1 a check failed, 2 input error).
//
// # Safety
// `subcommand` and `manifest` must be NUL-terminated strings; `flags` may be null.
enum FkStatus fk_run(const char *subcommand,
                     const char *manifest,
                     const struct FkFlags *flags,
                     struct FkOutcome **out);

// # Safety
// `outcome` must be a live handle.
int32_t fk_outcome_exit_code(const struct FkOutcome *outcome);

// Report document text; release with [`fk_string_free`].
//
// # Safety
// `outcome` must be a live handle.
char *fk_outcome_report(const struct FkOutcome *outcome);

// Manifest of the constructed structure, or null when the subcommand constructs nothing.
//
// # Safety
// `outcome` must be a live handle.
char *fk_outcome_emitted(const struct FkOutcome *outcome);

// # Safety
// `outcome` must come from [`fk_run`] or be null.
void fk_outcome_free(struct FkOutcome *outcome);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FROBKIT_H */
