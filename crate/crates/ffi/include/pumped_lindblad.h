#ifndef PUMPED_LINDBLAD_H
#define PUMPED_LINDBLAD_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum PlStatus {
  PL_STATUS_OK = 0,
  PL_STATUS_NULL_POINTER = 1,
  PL_STATUS_INVALID_UTF8 = 2,
  PL_STATUS_CONFIG = 3,
  PL_STATUS_NUMERICAL = 4,
  PL_STATUS_BUFFER_TOO_SMALL = 5,
  PL_STATUS_PANIC = 6,
} PlStatus;

/**
 * Opaque handle to a validated model.
 */
typedef struct PlModel PlModel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Parses and validates a JSON run configuration.
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` a valid pointer.
 */
enum PlStatus pl_model_from_json(const char *json, struct PlModel **out);

/**
 * # Safety
 * `model` must come from [`pl_model_from_json`] and not be freed twice.
 */
void pl_model_free(struct PlModel *model);

/**
 * Assumption report as JSON.
 *
 * # Safety
 * `model` must be a live handle and `out` a valid pointer.
 */
enum PlStatus pl_check_report(const struct PlModel *model, char **out);

/**
 * Trajectory CSV over the configured time span.
 *
 * # Safety
 * `model` must be a live handle and `out` a valid pointer.
 */
enum PlStatus pl_evolve_csv(const struct PlModel *model, char **out);

/**
 * Floquet report as JSON; `order_check` adds the Kato order measurement.
 *
 * # Safety
 * `model` must be a live handle and `out` a valid pointer.
 */
enum PlStatus pl_floquet_report(const struct PlModel *model, bool order_check, char **out);

/**
 * Level populations of the stationary state of the averaged generator.
 * `written` always receives the number of levels; when `len` is smaller the
 * call returns `PL_STATUS_BUFFER_TOO_SMALL` and writes nothing to `out`.
 *
 * # Safety
 * `out` must point to `len` writable doubles (or be null with `len == 0`),
 * `written` must be valid.
 */
enum PlStatus pl_stationary_populations(const struct PlModel *model,
                                        double *out,
                                        size_t len,
                                        size_t *written);

/**
 * # Safety
 * `s` must come from this library and not be freed twice.
 */
void pl_string_free(char *s);

/**
 * Message of the last failed call on this thread, or null. The pointer stays
 * valid until the next library call on the same thread.
 */
const char *pl_last_error_message(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PUMPED_LINDBLAD_H */
