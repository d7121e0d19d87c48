#ifndef TSD_H
#define TSD_H

/* Generated by cbindgen from crates/tsd-ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every call.
 */
typedef enum TsdStatus {
  TSD_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  TSD_STATUS_NULL = 1,
  /**
   * A string argument was not valid UTF-8.
   */
  TSD_STATUS_UTF8 = 2,
  TSD_STATUS_PARSE = 3,
  TSD_STATUS_TYPE = 4,
  /**
   * Rust code panicked; the handle should be freed and not reused.
   */
  TSD_STATUS_PANIC = 5,
  /**
   * An index or argument was out of range.
   */
  TSD_STATUS_RANGE = 6,
} TsdStatus;

/**
 * How a run ended. Values match the command-line exit codes.
 */
typedef enum TsdOutcome {
  TSD_OUTCOME_FINAL = 0,
  TSD_OUTCOME_STUCK = 2,
  TSD_OUTCOME_FUEL_EXHAUSTED = 3,
  TSD_OUTCOME_INVALID = 4,
} TsdOutcome;

/**
 * Opaque machine handle.
 */
typedef struct TsdMachine TsdMachine;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Parses, typechecks and translates `source`, then builds a machine.
 *
 * `fuel` of 0 selects the default budget. `schedule` may be null for
 * round robin, or one of "rr", "rand:SEED", "par:K". On success
 * `*out_machine` owns a handle that must be released with `tsd_machine_free`.
 *
 * # Safety
 * `source` and a non-null `schedule` must be NUL-terminated strings;
 * `out_machine` must be writable.
 */
enum TsdStatus tsd_machine_new(const char *source,
                               uint64_t fuel,
                               const char *schedule,
                               struct TsdMachine **out_machine);

/**
 * Runs to completion. `*out_value` receives the final integer, or 0 when
 * the result is not an integer or the run did not finish. After a Stuck
 * or Invalid outcome `tsd_last_error_message` holds the diagnosis.
 *
 * # Safety
 * `machine` must come from `tsd_machine_new`; out-pointers must be
 * writable.
 */
enum TsdStatus tsd_machine_run(struct TsdMachine *machine,
                               enum TsdOutcome *out_outcome,
                               int64_t *out_value);

/**
 * Number of values peeked so far.
 *
 * # Safety
 * `machine` must come from `tsd_machine_new`; `out_count` must be writable.
 */
enum TsdStatus tsd_machine_peek_count(const struct TsdMachine *machine, size_t *out_count);

/**
 * The `index`-th peeked value.
 *
 * # Safety
 * `machine` must come from `tsd_machine_new`; `out_value` must be writable.
 */
enum TsdStatus tsd_machine_peek_at(const struct TsdMachine *machine,
                                   size_t index,
                                   int64_t *out_value);

/**
 * Number of cells created so far.
 *
 * # Safety
 * `machine` must come from `tsd_machine_new`; `out_count` must be writable.
 */
enum TsdStatus tsd_machine_cell_count(const struct TsdMachine *machine, size_t *out_count);

/**
 * Current value of the `index`-th cell, in creation order.
 *
 * # Safety
 * `machine` must come from `tsd_machine_new`; `out_value` must be writable.
 */
enum TsdStatus tsd_machine_cell_value(const struct TsdMachine *machine,
                                      size_t index,
                                      int64_t *out_value);

/**
 * Number of propagation rounds run so far.
 *
 * # Safety
 * `machine` must come from `tsd_machine_new`; `out_count` must be writable.
 */
enum TsdStatus tsd_machine_step_count(const struct TsdMachine *machine, size_t *out_count);

/**
 * Releases a handle. Null is ignored.
 *
 * # Safety
 * `machine` must come from `tsd_machine_new` and not be used afterwards.
 */
void tsd_machine_free(struct TsdMachine *machine);

/**
 * Message for the last failed call on this thread, or "" if none. The
 * pointer stays valid until the next failing call on this thread.
 */
const char *tsd_last_error_message(void);

/**
 * Library version as a static string.
 */
const char *tsd_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TSD_H */
