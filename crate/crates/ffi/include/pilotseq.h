/* C interface to the pilotseq pilot sequence design library. */

#ifndef PILOTSEQ_H
#define PILOTSEQ_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status code returned by every fallible call.
 */
typedef enum PilotseqStatus {
  PILOTSEQ_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  PILOTSEQ_STATUS_NULL_ARGUMENT = 1,
  /**
   * Arguments violate a precondition (sizes, ranges, matrix invariants).
   */
  PILOTSEQ_STATUS_INVALID_ARGUMENT = 2,
  /**
   * Buffer lengths or matrix orders do not line up.
   */
  PILOTSEQ_STATUS_DIMENSION_MISMATCH = 3,
  /**
   * The interference matrix is not positive definite where required.
   */
  PILOTSEQ_STATUS_NOT_POSITIVE_DEFINITE = 4,
  /**
   * The requested bound does not apply to these parameters.
   */
  PILOTSEQ_STATUS_NOT_APPLICABLE = 5,
  /**
   * The destination buffer is too small.
   */
  PILOTSEQ_STATUS_BUFFER_TOO_SMALL = 6,
  /**
   * Reading or writing a file failed.
   */
  PILOTSEQ_STATUS_IO_ERROR = 7,
} PilotseqStatus;

/**
 * Opaque pilot sequence set handle.
 */
typedef struct PilotseqSet PilotseqSet;

/**
 * Opaque optimizer trace handle.
 */
typedef struct PilotseqTrace PilotseqTrace;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the most recent error message (NUL-terminated, possibly truncated)
 * for the calling thread into `buffer` and returns the full message length
 * in bytes, excluding the NUL. A zero capacity leaves the buffer untouched.
 *
 * # Safety
 * `buffer` must point to at least `capacity` writable bytes, or be null with
 * `capacity` 0.
 */
size_t pilotseq_last_error_message(char *buffer, size_t capacity);

/**
 * Library version as a static NUL-terminated string.
 */
const char *pilotseq_version(void);

/**
 * Creates a sequence set from interleaved complex data.
 *
 * `data` holds `2 * tau * cells * users_per_cell` doubles: pilots are
 * column-major (pilot n occupies entries [2nτ, 2(n+1)τ)), each complex
 * value as re, im.
 *
 * # Safety
 * `data` must point to `data_len` readable doubles; `out` must be a valid
 * pointer to a handle slot.
 */
enum PilotseqStatus pilotseq_set_create(size_t tau,
                                        size_t cells,
                                        size_t users_per_cell,
                                        const double *data,
                                        size_t data_len,
                                        bool unimodular,
                                        struct PilotseqSet **out);

/**
 * Reads back the dimensions of a set.
 *
 * # Safety
 * All pointers must be valid; `set` must be a live handle.
 */
enum PilotseqStatus pilotseq_set_dims(const struct PilotseqSet *set,
                                      size_t *tau,
                                      size_t *cells,
                                      size_t *users_per_cell);

/**
 * Whether the set was flagged unimodular at creation.
 *
 * # Safety
 * `set` must be a live handle; `unimodular` must be writable.
 */
enum PilotseqStatus pilotseq_set_is_unimodular(const struct PilotseqSet *set, bool *unimodular);

/**
 * Copies the pilot matrix out as interleaved doubles (see
 * [`pilotseq_set_create`] for the layout). `buffer_len` must be at least
 * `2 * tau * cells * users_per_cell`.
 *
 * # Safety
 * `buffer` must point to `buffer_len` writable doubles.
 */
enum PilotseqStatus pilotseq_set_copy_data(const struct PilotseqSet *set,
                                           double *buffer,
                                           size_t buffer_len);

/**
 * Releases a set handle. Null is a no-op.
 *
 * # Safety
 * `set` must have been produced by this library and not freed before.
 */
void pilotseq_set_free(struct PilotseqSet *set);

/**
 * Writes a set to a JSON sequence-set file.
 *
 * # Safety
 * `set` must be a live handle; `path` must be a NUL-terminated string.
 */
enum PilotseqStatus pilotseq_set_write_file(const struct PilotseqSet *set, const char *path);

/**
 * Reads a JSON sequence-set file into a new handle.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be writable.
 */
enum PilotseqStatus pilotseq_set_read_file(const char *path, struct PilotseqSet **out);

/**
 * Builds the bound-achieving multi-cell set (K ≥ τ, positive definite B;
 * `beta` is the row-major J×J interference matrix).
 *
 * # Safety
 * `beta` must point to `cells * cells` doubles; `out` must be writable.
 */
enum PilotseqStatus pilotseq_construct_optimal(size_t tau,
                                               size_t users_per_cell,
                                               size_t cells,
                                               const double *beta,
                                               struct PilotseqSet **out);

/**
 * Runs the ETSC-MM optimizer and returns the designed set plus its trace.
 *
 * # Safety
 * `beta` must point to `cells * cells` doubles; `out_set` and `out_trace`
 * must be writable.
 */
enum PilotseqStatus pilotseq_design(size_t tau,
                                    size_t cells,
                                    size_t users_per_cell,
                                    const double *beta,
                                    bool unimodular,
                                    bool accelerate,
                                    size_t max_iterations,
                                    double epsilon,
                                    uint64_t seed,
                                    struct PilotseqSet **out_set,
                                    struct PilotseqTrace **out_trace);

/**
 * Number of recorded objective values (iterations + 1; entry 0 is the
 * initial objective).
 *
 * # Safety
 * `trace` must be a live handle; `len` must be writable.
 */
enum PilotseqStatus pilotseq_trace_len(const struct PilotseqTrace *trace, size_t *len);

/**
 * Copies the per-iteration ETSC values.
 *
 * # Safety
 * `buffer` must point to `buffer_len` writable doubles.
 */
enum PilotseqStatus pilotseq_trace_objectives(const struct PilotseqTrace *trace,
                                              double *buffer,
                                              size_t buffer_len);

/**
 * Releases a trace handle. Null is a no-op.
 *
 * # Safety
 * `trace` must have been produced by this library and not freed before.
 */
void pilotseq_trace_free(struct PilotseqTrace *trace);

/**
 * ETSC of a set under the row-major J×J interference matrix `beta`.
 *
 * # Safety
 * `set` must be a live handle; `beta` must hold `cells²` doubles matching
 * the set's cell count; `out` must be writable.
 */
enum PilotseqStatus pilotseq_etsc(const struct PilotseqSet *set, const double *beta, double *out);

/**
 * TSC of a set (all weights 1).
 *
 * # Safety
 * `set` must be a live handle; `out` must be writable.
 */
enum PilotseqStatus pilotseq_tsc(const struct PilotseqSet *set, double *out);

/**
 * Classical Welch bound N²/τ with N = cells · users.
 *
 * # Safety
 * `out` must be writable.
 */
enum PilotseqStatus pilotseq_welch_bound(size_t tau,
                                         size_t cells,
                                         size_t users_per_cell,
                                         double *out);

/**
 * Two-cell extended Welch bound 2K²(1+β)/(K+β(τ−K)); `NotApplicable`
 * outside K ≤ τ ≤ 2K.
 *
 * # Safety
 * `out` must be writable.
 */
enum PilotseqStatus pilotseq_two_cell_bound(size_t tau,
                                            size_t users_per_cell,
                                            double beta,
                                            double *out);

/**
 * K ≥ τ extended bound (K²/τ)·Σβ; `NotApplicable` when K < τ and
 * `NotPositiveDefinite` when B fails the eigenvalue test.
 *
 * # Safety
 * `beta` must point to `cells * cells` doubles; `out` must be writable.
 */
enum PilotseqStatus pilotseq_new_extended_bound(size_t tau,
                                                size_t cells,
                                                size_t users_per_cell,
                                                const double *beta,
                                                double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PILOTSEQ_H */
