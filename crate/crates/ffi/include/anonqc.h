#ifndef ANONQC_H
#define ANONQC_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Eavesdropper acting on every channel.
 */
typedef enum AnqEve {
  ANQ_EVE_NONE = 0,
  /**
   * Measure in a uniformly random basis and resend.
   */
  ANQ_EVE_INTERCEPT_RESEND = 1,
  /**
   * Always measure in the computational basis.
   */
  ANQ_EVE_INTERCEPT_COMPUTATIONAL = 2,
  /**
   * Always measure in the Fourier basis.
   */
  ANQ_EVE_INTERCEPT_FOURIER = 3,
} AnqEve;

/**
 * Result code of every fallible call.
 */
typedef enum AnqStatus {
  ANQ_STATUS_OK = 0,
  /**
   * A required pointer was null.
   */
  ANQ_STATUS_NULL_POINTER = 1,
  /**
   * An argument was out of range.
   */
  ANQ_STATUS_DOMAIN = 2,
  /**
   * The request exceeds the dense engine's cap.
   */
  ANQ_STATUS_CAPABILITY = 3,
  /**
   * Inconsistent protocol bookkeeping.
   */
  ANQ_STATUS_PROTOCOL = 4,
  ANQ_STATUS_INTERNAL = 5,
  /**
   * A string argument was not valid UTF-8.
   */
  ANQ_STATUS_INVALID_UTF8 = 6,
  /**
   * The library panicked; the handle state is unspecified.
   */
  ANQ_STATUS_PANIC = 7,
  /**
   * The caller's buffer is too small; the required length was written.
   */
  ANQ_STATUS_BUFFER_TOO_SMALL = 8,
} AnqStatus;

/**
 * A finished run. Opaque to C.
 */
typedef struct AnqRun AnqRun;

/**
 * Settings for a protocol run. Obtain defaults from [`anq_run_options_default`].
 */
typedef struct AnqRunOptions {
  /**
   * Qudit dimension; 0 selects the smallest admissible one.
   */
  size_t d;
  /**
   * Protocol one: require d to exceed the total number of data items.
   */
  bool strict_d;
  /**
   * Protocol one: largest admissible value; negative uses the data maximum.
   */
  int64_t xi;
  /**
   * Protocol two: singlet test copies per participant.
   */
  size_t tau;
  /**
   * Decoys per channel session; negative means one per payload qudit.
   */
  int64_t decoys;
  /**
   * Mismatches tolerated before a channel aborts.
   */
  size_t threshold;
  enum AnqEve eve;
  uint64_t seed;
} AnqRunOptions;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *anq_version(void);

/**
 * Message of the last failed call on this thread, or null if none. The
 * pointer stays valid until the next failing call on the same thread.
 */
const char *anq_last_error(void);

struct AnqRunOptions anq_run_options_default(void);

/**
 * Run protocol two on one value per participant.
 *
 * # Safety
 * `values` must point to `n` readable integers; `options` and `out` must be
 * valid pointers. On success `*out` receives a handle for [`anq_run_free`].
 */
enum AnqStatus anq_run_protocol_two(const size_t *values,
                                    size_t n,
                                    const struct AnqRunOptions *options,
                                    struct AnqRun **out);

/**
 * Run protocol one. Participant `i` holds `lens[i]` values starting at
 * `sets[i]`.
 *
 * # Safety
 * `sets` and `lens` must each point to `n` entries, and every `sets[i]` to
 * `lens[i]` readable integers. `options` and `out` must be valid pointers.
 */
enum AnqStatus anq_run_protocol_one(const size_t *const *sets,
                                    const size_t *lens,
                                    size_t n,
                                    const struct AnqRunOptions *options,
                                    struct AnqRun **out);

/**
 * # Safety
 * `run` must be null or a handle from this library that was not yet freed.
 */
void anq_run_free(struct AnqRun *run);

/**
 * Whether an eavesdropper or a failed singlet test stopped the run.
 *
 * # Safety
 * `run` must be a live handle.
 */
bool anq_run_aborted(const struct AnqRun *run);

/**
 * Copy the recovered data into `buf`. Protocol one yields the counts
 * `R^0..R^xi`; protocol two the values in slot order. `*len` is always set to
 * the number of entries available.
 *
 * # Safety
 * `run` must be a live handle, `len` a valid pointer, and `buf` must have
 * room for `cap` entries (it may be null when `cap` is 0).
 */
enum AnqStatus anq_run_recovered(const struct AnqRun *run, size_t *buf, size_t cap, size_t *len);

/**
 * The run's transcript as JSON. Release with [`anq_string_free`]; null on
 * failure.
 *
 * # Safety
 * `run` must be a live handle.
 */
char *anq_run_transcript_json(const struct AnqRun *run);

/**
 * # Safety
 * `s` must be null or a string returned by this library and not yet freed.
 */
void anq_string_free(char *s);

/**
 * Replay a JSON transcript and report whether every round is consistent.
 *
 * # Safety
 * `json` must be a NUL-terminated string and `consistent` a valid pointer.
 */
enum AnqStatus anq_verify_transcript(const char *json, bool *consistent);

/**
 * Compare the label swap rule with the dense oracle for cat labels with `m`
 * shift marks. `samples == 0` checks every case.
 *
 * # Safety
 * `passed` must be a valid pointer.
 */
enum AnqStatus anq_swap_check(size_t d, size_t m, size_t samples, uint64_t seed, bool *passed);

/**
 * Per-decoy detection probability of uniform-basis intercept-resend, or a
 * negative value when `d < 2`.
 */
double anq_intercept_detection_probability(size_t d);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ANONQC_H */
