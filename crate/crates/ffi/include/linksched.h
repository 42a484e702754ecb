#ifndef LINKSCHED_H
#define LINKSCHED_H

/* Generated by cbindgen; do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

typedef enum LsStatus {
  LS_STATUS_OK = 0,
  LS_STATUS_NULL_POINTER = 1,
  LS_STATUS_INVALID_UTF8 = 2,
  LS_STATUS_INVALID_ARGUMENT = 3,
  // The library reported an error; see the last error message.
  LS_STATUS_FAILED = 4,
  LS_STATUS_BUFFER_TOO_SMALL = 5,
  LS_STATUS_PANIC = 6,
} LsStatus;

typedef enum LsAlgorithm {
  LS_ALGORITHM_CENTRALIZED = 0,
  LS_ALGORITHM_DISTRIBUTED_NONADAPTIVE = 1,
  LS_ALGORITHM_DISTRIBUTED_ADAPTIVE = 2,
} LsAlgorithm;

typedef enum LsDuplex {
  LS_DUPLEX_HALF = 0,
  LS_DUPLEX_FULL = 1,
} LsDuplex;

typedef enum LsPreset {
  LS_PRESET_THEORY_SAFE = 0,
  LS_PRESET_PRACTICAL = 1,
} LsPreset;

// An instance: nodes, links and physical parameters.
typedef struct LsInstance LsInstance;

// The outcome of one scheduling run.
typedef struct LsSchedule LsSchedule;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or null. The pointer is
// valid until the next failing call on the same thread.
const char *ls_last_error_message(void);

// # Safety
// `s` must be null or a string returned by this library, freed once.
void ls_string_free(char *s);

// Parses an instance from its JSON text.
//
// # Safety
// `json` must be a NUL-terminated string; out-parameters must be writable.
enum LsStatus ls_instance_from_json(const char *json, struct LsInstance **out_instance);

// Random instance with senders uniform in `[0, side]^2` and lengths
// log-uniform in `[d_min, d_max]`.
//
// # Safety
// Out-parameters must be writable.
enum LsStatus ls_instance_generate(uint64_t seed,
                                   size_t m,
                                   double side,
                                   double d_min,
                                   double d_max,
                                   struct LsInstance **out_instance);

// # Safety
// `inst` must be null or a handle from this library, freed once.
void ls_instance_free(struct LsInstance *inst);

// Number of links, or 0 for a null handle.
//
// # Safety
// `inst` must be null or a live handle.
size_t ls_instance_link_count(const struct LsInstance *inst);

// # Safety
// `inst` must be a live handle; out-parameters must be writable.
enum LsStatus ls_instance_to_json(const struct LsInstance *inst, char **out_json);

// Runs a scheduler on `inst` with a preset's constants.
//
// # Safety
// `inst` must be a live handle; the enum arguments must hold declared
// values; out-parameters must be writable.
enum LsStatus ls_schedule_run(const struct LsInstance *inst,
                              enum LsAlgorithm algorithm,
                              enum LsDuplex duplex,
                              enum LsPreset preset,
                              uint64_t seed,
                              struct LsSchedule **out_schedule);

// # Safety
// `s` must be null or a handle from this library, freed once.
void ls_schedule_free(struct LsSchedule *s);

// Number of selected links, or 0 for a null handle.
//
// # Safety
// `s` must be null or a live handle.
size_t ls_schedule_selected_count(const struct LsSchedule *s);

// Copies the selected link ids into `buf`. Fails with `BufferTooSmall`
// (and still reports the needed length) when `len` is too short.
//
// # Safety
// `buf` must hold `len` writable elements (may be null when `len` is 0);
// `written` must be writable.
enum LsStatus ls_schedule_selected(const struct LsSchedule *s,
                                   uint32_t *buf,
                                   size_t len,
                                   size_t *written);

// Schedule length in slots, or 0 for a null handle.
//
// # Safety
// `s` must be null or a live handle.
uint64_t ls_schedule_total_slots(const struct LsSchedule *s);

// # Safety
// `s` must be null or a live handle.
bool ls_schedule_timed_out(const struct LsSchedule *s);

// # Safety
// `s` must be a live handle; out-parameters must be writable.
enum LsStatus ls_schedule_to_json(const struct LsSchedule *s, char **out_json);

// Whether the given links can all transmit successfully in one slot.
//
// # Safety
// `inst` must be a live handle; `links` must hold `len` elements (may be
// null when `len` is 0); out-parameters must be writable.
enum LsStatus ls_is_independent(const struct LsInstance *inst,
                                const uint32_t *links,
                                size_t len,
                                bool *out_independent);

// Size of a maximum independent set, by exhaustive search. Refuses
// instances with more than `max_m` links.
//
// # Safety
// `inst` must be a live handle; out-parameters must be writable.
enum LsStatus ls_brute_force_opt(const struct LsInstance *inst, size_t max_m, size_t *out_size);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LINKSCHED_H */
