#ifndef STABLE_CHSH_H
#define STABLE_CHSH_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Family representatives, in classification order.
 */
typedef enum ScFamily {
  SC_FAMILY_Z4_REG = 0,
  SC_FAMILY_K4_REG = 1,
  SC_FAMILY_D4_125 = 2,
  SC_FAMILY_D4_135 = 3,
  SC_FAMILY_D4_145 = 4,
  SC_FAMILY_D4_12345 = 5,
  SC_FAMILY_D4_REG = 6,
} ScFamily;

typedef enum ScQuantumKind {
  SC_QUANTUM_KIND_BELL = 0,
  SC_QUANTUM_KIND_POVM = 1,
} ScQuantumKind;

/**
 * Status codes.
 */
typedef enum ScStatus {
  SC_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  SC_STATUS_NULL = 1,
  /**
   * Malformed input: bad JSON, unknown name, out-of-range parameter.
   */
  SC_STATUS_INPUT = 2,
  /**
   * The instance violates a checked condition.
   */
  SC_STATUS_CONDITION = 3,
  SC_STATUS_NUMERICAL = 4,
  /**
   * A string argument was not valid UTF-8.
   */
  SC_STATUS_UTF8 = 5,
  /**
   * Internal panic; the library state is unchanged.
   */
  SC_STATUS_PANIC = 6,
} ScStatus;

/**
 * Opaque instance handle.
 */
typedef struct ScInstance ScInstance;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Builds a family representative; `family` is an `ScFamily` value and `a`
 * lies in (1/2, 1].
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for a handle.
 */
enum ScStatus sc_family_build(uint32_t family, double a, struct ScInstance **out);

/**
 * Builds a two-qubit realization; `kind` is an `ScQuantumKind` value.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for a handle.
 */
enum ScStatus sc_quantum_build(uint32_t kind, struct ScInstance **out);

/**
 * Parses an instance from a nul-terminated JSON document.
 *
 * # Safety
 * `json` must be a valid C string; `out` must be writable.
 */
enum ScStatus sc_instance_from_json(const char *json, struct ScInstance **out);

/**
 * Serializes an instance; free the result with `sc_string_free`.
 *
 * # Safety
 * `inst` must be a live handle; `out` must be writable.
 */
enum ScStatus sc_instance_to_json(const struct ScInstance *inst, char **out);

/**
 * Local dimensions and number of measurement outcomes.
 *
 * # Safety
 * `inst` must be a live handle; the out-pointers must be writable.
 */
enum ScStatus sc_instance_dims(const struct ScInstance *inst,
                               uintptr_t *dim_a,
                               uintptr_t *dim_c,
                               uintptr_t *outcomes);

/**
 * CHSH value with the standard signs `(+, +, +, -)`.
 *
 * # Safety
 * `inst` must be a live handle; `out` must be writable.
 */
enum ScStatus sc_chsh_value(const struct ScInstance *inst, double *out);

/**
 * Runs the verification pipeline to word length `depth`. Writes the JSON
 * report to `report` (free with `sc_string_free`) and whether all stages
 * passed to `passed`. A failed stage is not an error: the status is `OK`.
 *
 * # Safety
 * `inst` must be a live handle; the out-pointers must be writable.
 */
enum ScStatus sc_verify(const struct ScInstance *inst,
                        uintptr_t depth,
                        char **report,
                        bool *passed);

/**
 * Classification with enumeration bound `n_max`, as a JSON array. Returns
 * `CONDITION` when the result differs from the expected list.
 *
 * # Safety
 * `out` must be writable.
 */
enum ScStatus sc_classify(uint32_t n_max, char **out);

/**
 * Message of the last failure on this thread, or null. Valid until the
 * next call into the library on the same thread; do not free.
 */
const char *sc_last_error(void);

/**
 * # Safety
 * `s` must be null or a string returned by this library, freed once.
 */
void sc_string_free(char *s);

/**
 * # Safety
 * `inst` must be null or a handle returned by this library, freed once.
 */
void sc_instance_free(struct ScInstance *inst);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* STABLE_CHSH_H */
