#ifndef KPO_AQC_H
#define KPO_AQC_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum KpoStatus {
  KPO_STATUS_OK = 0,
  KPO_STATUS_NULL_POINTER = 1,
  KPO_STATUS_INVALID_UTF8 = 2,
  KPO_STATUS_INVALID_CONFIG = 3,
  KPO_STATUS_NUMERICAL_FAILURE = 4,
  KPO_STATUS_BUFFER_TOO_SMALL = 5,
  KPO_STATUS_PANIC = 6,
} KpoStatus;

/**
 * A run configuration.
 */
typedef struct KpoConfig KpoConfig;

/**
 * An Ising instance.
 */
typedef struct KpoInstance KpoInstance;

/**
 * The result document of a run.
 */
typedef struct KpoReport KpoReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *kpo_version(void);

/**
 * Message of the last failed call on this thread; empty after a success.
 * Valid until the next library call on the same thread.
 */
const char *kpo_last_error(void);

/**
 * # Safety
 * `s` must come from this library and not have been freed.
 */
void kpo_string_free(char *s);

/**
 * The bundled hard four-spin instance.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum KpoStatus kpo_instance_hard(struct KpoInstance **out);

/**
 * Parses an instance document (1-based indices, decimal-string values).
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` a valid pointer.
 */
enum KpoStatus kpo_instance_from_json(const char *json, struct KpoInstance **out);

/**
 * Random instance with couplings and fields drawn in `[-1, 1]` and
 * normalized to maximum magnitude 1.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum KpoStatus kpo_instance_random(size_t n, uint64_t seed, struct KpoInstance **out);

/**
 * Number of spins; 0 for a null handle.
 *
 * # Safety
 * `inst` must be null or a live handle.
 */
size_t kpo_instance_size(const struct KpoInstance *inst);

/**
 * Exhaustive minimization. Writes `±1` into `spins[0..len]` (`len` must be
 * at least the instance size) and the minimum energy into `energy`.
 *
 * # Safety
 * `spins` must point to `len` writable bytes; `inst` and `energy` must be valid.
 */
enum KpoStatus kpo_instance_brute_force(const struct KpoInstance *inst,
                                        int8_t *spins,
                                        size_t len,
                                        double *energy);

/**
 * # Safety
 * `inst` must be null or a handle not yet freed.
 */
void kpo_instance_free(struct KpoInstance *inst);

/**
 * Parses a run-configuration document.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` a valid pointer.
 */
enum KpoStatus kpo_config_from_json(const char *json, struct KpoConfig **out);

/**
 * Replaces the configured instance with a copy of `inst`.
 *
 * # Safety
 * Both handles must be live.
 */
enum KpoStatus kpo_config_set_instance(struct KpoConfig *cfg, const struct KpoInstance *inst);

/**
 * # Safety
 * `cfg` must be null or a handle not yet freed.
 */
void kpo_config_free(struct KpoConfig *cfg);

/**
 * Runs the configured protocol.
 *
 * # Safety
 * `cfg` must be live; `out` a valid pointer.
 */
enum KpoStatus kpo_run_protocol(const struct KpoConfig *cfg, struct KpoReport **out);

/**
 * Failure probability, success probability and residual energy of a run.
 * Any output pointer may be null.
 *
 * # Safety
 * `report` must be live; non-null outputs must be writable.
 */
enum KpoStatus kpo_report_metrics(const struct KpoReport *report,
                                  double *failure,
                                  double *success,
                                  double *residual);

/**
 * The full result document as JSON; free with [`kpo_string_free`].
 *
 * # Safety
 * `report` must be live; `out` a valid pointer.
 */
enum KpoStatus kpo_report_to_json(const struct KpoReport *report, char **out);

/**
 * # Safety
 * `report` must be null or a handle not yet freed.
 */
void kpo_report_free(struct KpoReport *report);

/**
 * Matrix element `<m|P+|n>` of the positive-quadrature projector in a
 * `levels`-state Fock basis.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum KpoStatus kpo_sign_projector_entry(size_t levels, size_t m, size_t n, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* KPO_AQC_H */
