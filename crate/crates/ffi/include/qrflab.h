#ifndef QRFLAB_H
#define QRFLAB_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum {
  QRF_STATUS_OK = 0,
  QRF_STATUS_NULL_POINTER = 1,
  QRF_STATUS_INVALID_UTF8 = 2,
  QRF_STATUS_PARSE_ERROR = 3,
  QRF_STATUS_INVALID_ARGUMENT = 4,
  QRF_STATUS_DIMENSION_MISMATCH = 5,
  QRF_STATUS_DOMAIN_VIOLATION = 6,
  /**
   * The call ran but a check it evaluated failed; outputs are still set.
   */
  QRF_STATUS_CHECK_FAILED = 7,
  QRF_STATUS_PANIC = 8,
} QrfStatus;

/**
 * Which frame-change operator to build.
 */
typedef enum {
  QRF_TRANSFORM_KIND_PERSPECTIVAL = 0,
  QRF_TRANSFORM_KIND_PASSIVE = 1,
} QrfTransformKind;

typedef struct QrfConfig QrfConfig;

typedef struct QrfGroup QrfGroup;

typedef struct QrfState QrfState;

typedef struct QrfTransform QrfTransform;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread. Valid until the next
 * failing call on the same thread; never null.
 */
const char *qrf_last_error(void);

/**
 * Library version as a static string.
 */
const char *qrf_version(void);

/**
 * # Safety
 * `s` must be null or a string returned by this library, not yet freed.
 */
void qrf_string_free(char *s);

/**
 * Builds a group from a builtin name such as `"Z3"`, `"Z2xZ2"` or `"S3"`.
 *
 * # Safety
 * `name` must be a valid C string and `out` a writable pointer.
 */
QrfStatus qrf_group_new_named(const char *name, QrfGroup **out);

/**
 * Builds a group from a row-major `order × order` multiplication table.
 *
 * # Safety
 * `table` must point to `order * order` readable values and `out` must be
 * writable.
 */
QrfStatus qrf_group_new_table(const size_t *table, size_t order, QrfGroup **out);

/**
 * # Safety
 * `group` must be null or a live handle.
 */
void qrf_group_free(QrfGroup *group);

/**
 * # Safety
 * `group` must be a live handle and `out` writable.
 */
QrfStatus qrf_group_order(const QrfGroup *group, size_t *out);

/**
 * Writes the index of `a·b`.
 *
 * # Safety
 * `group` must be a live handle and `out` writable.
 */
QrfStatus qrf_group_mul(const QrfGroup *group, size_t a, size_t b, size_t *out);

/**
 * # Safety
 * `group` must be a live handle and `out` writable.
 */
QrfStatus qrf_group_inverse(const QrfGroup *group, size_t a, size_t *out);

/**
 * Builds `frames` regular reference frames plus physical systems described
 * by `physical_json`, a JSON array of representation specs such as
 * `["regular", "trivial(2)"]`. A null `physical_json` means no physical
 * systems.
 *
 * # Safety
 * `group` must be a live handle, `physical_json` null or a valid C string,
 * `out` writable.
 */
QrfStatus qrf_config_new(const QrfGroup *group,
                         size_t frames,
                         const char *physical_json,
                         QrfConfig **out);

/**
 * Builds a configuration from a JSON object
 * `{"group": ..., "frames": m, "physical": [...]}`.
 *
 * # Safety
 * `json` must be a valid C string and `out` writable.
 */
QrfStatus qrf_config_from_json(const char *json, QrfConfig **out);

/**
 * # Safety
 * `config` must be null or a live handle.
 */
void qrf_config_free(QrfConfig *config);

/**
 * Dimension of the full Hilbert space.
 *
 * # Safety
 * `config` must be a live handle and `out` writable.
 */
QrfStatus qrf_config_dim(const QrfConfig *config, size_t *out);

/**
 * Creates a state from `dim` interleaved amplitudes. With `normalize` set
 * the vector is rescaled; otherwise it must already have unit norm.
 *
 * # Safety
 * `config` must be a live handle, `amplitudes` must hold `2 * dim`
 * doubles and `out` must be writable.
 */
QrfStatus qrf_state_new(const QrfConfig *config,
                        const double *amplitudes,
                        size_t dim,
                        bool normalize,
                        QrfState **out);

/**
 * # Safety
 * `state` must be null or a live handle.
 */
void qrf_state_free(QrfState *state);

/**
 * # Safety
 * `state` must be a live handle and `out` writable.
 */
QrfStatus qrf_state_dim(const QrfState *state, size_t *out);

/**
 * Copies the amplitudes into `buffer` as `2 * dim` interleaved doubles.
 *
 * # Safety
 * `state` must be a live handle and `buffer` must hold `len` doubles.
 */
QrfStatus qrf_state_amplitudes(const QrfState *state, double *buffer, size_t len);

/**
 * `1 − |⟨a|b⟩|`, zero iff the states agree up to a global phase.
 *
 * # Safety
 * Both handles must be live and `out` writable.
 */
QrfStatus qrf_state_distance(const QrfState *a, const QrfState *b, double *out);

/**
 * Negativity of the physical reduced state across the cut that puts the
 * physical systems listed in `side_a` (0-based) on one side.
 *
 * # Safety
 * `state` must be a live handle, `side_a` must hold `len` values and `out`
 * must be writable.
 */
QrfStatus qrf_state_negativity(const QrfState *state,
                               const size_t *side_a,
                               size_t len,
                               double *out);

/**
 * Concurrence of the physical reduced state; requires two physical qubits.
 *
 * # Safety
 * `state` must be a live handle and `out` writable.
 */
QrfStatus qrf_state_concurrence(const QrfState *state, double *out);

/**
 * Builds the frame change from frame `from` to frame `to`.
 *
 * # Safety
 * `config` must be a live handle and `out` writable.
 */
QrfStatus qrf_transform_new(const QrfConfig *config,
                            QrfTransformKind kind,
                            size_t from,
                            size_t to,
                            QrfTransform **out);

/**
 * # Safety
 * `transform` must be null or a live handle.
 */
void qrf_transform_free(QrfTransform *transform);

/**
 * Applies the transform and returns a new state. Passive transforms
 * reject states outside their domain with `DomainViolation`.
 *
 * # Safety
 * Both handles must be live and `out` writable.
 */
QrfStatus qrf_transform_apply(const QrfTransform *transform, const QrfState *state, QrfState **out);

/**
 * Residuals `‖T†T − P_dom‖` and `‖TT† − P_cod‖` (max-abs entries).
 *
 * # Safety
 * `transform` must be a live handle and both outputs writable.
 */
QrfStatus qrf_transform_isometry_residuals(const QrfTransform *transform,
                                           double *domain,
                                           double *codomain);

/**
 * Runs a scenario document, or a builtin scenario when `scenario` is a
 * builtin name, and writes the JSON report to `out_report`. Returns
 * `CheckFailed` (with the report set) when any check fails.
 *
 * # Safety
 * `scenario` must be a valid C string and `out_report` writable.
 */
QrfStatus qrf_run_scenario(const char *scenario, char **out_report);

/**
 * Runs a verification suite given as a JSON suite spec or a suite name
 * (`"theorem"`, `"oracle"`, ...) and writes the JSON report.
 *
 * # Safety
 * `suite` must be a valid C string and `out_report` writable.
 */
QrfStatus qrf_run_suite(const char *suite, char **out_report);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QRFLAB_H */
