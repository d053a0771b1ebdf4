#ifndef DMCVQKD_H
#define DMCVQKD_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum DmcvqkdStatus {
  DMCVQKD_STATUS_OK = 0,
  DMCVQKD_STATUS_NULL_POINTER = 1,
  DMCVQKD_STATUS_INVALID_UTF8 = 2,
  DMCVQKD_STATUS_CONFIG = 3,
  DMCVQKD_STATUS_DOMAIN = 4,
  DMCVQKD_STATUS_NON_PHYSICAL = 5,
  DMCVQKD_STATUS_NUMERICAL = 6,
  DMCVQKD_STATUS_IO = 7,
  DMCVQKD_STATUS_PANIC = 8,
} DmcvqkdStatus;

/**
 * Opaque run configuration.
 */
typedef struct DmcvqkdConfig DmcvqkdConfig;

/**
 * Opaque key-length result.
 */
typedef struct DmcvqkdKeyReport DmcvqkdKeyReport;

/**
 * Terms of the key-length formula, all in bits.
 */
typedef struct DmcvqkdKeyTerms {
  double raw_bits;
  double h_mle;
  double holevo_f;
  double entropy_term;
  double holevo_term;
  double leak_ec;
  double delta_aep;
  double delta_ent;
  double l;
  double eps_total;
} DmcvqkdKeyTerms;

typedef struct DmcvqkdSpectrum {
  double nu1;
  double nu2;
  double nu3;
} DmcvqkdSpectrum;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *dmcvqkd_last_error_message(void);

/**
 * Parses and validates a JSON configuration.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be writable.
 */
enum DmcvqkdStatus dmcvqkd_config_from_json(const char *json, struct DmcvqkdConfig **out);

/**
 * Replaces one numeric field, e.g. "transmittance". The handle is left
 * unchanged on failure.
 *
 * # Safety
 * `cfg` must come from `dmcvqkd_config_from_json`; `name` must be a
 * NUL-terminated string.
 */
enum DmcvqkdStatus dmcvqkd_config_set(struct DmcvqkdConfig *cfg, const char *name, double value);

/**
 * # Safety
 * `cfg` must be null or a live handle; it is invalid afterwards.
 */
void dmcvqkd_config_free(struct DmcvqkdConfig *cfg);

/**
 * Expected-case key length for the configured channel.
 *
 * # Safety
 * `cfg` must be a live handle; `out` must be writable.
 */
enum DmcvqkdStatus dmcvqkd_keyrate(const struct DmcvqkdConfig *cfg, struct DmcvqkdKeyReport **out);

/**
 * Key length in bits (may be negative); NaN for a null handle.
 *
 * # Safety
 * `r` must be null or a live handle.
 */
double dmcvqkd_report_length(const struct DmcvqkdKeyReport *r);

/**
 * 1 if the key length is positive, 0 otherwise (including null).
 *
 * # Safety
 * `r` must be null or a live handle.
 */
int32_t dmcvqkd_report_feasible(const struct DmcvqkdKeyReport *r);

/**
 * # Safety
 * `r` must be a live handle; `out` must be writable.
 */
enum DmcvqkdStatus dmcvqkd_report_terms(const struct DmcvqkdKeyReport *r,
                                        struct DmcvqkdKeyTerms *out);

/**
 * Header plus one row, as written to keyrate.csv's key columns. Free the
 * result with `dmcvqkd_string_free`.
 *
 * # Safety
 * `r` must be a live handle; `out` must be writable.
 */
enum DmcvqkdStatus dmcvqkd_report_to_csv(const struct DmcvqkdKeyReport *r, char **out);

/**
 * # Safety
 * `r` must be null or a live handle; it is invalid afterwards.
 */
void dmcvqkd_report_free(struct DmcvqkdKeyReport *r);

/**
 * # Safety
 * `s` must be null or a string returned by this library.
 */
void dmcvqkd_string_free(char *s);

/**
 * Holevo bound (bits) for the covariance (a, b, c).
 *
 * # Safety
 * `out` must be writable.
 */
enum DmcvqkdStatus dmcvqkd_holevo_f(double a, double b, double c, double *out);

/**
 * # Safety
 * `out` must be writable.
 */
enum DmcvqkdStatus dmcvqkd_symplectic_eigenvalues(double a,
                                                  double b,
                                                  double c,
                                                  struct DmcvqkdSpectrum *out);

/**
 * Gaussian-input and binary-input AWGN capacities at SNR `s`.
 *
 * # Safety
 * `gauss` and `biawgn` must be writable.
 */
enum DmcvqkdStatus dmcvqkd_capacities(double s, double *gauss, double *biawgn);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DMCVQKD_H */
