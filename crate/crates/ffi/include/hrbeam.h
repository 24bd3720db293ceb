#ifndef HRBEAM_H
#define HRBEAM_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum HrStatus {
  HR_STATUS_OK = 0,
  HR_STATUS_NULL_POINTER = 1,
  HR_STATUS_INVALID_ARGUMENT = 2,
  HR_STATUS_CONFIG_ERROR = 3,
  HR_STATUS_SOLVER_FAILURE = 4,
  HR_STATUS_NOT_FOUND = 5,
  HR_STATUS_BUFFER_TOO_SMALL = 6,
  HR_STATUS_PANIC = 7,
} HrStatus;

typedef enum HrScheme {
  HR_SCHEME_HR6DMA = 0,
  HR_SCHEME_ANTENNA_RA = 1,
  HR_SCHEME_ARRAY_RA = 2,
  HR_SCHEME_NRA = 3,
  HR_SCHEME_ARS = 4,
  HR_SCHEME_CSAR = 5,
} HrScheme;

// Opaque solve report handle.
typedef struct HrReport HrReport;

// Opaque scenario handle.
typedef struct HrScenario HrScenario;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or NULL. The pointer is
// valid until the next failing call on the same thread.
const char *hr_last_error_message(void);

// Library version as a static NUL-terminated string.
const char *hr_version(void);

// Scenario with every field at its default. Never NULL.
struct HrScenario *hr_scenario_default(void);

// Parses a scenario from NUL-terminated JSON. Omitted fields take their
// defaults.
//
// # Safety
// `json` must be NULL or a valid NUL-terminated string; `out` must be NULL
// or writable.
enum HrStatus hr_scenario_from_json(const char *json, struct HrScenario **out);

// # Safety
// `scenario` must be NULL or a handle from this library not yet freed.
void hr_scenario_free(struct HrScenario *scenario);

// Replaces the coverage region with the single interval `[lo, hi]` in
// radians.
//
// # Safety
// `scenario` must be NULL or a live handle.
enum HrStatus hr_scenario_set_region(struct HrScenario *scenario, double lo, double hi);

// Sets the total number of sampled directions.
//
// # Safety
// `scenario` must be NULL or a live handle.
enum HrStatus hr_scenario_set_total_q(struct HrScenario *scenario, size_t total_q);

// Restricts the schemes solved by [`hr_solve`]. `schemes` holds `len`
// [`HrScheme`] values.
//
// # Safety
// `scenario` must be NULL or a live handle; `schemes` must be NULL or point
// to `len` readable values.
enum HrStatus hr_scenario_set_schemes(struct HrScenario *scenario,
                                      const uint32_t *schemes,
                                      size_t len);

// Solves every scheme of the scenario. Per-scheme failures do not fail the
// call; they are listed in the report JSON and the scheme is absent from
// the accessors.
//
// # Safety
// `scenario` must be NULL or a live handle; `out` must be NULL or writable.
enum HrStatus hr_solve(const struct HrScenario *scenario, struct HrReport **out);

// # Safety
// `report` must be NULL or a handle from this library not yet freed.
void hr_report_free(struct HrReport *report);

// Number of schemes solved successfully; 0 for NULL.
//
// # Safety
// `report` must be NULL or a live handle.
size_t hr_report_scheme_count(const struct HrReport *report);

// Sampled worst-case gain (linear) of `scheme`.
//
// # Safety
// `report` must be NULL or a live handle; `out` must be NULL or writable.
enum HrStatus hr_report_worst_gain(const struct HrReport *report, uint32_t scheme, double *out);

// Array rotation chosen for `scheme`, in radians.
//
// # Safety
// `report` must be NULL or a live handle; `out` must be NULL or writable.
enum HrStatus hr_report_psi_star(const struct HrReport *report, uint32_t scheme, double *out);

// Per-antenna boresight rotations of `scheme`. `*len` receives the antenna
// count even when `cap` is too small.
//
// # Safety
// `report` must be NULL or a live handle; `buf` must hold `cap` writable
// values; `len` must be NULL or writable.
enum HrStatus hr_report_phi(const struct HrReport *report,
                            uint32_t scheme,
                            double *buf,
                            size_t cap,
                            size_t *len);

// Beamforming weights of `scheme` as interleaved `(re, im)` pairs, so
// `*len` is twice the antenna count.
//
// # Safety
// Same as [`hr_report_phi`].
enum HrStatus hr_report_weights(const struct HrReport *report,
                                uint32_t scheme,
                                double *buf,
                                size_t cap,
                                size_t *len);

// Full report as pretty JSON. Free with [`hr_string_free`]. NULL on error.
//
// # Safety
// `report` must be NULL or a live handle.
char *hr_report_to_json(const struct HrReport *report);

// # Safety
// `s` must be NULL or a string returned by this library not yet freed.
void hr_string_free(char *s);

// Gain toward `theta` of the scenario's array at rotation `psi` with
// boresights `phi` and interleaved weights `w` (`2·n` values), where `n`
// is the scenario's antenna count.
//
// # Safety
// `scenario` must be a live handle; `phi` must hold `n` values, `w` must
// hold `2·n` values and `out` must be writable.
enum HrStatus hr_beamforming_gain(const struct HrScenario *scenario,
                                  double theta,
                                  double psi,
                                  const double *phi,
                                  const double *w,
                                  double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HRBEAM_H */
