#ifndef SHOCKSELECT_H
#define SHOCKSELECT_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum SsRule {
  SS_RULE_EQUAL_AREA = 0,
  SS_RULE_CONTINUOUS_DIFFUSIVITY = 1,
  SS_RULE_LOWER_KNEE = 2,
  SS_RULE_UPPER_KNEE = 3,
} SsRule;

// Status codes; values 1 to 4 match the command-line exit codes.
typedef enum SsStatus {
  SS_STATUS_OK = 0,
  // Bad argument, configuration or I/O.
  SS_STATUS_USAGE = 1,
  // Inadmissible model or parameters.
  SS_STATUS_MODEL = 2,
  // A root finder, quadrature or shooting solve failed.
  SS_STATUS_SOLVER = 3,
  // The time integration blew up.
  SS_STATUS_INSTABILITY = 4,
  SS_STATUS_NULL_POINTER = 5,
  // A Rust panic was caught at the boundary.
  SS_STATUS_INTERNAL = 6,
} SsStatus;

typedef enum SsWeightFamily {
  SS_WEIGHT_FAMILY_EXPONENTIAL = 0,
  SS_WEIGHT_FAMILY_QUADRATIC = 1,
} SsWeightFamily;

// Opaque model handle.
typedef struct SsModel SsModel;

// A shock joining `u_left` and `u_right` at potential `phi_s`.
typedef struct SsShock {
  double u_left;
  double u_right;
  double phi_s;
} SsShock;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failed call on this thread, or NULL. The pointer
// stays valid until the next call into the library from this thread.
const char *ss_last_error_message(void);

// Library version as a static NUL-terminated string.
const char *ss_version(void);

// Cubic model `D(u) = (u - a)(u - b - delta u^2)`.
//
// # Safety
// `out` must be valid for writes.
enum SsStatus ss_model_new_cubic(double a, double b, double delta, struct SsModel **out);

// Polynomial model with `D(u) = sum coeffs[i] u^i`.
//
// # Safety
// `coeffs` must point to `len` readable values and `out` be valid for writes.
enum SsStatus ss_model_new_polynomial(const double *coeffs, size_t len, struct SsModel **out);

// Releases a model; NULL is ignored.
//
// # Safety
// `model` must come from `ss_model_new_*` and not be used afterwards.
void ss_model_free(struct SsModel *model);

// Zeros `alpha < beta` of the diffusivity.
//
// # Safety
// `model` must be a live handle; the outputs valid for writes.
enum SsStatus ss_model_zeros(const struct SsModel *model, double *alpha, double *beta);

// `D(u)` for `u` in `[0, 1]`.
//
// # Safety
// `model` must be a live handle; `out` valid for writes.
enum SsStatus ss_model_diffusivity(const struct SsModel *model, double u, double *out);

// `Phi(u)` for `u` in `[0, 1]`.
//
// # Safety
// `model` must be a live handle; `out` valid for writes.
enum SsStatus ss_model_potential(const struct SsModel *model, double u, double *out);

// Shock selected by `rule` (an `SsRule` value).
//
// # Safety
// `model` must be a live handle; `out` valid for writes.
enum SsStatus ss_shock(const struct SsModel *model, int32_t rule, struct SsShock *out);

// Weight parameter `A` making the modified equal-area rule select the
// shock given by `rule`; `family_id` is an `SsWeightFamily` value and
// `residual` may be NULL.
//
// # Safety
// `model` must be a live handle; `a` valid for writes.
enum SsStatus ss_solve_weight(const struct SsModel *model,
                              int32_t rule,
                              int32_t family_id,
                              double *a,
                              double *residual);

// Shock selected by the weight `f(u) = exp(-A u)` (exponential) or
// `1 + A u^2` (quadratic); `family_id` is an `SsWeightFamily` value.
//
// # Safety
// `model` must be a live handle; `out` valid for writes.
enum SsStatus ss_shock_for_weight(const struct SsModel *model,
                                  int32_t family_id,
                                  double a,
                                  struct SsShock *out);

// Travelling-wave speed for the cubic reaction with threshold `gamma`.
//
// # Safety
// `model` must be a live handle; `c` valid for writes.
enum SsStatus ss_wave_speed(const struct SsModel *model, int32_t rule, double gamma, double *c);

// Runs a simulation. `config_json` is a JSON object with any subset of the
// simulation fields (missing ones take their defaults); `gamma <= 0` means
// no reaction. On success `*result_json` receives a JSON summary with the
// final shock estimate and speeds, to be released with `ss_string_free`.
//
// # Safety
// `model` must be a live handle, `config_json` a NUL-terminated string and
// `result_json` valid for writes.
enum SsStatus ss_simulate(const struct SsModel *model,
                          double gamma,
                          const char *config_json,
                          char **result_json);

// Releases a string returned by the library; NULL is ignored.
//
// # Safety
// `s` must come from this library and not be used afterwards.
void ss_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SHOCKSELECT_H */
