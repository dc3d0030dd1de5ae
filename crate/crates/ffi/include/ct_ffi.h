#ifndef CT_FFI_H
#define CT_FFI_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Regularity cases: 0 rep-#1, 1 rep-#2.1, 2 rep-#2.2, 3 attractive-borderline,
 * 4 none.
 */
typedef enum CtCaseTag {
  CtCaseRep1 = 0,
  CtCaseRep21 = 1,
  CtCaseRep22 = 2,
  CtCaseAttractiveBorderline = 3,
  CtCaseNone = 4,
} CtCaseTag;

/**
 * Status codes returned by every fallible entry point.
 */
typedef enum CtStatus {
  CtStatusOk = 0,
  CtStatusInvalidArgument = 1,
  CtStatusNumericalFailure = 2,
  CtStatusNullPointer = 3,
  CtStatusOutOfRange = 4,
  CtStatusPanic = 5,
} CtStatus;

/**
 * Verdict labels: 0 subcritical, 1 supercritical, 2 indeterminate.
 */
typedef enum CtVerdictLabel {
  CtVerdictSubcritical = 0,
  CtVerdictSupercritical = 1,
  CtVerdictIndeterminate = 2,
} CtVerdictLabel;

/**
 * Opaque background profile.
 */
typedef struct CtBackground CtBackground;

/**
 * Opaque pre-built classifier for one repulsive parameter set.
 */
typedef struct CtClassifier CtClassifier;

/**
 * System parameters; `k` must be -1 (attractive) or +1 (repulsive).
 */
typedef struct CtParams {
  double nu;
  int32_t k;
  double c_minus;
  double c_plus;
} CtParams;

typedef struct CtVerdict {
  enum CtVerdictLabel label;
  double margin;
  enum CtCaseTag case_tag;
} CtVerdict;

/**
 * Closing-condition report; `s_plus` and `s_star_star` are NaN when the
 * corresponding quantity is not defined in the current regime.
 */
typedef struct CtClosing {
  int32_t holds;
  enum CtCaseTag case_tag;
  double s_plus;
  double s_star_star;
  int32_t sign_test;
} CtClosing;

/**
 * Result of a reduced-system simulation; `t_star` and `w_star` are NaN when
 * no blow-up occurred before the horizon.
 */
typedef struct CtSimOutcome {
  int32_t blew_up;
  double t_star;
  double w_star;
} CtSimOutcome;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *ct_version(void);

/**
 * Copies the last error message on this thread into `buf` (truncated to
 * `len - 1` bytes, always NUL-terminated). Returns the full message length.
 *
 * # Safety
 * `buf` must point to at least `len` writable bytes, or be NULL (then only
 * the length is returned).
 */
uintptr_t ct_last_error(char *buf, uintptr_t len);

/**
 * Validates a parameter set without allocating anything.
 */
enum CtStatus ct_params_validate(struct CtParams params);

/**
 * Builds the threshold constructions for a repulsive parameter set.
 * Curves with unbounded domains are tabulated up to `s_max`.
 *
 * # Safety
 * `out` must be a valid pointer; the handle must be released with
 * `ct_classifier_free`.
 */
enum CtStatus ct_classifier_new(struct CtParams params, double s_max, struct CtClassifier **out);

/**
 * # Safety
 * `handle` must come from `ct_classifier_new` and not be freed twice.
 */
void ct_classifier_free(struct CtClassifier *handle);

/**
 * Classifies the phase point `(w, s)` with the indeterminate-band width
 * `tol`.
 *
 * # Safety
 * `handle` and `out` must be valid pointers.
 */
enum CtStatus ct_classifier_classify(const struct CtClassifier *handle,
                                     double w,
                                     double s,
                                     double tol,
                                     struct CtVerdict *out);

/**
 * Breakdown-time bound for a supercritical point; `*out` is NaN when the
 * point is not supercritical.
 *
 * # Safety
 * `handle` and `out` must be valid pointers.
 */
enum CtStatus ct_classifier_breakdown_bound(const struct CtClassifier *handle,
                                            double w,
                                            double s,
                                            double *out);

/**
 * Evaluates the closing condition for a parameter set.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum CtStatus ct_closing_condition(struct CtParams params, struct CtClosing *out);

/**
 * Classifies a phase point for the attractive system (`params.k` must be -1).
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum CtStatus ct_attractive_classify(struct CtParams params,
                                     double w,
                                     double s,
                                     double tol,
                                     struct CtVerdict *out);

/**
 * Constant background profile.
 *
 * # Safety
 * `out` must be a valid pointer; free the handle with `ct_background_free`.
 */
enum CtStatus ct_background_constant(double value, struct CtBackground **out);

/**
 * Sinusoidal background `mean + amplitude sin(omega t + phase)`.
 *
 * # Safety
 * `out` must be a valid pointer; free the handle with `ct_background_free`.
 */
enum CtStatus ct_background_sinusoid(double mean,
                                     double amplitude,
                                     double omega,
                                     double phase,
                                     struct CtBackground **out);

/**
 * # Safety
 * `handle` must come from a `ct_background_*` constructor and not be freed
 * twice.
 */
void ct_background_free(struct CtBackground *handle);

/**
 * Evaluates the background profile at time `t`.
 *
 * # Safety
 * `handle` and `out` must be valid pointers.
 */
enum CtStatus ct_background_eval(const struct CtBackground *handle, double t, double *out);

/**
 * Integrates the reduced system from `(w0, s0)` to `horizon` with blow-up
 * detection, using the given integrator tolerances (pass 0 for defaults).
 *
 * # Safety
 * `bg` and `out` must be valid pointers.
 */
enum CtStatus ct_simulate_ws(struct CtParams params,
                             const struct CtBackground *bg,
                             double w0,
                             double s0,
                             double horizon,
                             double rel_tol,
                             double abs_tol,
                             struct CtSimOutcome *out);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* CT_FFI_H */
