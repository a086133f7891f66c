#ifndef CONECOUNT_H
#define CONECOUNT_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes.
 */
typedef enum CcStatus {
  CC_STATUS_OK = 0,
  CC_STATUS_NULL_POINTER = 1,
  CC_STATUS_INVALID_ARGUMENT = 2,
  CC_STATUS_PARSE = 3,
  CC_STATUS_DIMENSION = 4,
  CC_STATUS_UNSUPPORTED = 5,
  CC_STATUS_INSUFFICIENT_POINTS = 6,
  CC_STATUS_IO = 7,
  CC_STATUS_PANIC = 8,
  CC_STATUS_OTHER = 9,
} CcStatus;

/**
 * Opaque quadratic space.
 */
typedef struct CcForm CcForm;

/**
 * A count with its main term.
 */
typedef struct CcCountReport {
  uint64_t count;
  double main_term;
  double discrepancy;
  double relative_error;
} CcCountReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Load `standard:<n>` or a form file. On success `*out` owns a new handle.
 *
 * # Safety
 * `spec` must be a NUL-terminated string and `out` a valid pointer.
 */
enum CcStatus cc_form_load(const char *spec, struct CcForm **out);

/**
 * Release a handle from [`cc_form_load`]. Null is ignored.
 *
 * # Safety
 * `form` must come from [`cc_form_load`] and not be used afterwards.
 */
void cc_form_free(struct CcForm *form);

/**
 * `n` of the form, or 0 for a null handle.
 *
 * # Safety
 * `form` must be null or a live handle.
 */
uintptr_t cc_form_n(const struct CcForm *form);

/**
 * Copy the hex fingerprint (64 characters plus NUL) into `buf`.
 *
 * # Safety
 * `form` must be a live handle and `buf` writable for `len` bytes.
 */
enum CcStatus cc_form_fingerprint(const struct CcForm *form, char *buf, uintptr_t len);

/**
 * Number of primitive cone points with `q < t`.
 *
 * # Safety
 * `form` must be a live handle and `out` a valid pointer.
 */
enum CcStatus cc_count_all(const struct CcForm *form, double t, uint64_t *out);

/**
 * Cap count around `alpha` (length `n + 1`, normalized here). A
 * nonpositive `kappa` estimates it from the form.
 *
 * # Safety
 * `form` must be a live handle, `alpha` readable for `alpha_len` values
 * and `out` a valid pointer.
 */
enum CcStatus cc_count_cap(const struct CcForm *form,
                           const double *alpha,
                           uintptr_t alpha_len,
                           double r,
                           double t,
                           double kappa,
                           struct CcCountReport *out);

/**
 * Approximation count within `ψ(q)` of `alpha`; `psi` uses the CLI syntax.
 *
 * # Safety
 * As for [`cc_count_cap`]; `psi` must be NUL-terminated.
 */
enum CcStatus cc_count_khintchine(const struct CcForm *form,
                                  const double *alpha,
                                  uintptr_t alpha_len,
                                  const char *psi,
                                  double t,
                                  double kappa,
                                  struct CcCountReport *out);

/**
 * `σ_n` of a cap of chordal radius `r`.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum CcStatus cc_cap_measure(uintptr_t n, double r, double *out);

/**
 * `c_cap(n)`.
 */
double cc_c_cap(uintptr_t n);

/**
 * Copy the last error message on this thread into `buf` (truncated,
 * always NUL-terminated when `len > 0`). Returns the full message length.
 *
 * # Safety
 * `buf` must be null or writable for `len` bytes.
 */
uintptr_t cc_last_error(char *buf, uintptr_t len);

/**
 * Library version, NUL-terminated, static.
 */
const char *cc_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CONECOUNT_H */
