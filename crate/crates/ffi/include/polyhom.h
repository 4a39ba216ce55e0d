/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#ifndef POLYHOM_H
#define POLYHOM_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/*
 Result code of every fallible call.
 */
typedef enum PhStatus {
  PH_STATUS_OK = 0,
  /*
   A required pointer argument was null.
   */
  PH_STATUS_NULL = 1,
  /*
   Invalid input (bad dimension, parse error, out-of-range parameter).
   */
  PH_STATUS_INVALID = 2,
  /*
   The computation itself failed (resonance, ill-conditioning, ...).
   */
  PH_STATUS_NUMERIC = 3,
  /*
   A Rust panic was caught at the boundary.
   */
  PH_STATUS_PANIC = 99,
} PhStatus;

typedef enum PhForm {
  PH_FORM_D = 0,
  PH_FORM_T = 1,
  PH_FORM_T_DERIVED = 2,
} PhForm;

typedef enum PhClassification {
  PH_CLASSIFICATION_CONVERGENT = 0,
  PH_CLASSIFICATION_GEVREY = 1,
  PH_CLASSIFICATION_UNKNOWN = 2,
} PhClassification;

/*
 Counterexample coefficients `a_0..=a_kmax`.
 */
typedef struct PhCexState PhCexState;

/*
 Solved expansion with exact rational coefficients.
 */
typedef struct PhExpansion PhExpansion;

/*
 Model problem under construction.
 */
typedef struct PhProblem PhProblem;

/*
 Growth fit of a coefficient-norm sequence.
 */
typedef struct PhGrowthFit {
  /*
   Estimated radius; meaningful only when `has_radius` is true. May be +inf.
   */
  double radius;
  bool has_radius;
  double gevrey_order;
  double fit_residual;
  enum PhClassification classification;
} PhGrowthFit;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message for the last failed call on this thread; empty after a success.
 The pointer stays valid until the next `ph_*` call on the same thread.
 */
const char *ph_last_error(void);

/*
 Releases a string returned by this library.

 # Safety
 `s` must come from this library or be null.
 */
void ph_string_free(char *s);

/*
 Model problem of dimension `n` with zero forcing and `K = 8`.

 # Safety
 `out` must be a valid pointer.
 */
enum PhStatus ph_problem_model(uint32_t n,
                               enum PhForm form,
                               bool nonlinear,
                               struct PhProblem **out);

/*
 Problem from `key=value` configuration text.

 # Safety
 `text` must be a NUL-terminated string and `out` a valid pointer.
 */
enum PhStatus ph_problem_from_config(const char *text, struct PhProblem **out);

/*
 Applies one configuration entry, e.g. `key = "forcing.3.0"`, `value = "1/2"`.

 # Safety
 `p` must be a live problem handle; `key` and `value` NUL-terminated strings.
 */
enum PhStatus ph_problem_set(struct PhProblem *p, const char *key, const char *value);

/*
 Adds `coeff · x^i (log x)^j` to the forcing. `coeff` is `p/q` or a decimal.

 # Safety
 `p` must be a live problem handle; `coeff` a NUL-terminated string.
 */
enum PhStatus ph_problem_add_forcing(struct PhProblem *p,
                                     uint32_t i,
                                     uint32_t j,
                                     const char *coeff);

/*
 Sets the plain coefficient at resonant order `m`.

 # Safety
 `p` must be a live problem handle; `value` a NUL-terminated string.
 */
enum PhStatus ph_problem_set_free(struct PhProblem *p, uint32_t m, const char *value);

/*
 # Safety
 `p` must come from this library or be null.
 */
void ph_problem_free(struct PhProblem *p);

/*
 Solves through order `k`; `k = 0` uses the problem's configured `K`.

 # Safety
 `p` must be a live problem handle and `out` a valid pointer.
 */
enum PhStatus ph_solve(const struct PhProblem *p, uint32_t k, struct PhExpansion **out);

/*
 Expansion in the JSON series format.

 # Safety
 `e` must be a live expansion handle and `out` a valid pointer.
 */
enum PhStatus ph_expansion_json(const struct PhExpansion *e, char **out);

/*
 Exact coefficient of `x^i (log x)^j` as `p/q` text.

 # Safety
 `e` must be a live expansion handle and `out` a valid pointer.
 */
enum PhStatus ph_expansion_coeff(const struct PhExpansion *e, uint32_t i, uint32_t j, char **out);

/*
 Nearest double to the coefficient of `x^i (log x)^j`.

 # Safety
 `e` must be a live expansion handle and `out` a valid pointer.
 */
enum PhStatus ph_expansion_coeff_f64(const struct PhExpansion *e,
                                     uint32_t i,
                                     uint32_t j,
                                     double *out);

/*
 First order carrying a log term; `*has_log` is false when there is none.

 # Safety
 `e` must be a live expansion handle; `order` and `has_log` valid pointers.
 */
enum PhStatus ph_expansion_log_birth(const struct PhExpansion *e, uint32_t *order, bool *has_log);

/*
 Lowest order at which the residual is nonzero.

 # Safety
 `e` must be a live expansion handle and `out` a valid pointer.
 */
enum PhStatus ph_expansion_residual_order(const struct PhExpansion *e, uint32_t *out);

/*
 # Safety
 `e` must come from this library or be null.
 */
void ph_expansion_free(struct PhExpansion *e);

/*
 Counterexample series from a seed such as `"d:1,d^2*t:1/2"`.

 # Safety
 `seed_poly` must be a NUL-terminated string and `out` a valid pointer.
 */
enum PhStatus ph_cex_build(uint32_t n, const char *seed_poly, size_t kmax, struct PhCexState **out);

/*
 Whether every residual coefficient below the truncation order vanishes,
 and whether the series terminates (`a_kmax = 0`).

 # Safety
 `s` must be a live handle; `vanishes` and `terminates` valid pointers.
 */
enum PhStatus ph_cex_check(const struct PhCexState *s, bool *vanishes, bool *terminates);

/*
 Counterexample state as JSON `{n, kmax, seed, a}`.

 # Safety
 `s` must be a live handle and `out` a valid pointer.
 */
enum PhStatus ph_cex_json(const struct PhCexState *s, char **out);

/*
 # Safety
 `s` must come from this library or be null.
 */
void ph_cex_free(struct PhCexState *s);

/*
 Gevrey fit of `norms[0..len]` with the default thresholds.

 # Safety
 `norms` must point to `len` doubles and `out` be a valid pointer.
 */
enum PhStatus ph_gevrey_fit(const double *norms, size_t len, struct PhGrowthFit *out);

/*
 Domb–Sykes radius of `norms[0..len]`; `*has_radius` is false when the
 ratios diverge.

 # Safety
 `norms` must point to `len` doubles; `out` and `has_radius` valid pointers.
 */
enum PhStatus ph_radius_estimate(const double *norms, size_t len, double *out, bool *has_radius);

/*
 Unit-ball check on `points` radii: largest relative residual and whether
 the expansion through order `k` is identically zero.

 # Safety
 `max_residual` and `expansion_zero` must be valid pointers.
 */
enum PhStatus ph_ball_benchmark(uint32_t n,
                                uint32_t k,
                                size_t points,
                                double *max_residual,
                                bool *expansion_zero);

/*
 `log det(I + X)` for a `dim × dim` row-major matrix `x`, via `k` trace powers.

 # Safety
 `x` must point to `dim * dim` doubles and `out` be a valid pointer.
 */
enum PhStatus ph_logdet(const double *x, size_t dim, uint32_t k, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* POLYHOM_H */
