#ifndef DESIGNFORGE_H
#define DESIGNFORGE_H

/* Generated by cbindgen; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes of every fallible call.
 */
typedef enum DfStatus {
  DF_STATUS_OK = 0,
  /**
   * Invalid argument (null pointer, bad UTF-8, domain error).
   */
  DF_STATUS_INVALID_ARGUMENT = 1,
  /**
   * A mathematical precondition of the requested quantity fails.
   */
  DF_STATUS_PRECONDITION = 2,
  /**
   * Input exceeds a hard size cap.
   */
  DF_STATUS_CAPACITY = 3,
  /**
   * A numerical procedure failed to converge.
   */
  DF_STATUS_NUMERIC = 4,
  /**
   * Internal consistency violation (library bug).
   */
  DF_STATUS_INTERNAL = 5,
} DfStatus;

/**
 * Opaque protocol-parameter handle.
 */
typedef struct DfParams DfParams;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Last error message of the current thread, or null when no error has
 * occurred. The pointer stays valid until the next failing call on this
 * thread; do not free it.
 */
const char *df_last_error(void);

/**
 * Library version as a static string; do not free.
 */
const char *df_version(void);

/**
 * Releases a string returned by this library.
 *
 * # Safety
 * `s` must be a pointer previously returned by a `df_*` function that
 * documents caller ownership, or null.
 */
void df_string_free(char *s);

/**
 * Swap-protocol parameters (two parties of m qudits, ℓ exchanged).
 * Returns null on invalid input.
 */
struct DfParams *df_params_swap(uint64_t q, uintptr_t k, uint64_t m, uint64_t ell);

/**
 * Bipartite crosstwirl parameters. Returns null on invalid input.
 */
struct DfParams *df_params_crosstwirl(uint64_t q, uintptr_t k, uint64_t m, uint64_t ell);

/**
 * Multipartite crosstwirl parameters from parallel arrays of per-party
 * block widths and crosstwirl widths. Returns null on invalid input.
 *
 * # Safety
 * `ms` and `ells` must point to `n_parties` readable u64 values.
 */
struct DfParams *df_params_multi(uint64_t q,
                                 uintptr_t k,
                                 const uint64_t *ms,
                                 const uint64_t *ells,
                                 uintptr_t n_parties);

/**
 * Releases a parameter handle.
 *
 * # Safety
 * `p` must come from a `df_params_*` constructor, or be null.
 */
void df_params_free(struct DfParams *p);

/**
 * Analytic angle bound for the handle's protocol. Writes the linear value
 * (possibly +inf) and its natural log.
 *
 * # Safety
 * `p` must be a valid handle; `out_value` and `out_ln` must be writable.
 */
enum DfStatus df_analytic_bound(const struct DfParams *p, double *out_value, double *out_ln);

/**
 * Exact subspace angle via the generalized eigenproblem.
 *
 * # Safety
 * `p` must be a valid handle; `out_angle` must be writable.
 */
enum DfStatus df_exact_angle(const struct DfParams *p, double *out_angle);

/**
 * Full angle report (params, angle, bound, constants, flags) as a JSON
 * string. Caller frees with [`df_string_free`]; returns null on error.
 *
 * # Safety
 * `p` must be a valid handle.
 */
char *df_angle_report_json(const struct DfParams *p);

/**
 * TPE bound 5K·sqrt(Σ_p q^(-2ℓ_p)) for crosstwirl parameter handles.
 * Status is Precondition when the implemented corollary preconditions
 * fail (the value is still written).
 *
 * # Safety
 * `p` must be a valid handle; out pointers must be writable or null.
 */
enum DfStatus df_tpe_bound(const struct DfParams *p, double *out_value, double *out_ln);

/**
 * Smallest ℓ meeting the swap design theorem at error `eps`.
 *
 * # Safety
 * Out pointers must be writable or null.
 */
enum DfStatus df_swap_design_ell(uint64_t k,
                                 uint64_t q,
                                 uint64_t m,
                                 double eps,
                                 uint64_t *out_ell,
                                 bool *out_feasible);

/**
 * Relative-error ε of the crosstwirl design theorem from parallel
 * per-party arrays.
 *
 * # Safety
 * `ms`/`ells` must point to `n_parties` u64 values; out pointers writable
 * or null.
 */
enum DfStatus df_crosstwirl_design_eps(uint64_t q,
                                       uint64_t k,
                                       const uint64_t *ms,
                                       const uint64_t *ells,
                                       uintptr_t n_parties,
                                       double *out_value,
                                       double *out_ln);

/**
 * Multiplicative composition of relative errors:
 * (1+base)·Π(1+eps_i) - 1.
 *
 * # Safety
 * `eps` must point to `n` f64 values; `out` writable.
 */
enum DfStatus df_compose_errors(const double *eps, uintptr_t n, double base, double *out);

/**
 * Plans a D-ary lattice crosstwirl and returns the full plan as JSON.
 * Caller frees with [`df_string_free`]; returns null on error.
 */
char *df_plan_json(uint64_t m_total, uintptr_t d_dim, uint64_t k, uint64_t q, double eps);

/**
 * Runs the oracle cross-validation grid ("tiny" or "full") and returns
 * the pass/fail ledger as JSON. Caller frees with [`df_string_free`];
 * returns null on error.
 *
 * # Safety
 * `grid` must be a valid NUL-terminated string or null (defaults to
 * "tiny").
 */
char *df_verify_json(const char *grid, uint64_t seed);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DESIGNFORGE_H */
