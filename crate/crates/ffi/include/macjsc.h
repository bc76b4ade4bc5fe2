#ifndef MACJSC_H
#define MACJSC_H

#include <stddef.h>
#include <stdint.h>

/*
 Result codes shared by every entry point. Values nested inside a larger
 JSON document that fail validation are reported as `InvalidJson`.
 */
typedef enum MacjscStatus {
  MACJSC_STATUS_OK = 0,
  MACJSC_STATUS_NULL_ARGUMENT = 1,
  MACJSC_STATUS_INVALID_UTF8 = 2,
  MACJSC_STATUS_INVALID_JSON = 3,
  MACJSC_STATUS_INVALID_DISTRIBUTION = 4,
  MACJSC_STATUS_UNKNOWN_VARIABLE = 5,
  MACJSC_STATUS_INVALID_SYSTEM = 6,
  MACJSC_STATUS_INVALID_PARAMETER = 7,
  MACJSC_STATUS_BUDGET_EXCEEDED = 8,
  MACJSC_STATUS_OPTIMIZER_FAILED = 9,
  MACJSC_STATUS_PANIC = 99,
} MacjscStatus;

/*
 Parsed joint distribution.
 */
typedef struct MacjscPmf MacjscPmf;

/*
 Simulator with its codebooks drawn.
 */
typedef struct MacjscSimulator MacjscSimulator;

/*
 Parsed two-user system.
 */
typedef struct MacjscSystem MacjscSystem;

/*
 Closed-form Gaussian MAC bounds in bits.
 */
typedef struct MacjscGmacBounds {
  double i1;
  double i2;
  double isum;
} MacjscGmacBounds;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message describing the most recent failure on this thread, or null.
 The pointer stays valid until the next call on the same thread.
 */
const char *macjsc_last_error(void);

/*
 Library version as a static NUL-terminated string.
 */
const char *macjsc_version(void);

/*
 Releases a string returned by this library. Null is ignored.

 # Safety
 `s` must come from this library and must not be used afterwards.
 */
void macjsc_string_free(char *s);

/*
 Parses a joint pmf from `{"variables": [...], "probs": [...]}`.

 # Safety
 `json` must be a NUL-terminated string and `out` a writable pointer.
 */
enum MacjscStatus macjsc_pmf_from_json(const char *json, struct MacjscPmf **out);

/*
 # Safety
 `pmf` must come from [`macjsc_pmf_from_json`] and must not be used
 afterwards. Null is ignored.
 */
void macjsc_pmf_free(struct MacjscPmf *pmf);

/*
 H(A | B) in bits for variable name lists `a` and `given`.

 # Safety
 `pmf` must be a live handle, each list must hold the stated number of
 NUL-terminated strings, and `out` must be writable.
 */
enum MacjscStatus macjsc_pmf_entropy(const struct MacjscPmf *pmf,
                                     const char *const *a,
                                     uintptr_t a_len,
                                     const char *const *given,
                                     uintptr_t given_len,
                                     double *out);

/*
 I(A; B | C) in bits.

 # Safety
 As for [`macjsc_pmf_entropy`].
 */
enum MacjscStatus macjsc_pmf_mutual_info(const struct MacjscPmf *pmf,
                                         const char *const *a,
                                         uintptr_t a_len,
                                         const char *const *b,
                                         uintptr_t b_len,
                                         const char *const *given,
                                         uintptr_t given_len,
                                         double *out);

/*
 Parses and validates a two-user system.

 # Safety
 `json` must be a NUL-terminated string and `out` a writable pointer.
 */
enum MacjscStatus macjsc_system_from_json(const char *json, struct MacjscSystem **out);

/*
 # Safety
 `system` must come from [`macjsc_system_from_json`] and must not be used
 afterwards. Null is ignored.
 */
void macjsc_system_free(struct MacjscSystem *system);

/*
 Checks the system and returns its region report as JSON. `feasible`
 receives 1 when every inequality and fidelity target holds, else 0; it
 may be null.

 # Safety
 `system` must be a live handle; `out_json` must be writable.
 */
enum MacjscStatus macjsc_system_check(const struct MacjscSystem *system,
                                      int32_t *feasible,
                                      char **out_json);

/*
 Closed-form bounds of the Gaussian MAC with input correlation `rho`.

 # Safety
 `out` must be writable.
 */
enum MacjscStatus macjsc_gmac_bounds(double p1,
                                     double p2,
                                     double sigma_n2,
                                     double rho,
                                     struct MacjscGmacBounds *out);

/*
 Mixture fit. Input `{"source", "rho", "counts"?, "options"?}`; output
 the fit result.

 # Safety
 `json` must be a NUL-terminated string; `out_json` must be writable.
 */
enum MacjscStatus macjsc_fit_json(const char *json, char **out_json);

/*
 Monte Carlo estimates of every supported target. Input
 `{"input", "config"?}`; output a list of `[target, estimate]` pairs.

 # Safety
 `json` must be a NUL-terminated string; `out_json` must be writable.
 */
enum MacjscStatus macjsc_mc_json(const char *json, char **out_json);

/*
 Draws the codebooks of a simulator configuration.

 # Safety
 `json` must be a NUL-terminated string and `out` a writable pointer.
 */
enum MacjscStatus macjsc_simulator_new(const char *json, struct MacjscSimulator **out);

/*
 # Safety
 `sim` must come from [`macjsc_simulator_new`] and must not be used
 afterwards. Null is ignored.
 */
void macjsc_simulator_free(struct MacjscSimulator *sim);

/*
 Runs every trial and returns the aggregate as JSON.

 # Safety
 `sim` must be a live handle; `out_json` must be writable.
 */
enum MacjscStatus macjsc_simulator_run(const struct MacjscSimulator *sim, char **out_json);

/*
 Recomputes every reference claim. `options_json` may be null for the
 defaults.

 # Safety
 `options_json` must be null or a NUL-terminated string; `out_json` must
 be writable.
 */
enum MacjscStatus macjsc_reproduce_json(const char *options_json, char **out_json);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MACJSC_H */
