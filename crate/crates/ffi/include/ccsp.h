#ifndef CCSP_H
#define CCSP_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes.
 */
typedef enum CcspStatus {
  CCSP_STATUS_OK = 0,
  CCSP_STATUS_NULL_POINTER = 1,
  CCSP_STATUS_INVALID_ARGUMENT = 2,
  CCSP_STATUS_PARSE = 3,
  CCSP_STATUS_CAPACITY = 4,
  CCSP_STATUS_NUMERICAL = 5,
  CCSP_STATUS_IO = 6,
  CCSP_STATUS_PANIC = 7,
} CcspStatus;

/**
 * Opaque problem instance.
 */
typedef struct CcspInstance CcspInstance;

/**
 * Opaque moment solution.
 */
typedef struct CcspSolution CcspSolution;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failure on this thread, or NULL. The pointer stays
 * valid until the next failing call on the same thread.
 */
const char *ccsp_last_error(void);

/**
 * Parses an instance in edge-list text format.
 *
 * # Safety
 * `text` must be a NUL-terminated string and `out` a writable pointer.
 */
enum CcspStatus ccsp_instance_from_edge_list(const char *text, struct CcspInstance **out);

/**
 * Parses an instance from its JSON form.
 *
 * # Safety
 * As for [`ccsp_instance_from_edge_list`].
 */
enum CcspStatus ccsp_instance_from_json(const char *json, struct CcspInstance **out);

/**
 * # Safety
 * `inst` must be NULL or a handle not yet freed.
 */
void ccsp_instance_free(struct CcspInstance *inst);

/**
 * Number of variables, 0 for NULL.
 *
 * # Safety
 * `inst` must be NULL or a live handle.
 */
size_t ccsp_instance_num_variables(const struct CcspInstance *inst);

/**
 * Normalized objective of a labelling (`labels[i]` in `{0, 1}`).
 *
 * # Safety
 * `labels` must point to `len` bytes and `out` must be writable.
 */
enum CcspStatus ccsp_instance_evaluate(const struct CcspInstance *inst,
                                       const uint8_t *labels,
                                       size_t len,
                                       double *out);

/**
 * Builds and solves the level-`level` relaxation. `max_iterations == 0` and
 * `tolerance <= 0` select the defaults.
 *
 * # Safety
 * `inst` must be a live handle and `out` writable.
 */
enum CcspStatus ccsp_solve(const struct CcspInstance *inst,
                           size_t level,
                           size_t max_iterations,
                           double tolerance,
                           struct CcspSolution **out);

/**
 * # Safety
 * `sol` must be a live handle and `out` writable.
 */
enum CcspStatus ccsp_solution_objective(const struct CcspSolution *sol, double *out);

/**
 * Serializes a solution; release the string with [`ccsp_string_free`].
 *
 * # Safety
 * `sol` must be a live handle and `out` writable.
 */
enum CcspStatus ccsp_solution_to_json(const struct CcspSolution *sol, char **out);

/**
 * Parses a solution produced by [`ccsp_solution_to_json`].
 *
 * # Safety
 * `json` must be NUL-terminated and `out` writable.
 */
enum CcspStatus ccsp_solution_from_json(const char *json, struct CcspSolution **out);

/**
 * # Safety
 * `sol` must be NULL or a handle not yet freed.
 */
void ccsp_solution_free(struct CcspSolution *sol);

/**
 * # Safety
 * `s` must be NULL or a string returned by this library.
 */
void ccsp_string_free(char *s);

/**
 * Decorrelates, rounds `trials` times from `seed` and repairs the balance
 * of the best trial. Writes spins (`+1`/`-1`) into `spins[0..n]`.
 *
 * # Safety
 * Handles must be live, `spins` must hold `len >= n` bytes, and
 * `value`/`balance` must be writable.
 */
enum CcspStatus ccsp_round(const struct CcspInstance *inst,
                           const struct CcspSolution *sol,
                           size_t trials,
                           uint64_t seed,
                           int8_t *spins,
                           size_t len,
                           double *value,
                           double *balance);

/**
 * Exact optimum by enumeration; `witness[0..n]` receives an optimal
 * labelling.
 *
 * # Safety
 * `inst` must be live, `witness` must hold `len >= n` bytes and `value`
 * must be writable.
 */
enum CcspStatus ccsp_brute_force(const struct CcspInstance *inst,
                                 bool respect_cardinality,
                                 uint8_t *witness,
                                 size_t len,
                                 double *value);

/**
 * `P(X <= t1, Y <= t2)` for standard normals with correlation `rho`.
 */
double ccsp_bvn_cdf(double t1, double t2, double rho);

/**
 * Probability that threshold rounding separates an edge with biases
 * `mu1`, `mu2` and vector correlation `rho`; NaN for invalid input.
 */
double ccsp_separation_prob(double mu1, double mu2, double rho);

/**
 * Rounding threshold for bias `mu`: `P(g <= t) = (1 + mu) / 2`.
 */
double ccsp_threshold(double mu);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CCSP_H */
