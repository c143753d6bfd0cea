#ifndef MATMUL_HUBO_H
#define MATMUL_HUBO_H

/* Generated by cbindgen from src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum MhSolverKind {
  MH_SOLVER_KIND_EXHAUSTIVE = 0,
  MH_SOLVER_KIND_ANNEAL = 1,
  MH_SOLVER_KIND_TABU = 2,
} MhSolverKind;

typedef enum MhStatus {
  MH_STATUS_OK = 0,
  MH_STATUS_NULL_POINTER = 1,
  MH_STATUS_INVALID_UTF8 = 2,
  MH_STATUS_RANGE = 3,
  MH_STATUS_SHAPE = 4,
  MH_STATUS_FIELD = 5,
  MH_STATUS_PARAMETER = 6,
  MH_STATUS_CAPACITY = 7,
  MH_STATUS_STALL = 8,
  MH_STATUS_PARSE = 9,
  MH_STATUS_JSON = 10,
  MH_STATUS_IO = 11,
  MH_STATUS_PANIC = 12,
} MhStatus;

typedef enum MhReduction {
  MH_REDUCTION_MIN_SELECTION = 0,
  MH_REDUCTION_SUBSTITUTION = 1,
} MhReduction;

typedef enum MhField {
  MH_FIELD_F2 = 0,
  MH_FIELD_REAL = 1,
} MhField;

/**
 * Opaque list of rank-one triples.
 */
typedef struct MhDecomposition MhDecomposition;

/**
 * Opaque pseudo-Boolean polynomial.
 */
typedef struct MhPolynomial MhPolynomial;

/**
 * Solver settings. Temperatures at or below zero and a zero tabu tenure
 * mean "derive from the problem".
 */
typedef struct MhSolverConfig {
  enum MhSolverKind kind;
  uint64_t seed;
  size_t restarts;
  size_t sweeps;
  double initial_temperature;
  double final_temperature;
  size_t tabu_tenure;
} MhSolverConfig;

typedef struct MhResourceEstimate {
  uint64_t step_variables;
  uint64_t holistic_variables;
  uint64_t step_interaction_bound;
  uint64_t holistic_interaction_bound;
  uint64_t step_ancilla_bound;
  uint64_t holistic_ancilla_bound;
} MhResourceEstimate;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. Valid until the
 * next call into this library on the same thread.
 */
const char *mh_last_error_message(void);

/**
 * Library version as a static string.
 */
const char *mh_version(void);

/**
 * Releases a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and not have been freed.
 */
void mh_string_free(char *s);

/**
 * Defaults for `kind`: 8 restarts, 1000 sweeps, derived temperatures.
 */
struct MhSolverConfig mh_solver_config_default(enum MhSolverKind kind);

/**
 * # Safety
 * `json` must be a nul-terminated string; `out` must be writable.
 */
enum MhStatus mh_polynomial_from_json(const char *json, struct MhPolynomial **out);

/**
 * # Safety
 * `poly` must be a live handle; `out` must be writable.
 */
enum MhStatus mh_polynomial_to_json(const struct MhPolynomial *poly, char **out);

/**
 * qbsolv text of a polynomial of degree at most two.
 *
 * # Safety
 * `poly` must be a live handle; `comment` is null or nul-terminated; `out`
 * must be writable.
 */
enum MhStatus mh_polynomial_to_qbsolv(const struct MhPolynomial *poly,
                                      const char *comment,
                                      char **out);

/**
 * # Safety
 * `poly` must be a live handle; `out` must be writable.
 */
enum MhStatus mh_polynomial_num_vars(const struct MhPolynomial *poly, size_t *out);

/**
 * # Safety
 * `poly` must be a live handle; `out` must be writable.
 */
enum MhStatus mh_polynomial_degree(const struct MhPolynomial *poly, size_t *out);

/**
 * Value at `bits[0..len]`, one byte per variable, nonzero meaning set.
 *
 * # Safety
 * `poly` must be a live handle; `bits` must point to `len` readable bytes;
 * `out` must be writable.
 */
enum MhStatus mh_polynomial_evaluate(const struct MhPolynomial *poly,
                                     const uint8_t *bits,
                                     size_t len,
                                     double *out);

/**
 * # Safety
 * `poly` is null or a live handle, freed at most once.
 */
void mh_polynomial_free(struct MhPolynomial *poly);

/**
 * Fixed-rank objective for the standard `n x m` by `m x p` tensor with
 * ternary component pairs.
 *
 * # Safety
 * `out` must be writable.
 */
enum MhStatus mh_build_holistic(size_t n,
                                size_t m,
                                size_t p,
                                size_t rank,
                                struct MhPolynomial **out);

/**
 * One-step objective between two tensors given as JSON. Both must share a
 * field; integer steps use ternary component pairs.
 *
 * # Safety
 * `target_json` and `source_json` must be nul-terminated; `out` must be
 * writable.
 */
enum MhStatus mh_build_step(const char *target_json,
                            const char *source_json,
                            struct MhPolynomial **out);

/**
 * Quadratic model of `poly`: original variables first, ancillas after.
 * Substitution uses the automatic penalty weight.
 *
 * # Safety
 * `poly` must be a live handle; `out` must be writable.
 */
enum MhStatus mh_reduce(const struct MhPolynomial *poly,
                        enum MhReduction method,
                        struct MhPolynomial **out);

/**
 * Minimizes `poly`. The best assignment is written to `assignment[0..len]`
 * as 0/1 bytes; `len` must equal the variable count.
 *
 * # Safety
 * `poly` and `config` must be valid; `assignment` must point to `len`
 * writable bytes; `energy` must be writable.
 */
enum MhStatus mh_solve(const struct MhPolynomial *poly,
                       const struct MhSolverConfig *config,
                       uint8_t *assignment,
                       size_t len,
                       double *energy);

/**
 * # Safety
 * `json` must be nul-terminated; `out` must be writable.
 */
enum MhStatus mh_decomposition_from_json(const char *json, struct MhDecomposition **out);

/**
 * # Safety
 * `d` must be a live handle; `out` must be writable.
 */
enum MhStatus mh_decomposition_to_json(const struct MhDecomposition *d, char **out);

/**
 * # Safety
 * `d` must be a live handle; `out` must be writable.
 */
enum MhStatus mh_decomposition_rank(const struct MhDecomposition *d, size_t *out);

/**
 * # Safety
 * `d` is null or a live handle, freed at most once.
 */
void mh_decomposition_free(struct MhDecomposition *d);

/**
 * Checks the decomposition against direct products: every pair of 0/1
 * matrices when small enough over GF(2), otherwise `trials` random pairs.
 *
 * # Safety
 * `d` must be a live handle; `valid` must be writable.
 */
enum MhStatus mh_verify(const struct MhDecomposition *d,
                        uint64_t trials,
                        uint64_t seed,
                        bool *valid);

/**
 * Stepwise search from a start point given as JSON (`t_high`, `seed`).
 * A stall returns [`MhStatus::Stall`] and leaves `out` untouched.
 *
 * # Safety
 * `point_json` must be nul-terminated; `config` must be valid; `out` must
 * be writable.
 */
enum MhStatus mh_decompose(const char *point_json,
                           enum MhField field_tag,
                           const struct MhSolverConfig *config,
                           size_t max_iter,
                           struct MhDecomposition **out);

/**
 * The Strassen start point and reference products as JSON.
 *
 * # Safety
 * `out` must be writable.
 */
enum MhStatus mh_strassen_fixture_json(char **out);

/**
 * Variable and interaction counts for rank `rank` with `k` bits per
 * component.
 *
 * # Safety
 * `out` must be writable.
 */
enum MhStatus mh_estimate_resources(size_t n,
                                    size_t m,
                                    size_t p,
                                    uint64_t rank,
                                    uint64_t k,
                                    enum MhField field_tag,
                                    struct MhResourceEstimate *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MATMUL_HUBO_H */
