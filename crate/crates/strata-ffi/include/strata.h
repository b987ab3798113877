#ifndef STRATA_H
#define STRATA_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every fallible call.
 */
typedef enum StrataStatus {
  StrataStatus_Ok = 0,
  StrataStatus_NullArgument = 1,
  StrataStatus_InvalidArgument = 2,
  StrataStatus_ParseError = 3,
  StrataStatus_ComputeError = 4,
  StrataStatus_Panic = 5,
} StrataStatus;

/**
 * Opaque tensor handle; create with `strata_tensor_parse`, release with
 * `strata_tensor_free`.
 */
typedef struct StrataTensor StrataTensor;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Latest error message on this thread, or NULL when the last call
 * succeeded. The caller owns the string; free with `strata_string_free`.
 */
char *strata_last_error_message(void);

/**
 * Releases a string returned by this library. NULL is ignored.
 */
void strata_string_free(char *s);

/**
 * Parses tensor JSON ({"field", "dims", "entries"}, 1-based indices) into a
 * new handle written to `out`.
 */
enum StrataStatus strata_tensor_parse(const char *json, struct StrataTensor **out);

/**
 * Releases a tensor handle. NULL is ignored.
 */
void strata_tensor_free(struct StrataTensor *t);

/**
 * Number of modes.
 */
enum StrataStatus strata_tensor_order(const struct StrataTensor *t, uintptr_t *out);

/**
 * Dimension of one mode (1-based).
 */
enum StrataStatus strata_tensor_dim(const struct StrataTensor *t, uintptr_t mode, uintptr_t *out);

/**
 * Edge functional of the mode pencil at the exact weight rho_num/rho_den,
 * written to `out_value` as a double.
 */
enum StrataStatus strata_zeta(const struct StrataTensor *t,
                              uint32_t mode,
                              int64_t rho_num,
                              uint64_t rho_den,
                              uint64_t seed,
                              double *out_value);

/**
 * Minimum of the edge functional over the weight, with its minimizer.
 */
enum StrataStatus strata_acr(const struct StrataTensor *t,
                             uint64_t seed,
                             double *out_value,
                             double *out_argmin_rho);

/**
 * Whether the mode pencil is slope-semistable.
 */
enum StrataStatus strata_is_semistable(const struct StrataTensor *t,
                                       uint32_t mode,
                                       uint64_t seed,
                                       bool *out);

/**
 * Dimension data of the mode pencil's filtration, as a JSON string
 * "[[n, m], ...]" written to `out_json` (free with `strata_string_free`).
 */
enum StrataStatus strata_hn_dim_data_json(const struct StrataTensor *t,
                                          uint32_t mode,
                                          uint64_t seed,
                                          char **out_json);

/**
 * Generic rank of the mode pencil; `out_exact` reports whether the value
 * came from symbolic minors (true) or random evaluation (false).
 */
enum StrataStatus strata_commutative_rank(const struct StrataTensor *t,
                                          uint32_t mode,
                                          uint64_t seed,
                                          uintptr_t *out_value,
                                          bool *out_exact);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* STRATA_H */
