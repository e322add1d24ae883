#ifndef LPA_BRIDGE_H
#define LPA_BRIDGE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every exported call.
 */
typedef enum LpaStatus {
  LPA_STATUS_OK = 0,
  LPA_STATUS_NULL_ARGUMENT = 1,
  LPA_STATUS_INVALID_UTF8 = 2,
  LPA_STATUS_PARSE_ERROR = 3,
  LPA_STATUS_INVALID_INPUT = 4,
  LPA_STATUS_PANIC = 5,
} LpaStatus;

/**
 * The bridging bimodule of a conjugacy pair.
 */
typedef struct LpaBridge LpaBridge;

/**
 * A directed graph.
 */
typedef struct LpaGraph LpaGraph;

/**
 * A specified conjugacy pair.
 */
typedef struct LpaPair LpaPair;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. Valid until the
 * next call into this library on the same thread.
 */
const char *lpa_last_error(void);

/**
 * Library version as a static string.
 */
const char *lpa_version(void);

/**
 * Frees a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must be null or a string returned by this library and not yet freed.
 */
void lpa_string_free(char *s);

/**
 * Parses a graph from `{"vertices": [...], "edges": [...]}`.
 *
 * # Safety
 * `json` must be a valid NUL-terminated string and `out` a valid pointer.
 */
enum LpaStatus lpa_graph_from_json(const char *json, struct LpaGraph **out);

/**
 * Writes the adjacency matrix of `graph` as matrix JSON.
 *
 * # Safety
 * `graph` must be a live handle and `out` a valid pointer. Free the result
 * with [`lpa_string_free`].
 */
enum LpaStatus lpa_graph_adjacency_json(const struct LpaGraph *graph, char **out);

/**
 * # Safety
 * `graph` must be null or a handle from [`lpa_graph_from_json`] not yet freed.
 */
void lpa_graph_free(struct LpaGraph *graph);

/**
 * Parses a conjugacy pair `{"E", "F", "M", "sigma"}` over `field`
 * (`"rational"`, `"gfp:<p>"`, or null for the rationals).
 *
 * # Safety
 * `json` must be a valid NUL-terminated string, `field` null or one, and
 * `out` a valid pointer.
 */
enum LpaStatus lpa_pair_from_json(const char *json, const char *field, struct LpaPair **out);

/**
 * The identity pair of `graph`.
 *
 * # Safety
 * `graph` must be a live handle, `field` null or a valid string, and `out`
 * a valid pointer.
 */
enum LpaStatus lpa_pair_identity(const struct LpaGraph *graph,
                                 const char *field,
                                 struct LpaPair **out);

/**
 * Sets `*ok` to 1 when σ is invertible, 0 otherwise.
 *
 * # Safety
 * `pair` must be a live handle and `ok` a valid pointer.
 */
enum LpaStatus lpa_pair_verify(const struct LpaPair *pair, int *ok);

/**
 * # Safety
 * `pair` must be null or a pair handle not yet freed.
 */
void lpa_pair_free(struct LpaPair *pair);

/**
 * Builds the bridging bimodule of a verified pair over sink-free graphs.
 *
 * # Safety
 * `pair` must be a live handle and `out` a valid pointer.
 */
enum LpaStatus lpa_bridge_new(const struct LpaPair *pair, struct LpaBridge **out);

/**
 * Checks the Cuntz–Krieger relations on basis elements `m ⊗ αβ*` with
 * `|α|, |β| <= length_bound`. Sets `*ok` and, when `report` is non-null,
 * writes a JSON summary with the first violation of each relation.
 *
 * # Safety
 * `bridge` must be a live handle, `ok` a valid pointer, `report` null or a
 * valid pointer.
 */
enum LpaStatus lpa_bridge_verify_ck(const struct LpaBridge *bridge,
                                    uintptr_t length_bound,
                                    int *ok,
                                    char **report);

/**
 * Left action of a generator (`"v"`, `"e"` or `"e*"`) on a bridge element
 * given as a list of `{"m", "alpha", "beta", "coeff"}` terms.
 *
 * # Safety
 * `bridge` must be a live handle, `generator` and `element` valid strings,
 * and `out` a valid pointer.
 */
enum LpaStatus lpa_bridge_act_json(const struct LpaBridge *bridge,
                                   const char *generator,
                                   const char *element,
                                   char **out);

/**
 * # Safety
 * `bridge` must be null or a bridge handle not yet freed.
 */
void lpa_bridge_free(struct LpaBridge *bridge);

/**
 * Normal form of an element of `L_k(E)` given as a list of
 * `{"alpha", "beta", "coeff"}` terms.
 *
 * # Safety
 * `graph` must be a live handle, `element` a valid string, `field` null or
 * a valid string, and `out` a valid pointer.
 */
enum LpaStatus lpa_normalize_json(const struct LpaGraph *graph,
                                  const char *element,
                                  const char *field,
                                  char **out);

/**
 * Sets `*ok` to 1 when `{"R", "S", "n"}` is a shift equivalence from `a`
 * to `b` (matrix JSON).
 *
 * # Safety
 * `a`, `b` and `witness` must be valid strings and `ok` a valid pointer.
 */
enum LpaStatus lpa_se_verify_json(const char *a, const char *b, const char *witness, int *ok);

/**
 * Smallest shift equivalence witness within bounds. Writes witness JSON,
 * or null when none exists within the bounds.
 *
 * # Safety
 * `a` and `b` must be valid strings and `out` a valid pointer.
 */
enum LpaStatus lpa_se_search_json(const char *a,
                                  const char *b,
                                  uint32_t max_lag,
                                  uint64_t max_entry,
                                  char **out);

/**
 * Sets `*ok` to 1 when both commuting diagrams hold for a witness
 * `{"E", "F", "M", "N", "n", "omega_E", "omega_F", "sigma_M", "sigma_N"}`.
 *
 * # Safety
 * `witness` must be a valid string, `field` null or a valid string, and `ok`
 * a valid pointer.
 */
enum LpaStatus lpa_com_verify_json(const char *witness, const char *field, int *ok);

/**
 * Runs the command-line interface on `argv` (without the program name).
 * Writes the exit code and the rendered report.
 *
 * # Safety
 * `argv` must point to `argc` valid strings; `exit_code` and `report` must
 * be valid pointers.
 */
enum LpaStatus lpa_cli_run(const char *const *argv, uintptr_t argc, int *exit_code, char **report);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LPA_BRIDGE_H */
