#ifndef KCOLOR_H
#define KCOLOR_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum KcStatus {
  KC_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  KC_STATUS_NULL_POINTER = 1,
  /**
   * Malformed text, JSON or UTF-8.
   */
  KC_STATUS_PARSE = 2,
  /**
   * Structurally invalid input (graph, coloring, instance, parameter).
   */
  KC_STATUS_INVALID_INPUT = 3,
  /**
   * The requested computation exceeds the given budget.
   */
  KC_STATUS_BUDGET = 4,
  /**
   * A value does not fit the C representation.
   */
  KC_STATUS_OVERFLOW = 5,
  /**
   * Internal failure, including a caught panic.
   */
  KC_STATUS_INTERNAL = 6,
} KcStatus;

/**
 * Constraint system instance.
 */
typedef struct KcCsp KcCsp;

/**
 * Weighted graph.
 */
typedef struct KcGraph KcGraph;

/**
 * Result of the CSP to 3-coloring reduction, bound to its source instance.
 */
typedef struct KcReduction KcReduction;

/**
 * Exact rational `num / den` with `den > 0`.
 */
typedef struct KcRational {
  int64_t num;
  int64_t den;
} KcRational;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. The pointer stays
 * valid until the next failing call on the same thread.
 */
const char *kc_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *kc_version(void);

/**
 * Releases a string returned by this library. Null is ignored.
 */
void kc_string_free(char *s);

/**
 * Parses a CSP instance from JSON.
 */
enum KcStatus kc_csp_from_json(const char *json, struct KcCsp **out);

/**
 * Generates a satisfiable instance. When `assignment_json` is non-null it
 * receives the planted assignment as JSON.
 */
enum KcStatus kc_csp_generate_planted(uint64_t seed,
                                      size_t nx,
                                      size_t ny,
                                      size_t nz,
                                      size_t m,
                                      struct KcCsp **out,
                                      char **assignment_json);

enum KcStatus kc_csp_to_json(const struct KcCsp *csp, char **out);

enum KcStatus kc_csp_constraint_count(const struct KcCsp *csp, size_t *out);

void kc_csp_free(struct KcCsp *csp);

/**
 * Builds the weighted 3-coloring instance of `csp`.
 */
enum KcStatus kc_reduce_3color(const struct KcCsp *csp, struct KcReduction **out);

/**
 * Copy of the reduced graph as an independent handle.
 */
enum KcStatus kc_reduction_graph(const struct KcReduction *red, struct KcGraph **out);

/**
 * Writes the 3-coloring that encodes `assignment_json` into `colors`, which
 * must hold exactly one entry per vertex of the reduced graph.
 */
enum KcStatus kc_reduction_encode(const struct KcReduction *red,
                                  const char *assignment_json,
                                  uint32_t *colors,
                                  size_t len);

/**
 * Decodes a 3-coloring (`colors[v]` in `1..=3`) of the reduced graph and
 * reports how many constraints the decoded assignment satisfies.
 */
enum KcStatus kc_reduction_decode(const struct KcReduction *red,
                                  const uint32_t *colors,
                                  size_t len,
                                  size_t *satisfied);

void kc_reduction_free(struct KcReduction *red);

/**
 * Parses the `wgraph` text format.
 */
enum KcStatus kc_graph_from_text(const char *text, struct KcGraph **out);

enum KcStatus kc_graph_to_text(const struct KcGraph *g, char **out);

enum KcStatus kc_graph_vertex_count(const struct KcGraph *g, size_t *out);

enum KcStatus kc_graph_edge_count(const struct KcGraph *g, size_t *out);

enum KcStatus kc_graph_total_weight(const struct KcGraph *g, struct KcRational *out);

/**
 * Weight of properly colored edges under `colors[v]` in `1..=k`.
 */
enum KcStatus kc_graph_score(const struct KcGraph *g,
                             uint32_t k,
                             const uint32_t *colors,
                             size_t len,
                             struct KcRational *proper);

/**
 * Exact k-colorability with a search-node budget.
 */
enum KcStatus kc_graph_is_k_colorable(const struct KcGraph *g,
                                      uint32_t k,
                                      uint64_t budget,
                                      bool *out);

void kc_graph_free(struct KcGraph *g);

/**
 * Second-largest absolute eigenvalue of the zero-diagonal pair operator on
 * `[q]²`; needs `q >= 4`.
 */
enum KcStatus kc_dmr_spectral_radius(size_t q, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* KCOLOR_H */
