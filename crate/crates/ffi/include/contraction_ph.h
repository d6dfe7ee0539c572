#ifndef CONTRACTION_PH_H
#define CONTRACTION_PH_H

/* Generated by cbindgen from the contraction-ph-ffi crate. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes of every fallible call.
 */
typedef enum CphStatus {
  CPH_STATUS_OK = 0,
  CPH_STATUS_INVALID_INPUT = 1,
  CPH_STATUS_SCHEMA = 2,
  CPH_STATUS_DISCONNECTED = 3,
  CPH_STATUS_NO_CYCLE = 4,
  CPH_STATUS_HYPOTHESIS_VIOLATION = 5,
  CPH_STATUS_INVALID_BASEPOINT = 6,
  CPH_STATUS_BUDGET_EXCEEDED = 7,
  CPH_STATUS_INTERNAL = 8,
  CPH_STATUS_IO = 9,
  CPH_STATUS_NULL_POINTER = 10,
  CPH_STATUS_INVALID_UTF8 = 11,
  CPH_STATUS_PANIC = 12,
} CphStatus;

/**
 * Opaque metric graph.
 */
typedef struct CphGraph CphGraph;

/**
 * Opaque closed walk in a graph.
 */
typedef struct CphLoop CphLoop;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or NULL. The pointer is
 * valid until the next failing call on the same thread.
 */
const char *cph_last_error_message(void);

/**
 * Frees a string returned by this API.
 *
 * # Safety
 * `s` is NULL or a string from this API not yet freed.
 */
void cph_string_free(char *s);

/**
 * Parses graph JSON into a new handle.
 *
 * # Safety
 * `json` is a NUL-terminated string; `out` is writable.
 */
enum CphStatus cph_graph_from_json(const char *json, struct CphGraph **out);

/**
 * # Safety
 * `g` is NULL or a live graph handle; it must not be used afterwards.
 */
void cph_graph_free(struct CphGraph *g);

/**
 * Number of vertices, or 0 for NULL.
 *
 * # Safety
 * `g` is NULL or a live graph handle.
 */
size_t cph_graph_vertex_count(const struct CphGraph *g);

/**
 * Number of edges, or 0 for NULL.
 *
 * # Safety
 * `g` is NULL or a live graph handle.
 */
size_t cph_graph_edge_count(const struct CphGraph *g);

/**
 * A shortest cycle of the graph.
 *
 * # Safety
 * `g` is a live graph handle; `out` is writable.
 */
enum CphStatus cph_shortest_cycle(const struct CphGraph *g, struct CphLoop **out);

/**
 * The simple cycle on the given edge ids.
 *
 * # Safety
 * `g` is a live graph handle; `ids` points to `count` readable values; `out` is writable.
 */
enum CphStatus cph_loop_from_edge_ids(const struct CphGraph *g,
                                      const uint64_t *ids,
                                      size_t count,
                                      struct CphLoop **out);

/**
 * # Safety
 * `l` is NULL or a live loop handle; it must not be used afterwards.
 */
void cph_loop_free(struct CphLoop *l);

/**
 * Length of the loop as an exact rational string.
 *
 * # Safety
 * `l` is a live loop handle; `out` is writable.
 */
enum CphStatus cph_loop_length(const struct CphLoop *l, char **out);

/**
 * Whether the loop is isometrically embedded in the graph.
 *
 * # Safety
 * `g`, `l` are live handles with `l` built on `g`; `out` is writable.
 */
enum CphStatus cph_is_geodesic_circle(const struct CphGraph *g, const struct CphLoop *l, bool *out);

/**
 * Builds the combing contraction onto `l` and certifies it as a
 * 1-Lipschitz retraction at the given mesh (a rational string).
 *
 * # Safety
 * `g`, `l` are live handles with `l` built on `g`; `mesh` is a
 * NUL-terminated string; `certified` is writable.
 */
enum CphStatus cph_comb_certify(const struct CphGraph *g,
                                const struct CphLoop *l,
                                const char *mesh,
                                bool *certified);

/**
 * Barcode JSON of the Rips filtration of the graph sampled at `mesh`.
 *
 * # Safety
 * `g` is a live handle; `mesh` is a NUL-terminated string; `out` is writable.
 */
enum CphStatus cph_barcode_json(const struct CphGraph *g,
                                const char *mesh,
                                size_t max_dim,
                                uint32_t field,
                                uint64_t budget,
                                char **out);

/**
 * Outcome JSON of the winding obstruction search onto `l`.
 *
 * # Safety
 * `g`, `l` are live handles with `l` built on `g`; `out` is writable.
 */
enum CphStatus cph_obstruction_json(const struct CphGraph *g,
                                    const struct CphLoop *l,
                                    uint32_t bound,
                                    char **out);

/**
 * Certificate JSON for the concentric-circles graph.
 *
 * # Safety
 * `out` is writable.
 */
enum CphStatus cph_counterexample_json(uint32_t bound, char **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CONTRACTION_PH_H */
