#ifndef LICURV_H
#define LICURV_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes.
 */
typedef enum LicurvStatus {
  LICURV_STATUS_OK = 0,
  LICURV_STATUS_NULL_POINTER = 1,
  LICURV_STATUS_INVALID_ARGUMENT = 2,
  LICURV_STATUS_INVALID_GRAPH = 3,
  LICURV_STATUS_PRECONDITION = 4,
  LICURV_STATUS_NUMERICAL = 5,
  LICURV_STATUS_IO = 6,
  LICURV_STATUS_PANIC = 7,
} LicurvStatus;

/**
 * A weighted graph with a vertex measure.
 */
typedef struct LicurvGraph LicurvGraph;

/**
 * A heat equation solution sampled on a time grid.
 */
typedef struct LicurvHeat LicurvHeat;

/**
 * Regularity constants of a graph.
 */
typedef struct LicurvBounds {
  double omega_min;
  double d_omega;
  double d_mu;
  double mu_max;
} LicurvBounds;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failure on this thread, or null. Valid until the next
 * failing call on the same thread.
 */
const char *licurv_last_error(void);

/**
 * Builds a graph from generator specs such as `"torus:2:5"`, `"unit"`, `"degree"`.
 */
enum LicurvStatus licurv_graph_generate(const char *family,
                                        const char *weights,
                                        const char *measure,
                                        struct LicurvGraph **out);

/**
 * Parses the graph JSON format `{vertices, edges, measure}`.
 */
enum LicurvStatus licurv_graph_from_json(const char *json, struct LicurvGraph **out);

/**
 * Writes the graph as JSON; free the string with [`licurv_string_free`].
 */
enum LicurvStatus licurv_graph_to_json(const struct LicurvGraph *g, char **out);

/**
 * Vertex count, or 0 for a null handle.
 */
size_t licurv_graph_vertex_count(const struct LicurvGraph *g);

enum LicurvStatus licurv_graph_bounds(const struct LicurvGraph *g, struct LicurvBounds *out);

void licurv_graph_free(struct LicurvGraph *g);

/**
 * `out[x] = Δf(x)`; all arrays have one entry per vertex.
 */
enum LicurvStatus licurv_laplacian(const struct LicurvGraph *g,
                                   const double *f,
                                   size_t len,
                                   double *out);

/**
 * `out[x] = Γ(f, h)(x)`.
 */
enum LicurvStatus licurv_gamma(const struct LicurvGraph *g,
                               const double *f,
                               const double *h,
                               size_t len,
                               double *out);

/**
 * Solves `∂_t u = Δu` from `u0` and samples it at the increasing `times`.
 */
enum LicurvStatus licurv_heat_evolve(const struct LicurvGraph *g,
                                     const double *u0,
                                     size_t len,
                                     const double *times,
                                     size_t time_count,
                                     struct LicurvHeat **out);

/**
 * Copies `u(·, times[j])` into `out`, which holds one entry per vertex.
 */
enum LicurvStatus licurv_heat_slice(const struct LicurvHeat *h, size_t j, double *out, size_t len);

void licurv_heat_free(struct LicurvHeat *h);

/**
 * `α(t)` and `φ(t)` for a rate profile spec such as `"power:2"` or `"sinh2"`.
 */
enum LicurvStatus licurv_alpha_phi(const char *profile,
                                   double k,
                                   double n,
                                   double t,
                                   double *alpha,
                                   double *phi);

/**
 * Largest `K` with `CDE(n, K)` at `x`, found by multistart search. Pass
 * `n = INFINITY` for the dimension-free condition.
 */
enum LicurvStatus licurv_cde_best_k(const struct LicurvGraph *g,
                                    size_t x,
                                    double n,
                                    size_t restarts,
                                    uint64_t seed,
                                    double *k_star);

/**
 * Minimal walk cost between `(x, t1)` and `(y, t2)`. `alpha` is `"const:C"`
 * or `"affine:A:B"`; `k_max = 0` picks the default walk length cap.
 */
enum LicurvStatus licurv_rho(const struct LicurvGraph *g,
                             size_t x,
                             size_t y,
                             double t1,
                             double t2,
                             const char *alpha,
                             size_t k_max,
                             double *rho,
                             size_t *k_star);

/**
 * Releases a string returned by this library.
 */
void licurv_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LICURV_H */
