#ifndef CMAP_H
#define CMAP_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

// Status codes. Values are stable; new codes are only ever appended.
typedef enum CmapStatus {
  CMAP_OK = 0,
  CMAP_NULL_POINTER = 1,
  CMAP_PANIC = 2,
  CMAP_DEGENERATE_POINT = 10,
  CMAP_OUTSIDE_TUBULAR_NEIGHBORHOOD = 11,
  CMAP_NOT_ON_BOUNDARY = 12,
  CMAP_GRID_TOO_SMALL = 13,
  CMAP_GRID_MISMATCH = 14,
  CMAP_NON_CONVERGENCE = 15,
  CMAP_NEGATIVE_SOURCE = 16,
  CMAP_BOUNDARY_DATA_OUTSIDE_TARGET = 17,
  CMAP_EMPTY_SET = 18,
  CMAP_NOT_FREE_BOUNDARY_POINT = 19,
  CMAP_INSUFFICIENT_NODES = 20,
  CMAP_ZERO_COEFFICIENT = 21,
  CMAP_EMPTY_SCALE_WINDOW = 22,
  CMAP_INVALID_CONIC = 23,
  CMAP_BRANCH_CUT = 24,
  CMAP_PATH_BLOCKED = 25,
  CMAP_ORIGIN_SINGULARITY = 26,
  CMAP_KERNEL_SINGULARITY = 27,
  CMAP_QUADRATURE_TOO_COARSE = 28,
  CMAP_HYPOTHESIS_VIOLATED = 29,
  CMAP_INVALID_ARGUMENT = 30,
  CMAP_FIELD_FORMAT = 31,
  CMAP_CONFIG_PARSE = 32,
  CMAP_IO = 33,
} CmapStatus;

// Two-dimensional global solution.
typedef struct CmapGlobal CmapGlobal;

// Uniform 1D or 2D grid.
typedef struct CmapGrid CmapGrid;

// Result of an obstacle solve.
typedef struct CmapObstacle CmapObstacle;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Copies the last error message of this thread into `buf` (NUL-terminated,
// truncated to `len`). Returns the full message length without the NUL.
//
// # Safety
// `buf` must be null or point to `len` writable bytes.
uintptr_t cmap_last_error_message(char *buf, uintptr_t len);

// Static name of a status, e.g. `"InvalidConic"`; never null.
const char *cmap_status_name(enum CmapStatus status);

// Square grid `[lo, hi]^dims` with `n` nodes per axis (`dims` is 1 or 2).
enum CmapStatus cmap_grid_new(uintptr_t dims,
                              double lo,
                              double hi,
                              uintptr_t n,
                              struct CmapGrid **out);

// # Safety
// `grid` must be null or come from [`cmap_grid_new`] and not be freed yet.
void cmap_grid_free(struct CmapGrid *grid);

// Node count; 0 for a null grid.
//
// # Safety
// `grid` must be null or a live grid handle.
uintptr_t cmap_grid_len(const struct CmapGrid *grid);

// Spacing; NaN for a null grid.
//
// # Safety
// `grid` must be null or a live grid handle.
double cmap_grid_h(const struct CmapGrid *grid);

// Projected SOR for `Δw = g χ{w>0}`, `w ≥ 0`. `g` and `boundary` hold one
// value per node (x fastest); only the outer ring of `boundary` is used.
// A run that hits `max_iter` returns `CMAP_NON_CONVERGENCE` and no handle.
//
// # Safety
// `grid` must be a live grid handle; `g` and `boundary` must point to
// `len` doubles each.
enum CmapStatus cmap_solve_obstacle(const struct CmapGrid *grid,
                                    const double *g,
                                    const double *boundary,
                                    uintptr_t len,
                                    double tol,
                                    uintptr_t max_iter,
                                    double omega,
                                    struct CmapObstacle **out);

// # Safety
// `sol` must be null or a live obstacle handle.
void cmap_obstacle_free(struct CmapObstacle *sol);

// Copies `w` into `out` (`len` must equal the node count).
//
// # Safety
// `sol` must be a live obstacle handle; `out` must hold `len` doubles.
enum CmapStatus cmap_obstacle_w(const struct CmapObstacle *sol, double *out, uintptr_t len);

// Free-boundary node count, sweep count and complementarity residual.
//
// # Safety
// `sol` must be a live obstacle handle; the outputs must be writable.
enum CmapStatus cmap_obstacle_stats(const struct CmapObstacle *sol,
                                    uintptr_t *fb_points,
                                    uintptr_t *iterations,
                                    double *residual);

// Global solution of the given kind (`"ellipse"`, `"parabola"`,
// `"half-plane"`, `"strip"` or `"line"`).
//
// # Safety
// `kind` must be a NUL-terminated string.
enum CmapStatus cmap_global_new(const char *kind,
                                double a,
                                double alpha,
                                double beta,
                                double rotation,
                                double width,
                                struct CmapGlobal **out);

// # Safety
// `gs` must be null or a live global-solution handle.
void cmap_global_free(struct CmapGlobal *gs);

// `U(x, y)`.
//
// # Safety
// `gs` must be a live global-solution handle; `out` must be writable.
enum CmapStatus cmap_global_eval(const struct CmapGlobal *gs, double x, double y, double *out);

// The scale `δ`, the parameter `μ`, and the largest `|S(z) − z̄|` over
// `samples` free-boundary points (NaN for non-conics, `samples = 0` skips).
//
// # Safety
// `gs` must be a live global-solution handle; the outputs must be writable.
enum CmapStatus cmap_global_stats(const struct CmapGlobal *gs,
                                  uintptr_t samples,
                                  double *delta,
                                  double *mu,
                                  double *schwarz_residual);

// Log-log slope of the degree-`degree` fit residual of a field at `(x, y)`
// over decreasing `scales` (at least four).
//
// # Safety
// `grid` must be a live grid handle; `values` must hold one double per
// node and `scales` `n_scales` doubles; `out` must be writable.
enum CmapStatus cmap_growth_exponent(const struct CmapGrid *grid,
                                     const double *values,
                                     uintptr_t len,
                                     double x,
                                     double y,
                                     uintptr_t degree,
                                     const double *scales,
                                     uintptr_t n_scales,
                                     double *out);

// Runs the experiment described by the TOML file at `config_path` and
// returns its JSON report in `*report_json` (free with [`cmap_string_free`]).
//
// # Safety
// `config_path` must be a NUL-terminated string; `report_json` writable.
enum CmapStatus cmap_run_config(const char *config_path, char **report_json);

// # Safety
// `s` must be null or a string returned by this library, not yet freed.
void cmap_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CMAP_H */
