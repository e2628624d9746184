#ifndef SHAPEOT_H
#define SHAPEOT_H

/* Generated with cbindgen:0.29.4 */

/* This file is generated by cbindgen from shapeot-ffi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Status codes returned by every fallible call.
typedef enum ShapeotStatus {
  SHAPEOT_STATUS_OK = 0,
  SHAPEOT_STATUS_NULL_ARGUMENT = 1,
  SHAPEOT_STATUS_INVALID_UTF8 = 2,
  SHAPEOT_STATUS_PARSE_ERROR = 3,
  SHAPEOT_STATUS_DIMENSION_ERROR = 4,
  SHAPEOT_STATUS_UNSUPPORTED_P = 5,
  SHAPEOT_STATUS_SOLVER_ERROR = 6,
  SHAPEOT_STATUS_ALGEBRA_ERROR = 7,
  SHAPEOT_STATUS_INVALID_ARGUMENT = 8,
  SHAPEOT_STATUS_IO_ERROR = 9,
  SHAPEOT_STATUS_PANIC = 10,
} ShapeotStatus;

// Opaque handle to a discrete measure.
typedef struct ShapeotMeasure ShapeotMeasure;

// Options for the alternating shape-distance solver.
typedef struct ShapeotShapeConfig {
  // Cost exponent; the alternating solver requires 2.0.
  double p;
  // Restart count (identity + PCA + Haar-random).
  size_t restarts;
  // Alternation cap per restart.
  size_t max_alternations;
  // Relative objective-decrease stopping tolerance.
  double rel_tol;
  // Seed for the restart schedule.
  uint64_t seed;
  // Nonzero: run Sinkhorn inside alternations (final value stays exact).
  uint8_t use_entropic;
  // Target epsilon for the entropic inner loop.
  double entropic_epsilon;
} ShapeotShapeConfig;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message describing the most recent failure on this thread. The pointer
// stays valid until the next failing call on the same thread.
const char *shapeot_last_error_message(void);

// Library version as a static C string.
const char *shapeot_version(void);

// Builds a measure from a row-major `atoms x dim` coordinate buffer and an
// `atoms` weight buffer. Weights are normalized to total mass one.
//
// # Safety
// `points` must hold `atoms * dim` doubles, `weights` must hold `atoms`
// doubles, and `out` must be a valid location for one pointer.
enum ShapeotStatus shapeot_measure_create(const double *points,
                                          const double *weights,
                                          size_t atoms,
                                          size_t dim,
                                          struct ShapeotMeasure **out);

// Reads a measure from a `.json` or `.csv` file.
//
// # Safety
// `path` must be a NUL-terminated string and `out` a valid pointer slot.
enum ShapeotStatus shapeot_measure_read(const char *path, struct ShapeotMeasure **out);

// Writes a measure to a `.json` or `.csv` file.
//
// # Safety
// `measure` must come from this library and `path` must be NUL-terminated.
enum ShapeotStatus shapeot_measure_write(const struct ShapeotMeasure *measure, const char *path);

// Number of atoms, or 0 for a null handle.
//
// # Safety
// `measure` must be null or a live handle from this library.
size_t shapeot_measure_atoms(const struct ShapeotMeasure *measure);

// Ambient dimension, or 0 for a null handle.
//
// # Safety
// `measure` must be null or a live handle from this library.
size_t shapeot_measure_dim(const struct ShapeotMeasure *measure);

// Writes the barycenter into `out` (`dim` doubles).
//
// # Safety
// `out` must hold at least `shapeot_measure_dim(measure)` doubles.
enum ShapeotStatus shapeot_measure_barycenter(const struct ShapeotMeasure *measure, double *out);

// Frees a measure handle; null is a no-op.
//
// # Safety
// `measure` must be null or a pointer previously returned by a constructor
// in this library, not yet freed.
void shapeot_measure_free(struct ShapeotMeasure *measure);

// Exact Wasserstein transport: writes the optimal cost and distance.
//
// # Safety
// Handles must be live; output pointers may each be null to skip them.
enum ShapeotStatus shapeot_wasserstein_exact(const struct ShapeotMeasure *mu,
                                             const struct ShapeotMeasure *nu,
                                             double p,
                                             double *out_cost,
                                             double *out_distance);

// Entropic transport with marginal repair; cost is an upper bound on exact.
//
// # Safety
// Same contract as [`shapeot_wasserstein_exact`].
enum ShapeotStatus shapeot_wasserstein_entropic(const struct ShapeotMeasure *mu,
                                                const struct ShapeotMeasure *nu,
                                                double p,
                                                double epsilon,
                                                size_t max_iter,
                                                double marginal_tol,
                                                double *out_cost,
                                                double *out_distance);

// Default solver configuration (p = 2, 16 restarts, exact inner loop).
struct ShapeotShapeConfig shapeot_shape_config_default(void);

// Alternating shape-distance solver. On success writes the best distance
// and, when the buffers are non-null, the minimizing rotation (row-major
// `dim x dim`) and translation (`dim`).
//
// # Safety
// Handles must be live. `config` may be null for defaults. `out_rotation`
// must hold `dim*dim` doubles and `out_translation` `dim` doubles when
// non-null.
enum ShapeotStatus shapeot_shape_distance(const struct ShapeotMeasure *mu,
                                          const struct ShapeotMeasure *nu,
                                          const struct ShapeotShapeConfig *config,
                                          double *out_distance,
                                          double *out_rotation,
                                          double *out_translation);

// Certified rotation-grid oracle for planar measures.
//
// # Safety
// Handles must be live; `out_distance` may be null.
enum ShapeotStatus shapeot_shape_distance_oracle_2d(const struct ShapeotMeasure *mu,
                                                    const struct ShapeotMeasure *nu,
                                                    size_t grid_steps,
                                                    double p,
                                                    double *out_distance);

// Orbit-subspace dimensions at a measure: Killing rank, tangent dimension
// m·n, shape tangent dimension, and kernel dimension.
//
// # Safety
// `measure` must be live; output pointers may each be null to skip them.
enum ShapeotStatus shapeot_orbit_dimensions(const struct ShapeotMeasure *measure,
                                            double rank_rel_tol,
                                            size_t *out_rank,
                                            size_t *out_tangent_dim,
                                            size_t *out_shape_tangent_dim,
                                            size_t *out_kernel_dim);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SHAPEOT_H */
