#ifndef NEWSDIFF_H
#define NEWSDIFF_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result code of every fallible call.
typedef enum NdStatus {
  ND_STATUS_OK = 0,
  ND_STATUS_NULL_POINTER = 1,
  ND_STATUS_INVALID_ARGUMENT = 2,
  ND_STATUS_OUT_OF_RANGE = 3,
  // The run hit `max_steps` before reaching a fixed point.
  ND_STATUS_NOT_CONVERGED = 4,
  ND_STATUS_FIT_FAILED = 5,
  ND_STATUS_PANIC = 6,
} NdStatus;

typedef enum NdFitShape {
  ND_FIT_SHAPE_RISING = 0,
  ND_FIT_SHAPE_FALLING = 1,
} NdFitShape;

// Opaque ensemble result.
typedef struct NdEnsemble NdEnsemble;

// Opaque single-run result.
typedef struct NdTrajectory NdTrajectory;

// Simulation settings. `seed_row`/`seed_col` of -1 select the center.
typedef struct NdSimConfig {
  uint32_t width;
  uint32_t height;
  int64_t seed_row;
  int64_t seed_col;
  bool toroidal;
  uint64_t rng_seed;
  uint32_t max_steps;
  double adoption_threshold;
  double boost_factor;
  uint8_t boost_below;
} NdSimConfig;

typedef struct NdCounts {
  uint64_t white;
  uint64_t grey;
  uint64_t black;
} NdCounts;

typedef struct NdFractions {
  double white;
  double grey;
  double black;
} NdFractions;

typedef struct NdConvergenceStats {
  uint64_t min;
  double median;
  uint64_t max;
  // Number of converged runs the statistics cover.
  uint64_t count;
} NdConvergenceStats;

typedef struct NdCrossPoint {
  uint64_t step;
  double level;
  double spread;
} NdCrossPoint;

typedef struct NdLogisticParams {
  double c;
  double tau;
  double gamma;
} NdLogisticParams;

typedef struct NdAnalyticModel {
  struct NdLogisticParams grey;
  struct NdLogisticParams white;
} NdAnalyticModel;

typedef struct NdFitResult {
  struct NdLogisticParams params;
  double rmse;
  uint64_t iterations;
  bool converged;
} NdFitResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string.
const char *nd_version(void);

// Writes the calling thread's last error message into `buf` (at most
// `len` bytes including the NUL) and returns the size needed.
//
// # Safety
// `buf` must be null or point to `len` writable bytes.
size_t nd_last_error(char *buf, size_t len);

// Fills `out` with the default 40x40 centered configuration.
//
// # Safety
// `out` must be null or valid for writes.
enum NdStatus nd_sim_config_default(struct NdSimConfig *out);

// Runs one simulation. A run that hits `max_steps` still yields a handle;
// query [`nd_trajectory_converged_at`] to tell.
//
// # Safety
// `config` must be null or point to a valid config; `out` must be null or
// valid for writes.
enum NdStatus nd_simulate(const struct NdSimConfig *config, struct NdTrajectory **out);

// Number of recorded states (steps + 1); 0 for a null handle.
//
// # Safety
// `traj` must be null or a live handle from [`nd_simulate`].
size_t nd_trajectory_len(const struct NdTrajectory *traj);

// # Safety
// `traj` must be null or a live handle; `out` null or valid for writes.
enum NdStatus nd_trajectory_counts(const struct NdTrajectory *traj,
                                   size_t step,
                                   struct NdCounts *out);

// Writes the fixed-point step, or returns `NotConverged`.
//
// # Safety
// `traj` must be null or a live handle; `out` null or valid for writes.
enum NdStatus nd_trajectory_converged_at(const struct NdTrajectory *traj, uint64_t *out);

// Writes the first step without Black cells, or returns `NotConverged`.
//
// # Safety
// `traj` must be null or a live handle; `out` null or valid for writes.
enum NdStatus nd_trajectory_black_extinct_at(const struct NdTrajectory *traj, uint64_t *out);

// ASCII rendering of the final grid; same contract as [`nd_last_error`].
//
// # Safety
// `traj` must be null or a live handle; `buf` null or `len` writable bytes.
size_t nd_trajectory_final_grid(const struct NdTrajectory *traj, char *buf, size_t len);

// # Safety
// `traj` must be null or a handle not yet freed.
void nd_trajectory_free(struct NdTrajectory *traj);

// Runs `runs` seeded simulations. `threads == 0` uses all cores; the
// result is the same for any thread count.
//
// # Safety
// `config` must be null or valid; `out` null or valid for writes.
enum NdStatus nd_ensemble_run(const struct NdSimConfig *config,
                              uint32_t runs,
                              uint32_t threads,
                              struct NdEnsemble **out);

// Length of the mean fraction series; 0 for a null handle.
//
// # Safety
// `ens` must be null or a live handle.
size_t nd_ensemble_len(const struct NdEnsemble *ens);

// # Safety
// `ens` must be null or a live handle; `out` null or valid for writes.
enum NdStatus nd_ensemble_fractions(const struct NdEnsemble *ens,
                                    size_t step,
                                    struct NdFractions *out);

// Convergence statistics over converged runs; `NotConverged` if none did.
//
// # Safety
// `ens` must be null or a live handle; `out` null or valid for writes.
enum NdStatus nd_ensemble_convergence(const struct NdEnsemble *ens, struct NdConvergenceStats *out);

// Number of runs that hit `max_steps`; 0 for a null handle.
//
// # Safety
// `ens` must be null or a live handle.
size_t nd_ensemble_non_converged(const struct NdEnsemble *ens);

// # Safety
// `ens` must be null or a live handle; `out` null or valid for writes.
enum NdStatus nd_ensemble_cross_point(const struct NdEnsemble *ens, struct NdCrossPoint *out);

// Final mean fractions of the ensemble.
//
// # Safety
// `ens` must be null or a live handle; `out` null or valid for writes.
enum NdStatus nd_ensemble_stabilization(const struct NdEnsemble *ens, struct NdFractions *out);

// # Safety
// `ens` must be null or a handle not yet freed.
void nd_ensemble_free(struct NdEnsemble *ens);

// The reference parameterization: grey `(0.75, 30, 0.15)`, white `(0.75, 20, 0.25)`.
//
// # Safety
// `out` must be null or valid for writes.
enum NdStatus nd_model_default(struct NdAnalyticModel *out);

// Evaluates the three model curves at `t`. Black may be slightly negative.
//
// # Safety
// `model` must be null or valid; `out` null or valid for writes.
enum NdStatus nd_model_eval(const struct NdAnalyticModel *model, double t, struct NdFractions *out);

// Least-squares logistic fit to `len` samples `(steps[i], values[i])`.
// `shape` takes an [`NdFitShape`] value.
//
// # Safety
// `steps` and `values` must each point to `len` readable doubles; `out`
// must be null or valid for writes.
enum NdStatus nd_fit_logistic(const double *steps,
                              const double *values,
                              size_t len,
                              uint32_t shape,
                              struct NdFitResult *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* NEWSDIFF_H */
