/*
 * C interface to the lqcpg library: entropy-regularized stochastic
 * linear-quadratic control with geometry-aware policy gradient methods.
 *
 * All functions return a status code (LQCPG_OK on success); outputs are
 * written through pointers.  Objects are opaque handles created and
 * released by the matching *_free function.  On failure, a thread-local
 * message is available via lqcpg_last_error().
 *
 * Matrices cross the boundary as row-major double arrays.
 */
#ifndef LQCPG_H
#define LQCPG_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define LQCPG_API __declspec(dllexport)
#else
#define LQCPG_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

enum lqcpg_status {
    LQCPG_OK = 0,
    LQCPG_ERR_CONFIG = 1,    /* malformed config, unknown preset, bad file */
    LQCPG_ERR_NUMERICAL = 2, /* solve or estimator breakdown */
    LQCPG_ERR_ARGUMENT = 3,  /* contract violation (null handle, bad shape) */
    LQCPG_ERR_IO = 4         /* unwritable output path */
};

typedef struct lqcpg_model lqcpg_model;
typedef struct lqcpg_policy lqcpg_policy;
typedef struct lqcpg_riccati lqcpg_riccati;
typedef struct lqcpg_run lqcpg_run;
typedef struct lqcpg_spec lqcpg_spec;

LQCPG_API const char* lqcpg_last_error(void);
LQCPG_API const char* lqcpg_version(void);

/* ---- model ---- */

LQCPG_API int lqcpg_model_from_preset(const char* name, lqcpg_model** out);
LQCPG_API int lqcpg_model_from_config(const char* path, lqcpg_model** out);
LQCPG_API void lqcpg_model_free(lqcpg_model* model);
LQCPG_API int lqcpg_model_dims(const lqcpg_model* model, int* state_dim, int* action_dim,
                               int* noise_channels);

/* Validates the standing assumptions on a uniform grid with `grid_n`
 * intervals.  *ok is 1 iff no assumption is violated; the report (one line
 * per violation/warning) is copied into `report` when non-null. */
LQCPG_API int lqcpg_validate(const lqcpg_model* model, int grid_n, int* ok, char* report,
                             size_t report_capacity);

/* ---- policies ---- */

/* Constant policy on a uniform grid: K is k*d row-major, V is k*k. */
LQCPG_API int lqcpg_policy_constant(const lqcpg_model* model, int grid_n, const double* K,
                                    const double* V, lqcpg_policy** out);
/* L2 projection onto a uniform grid (interval averages; v_left_sample != 0
 * switches V to left-endpoint sampling). */
LQCPG_API int lqcpg_policy_project(const lqcpg_policy* policy, int grid_n, int v_left_sample,
                                   lqcpg_policy** out);
LQCPG_API void lqcpg_policy_free(lqcpg_policy* policy);
/* Values on interval `i`: K into k*d buffer, V into k*k buffer. */
LQCPG_API int lqcpg_policy_values(const lqcpg_policy* policy, int interval, double* K, double* V);
LQCPG_API int lqcpg_policy_num_intervals(const lqcpg_policy* policy, int* out);

/* ---- Riccati / optimal policy ---- */

LQCPG_API int lqcpg_riccati_solve(const lqcpg_model* model, int grid_n, int refine, lqcpg_riccati** out);
LQCPG_API void lqcpg_riccati_free(lqcpg_riccati* riccati);
LQCPG_API int lqcpg_riccati_info(const lqcpg_riccati* riccati, int* strongly_regular,
                                 double* delta_tilde);
/* Optimal cost 1/2 tr(P*_0 Sigma0) + phi*_0 on the solve grid. */
LQCPG_API int lqcpg_riccati_optimal_cost(const lqcpg_model* model, const lqcpg_riccati* riccati,
                                         double* out);
LQCPG_API int lqcpg_optimal_policy(const lqcpg_model* model, const lqcpg_riccati* riccati,
                                   lqcpg_policy** out);

/* ---- cost evaluation ---- */

/* out[0..4] = total, quadratic_terminal, running_quadratic, entropy_term,
 * representation_gap.  `rk4` != 0 selects the high-order integrator. */
LQCPG_API int lqcpg_evaluate_cost(const lqcpg_model* model, const lqcpg_policy* policy, int refine,
                                  int rk4, double out[5]);
/* CSV dump of the P / Sigma / phi trajectories. */
LQCPG_API int lqcpg_trajectory_csv(const lqcpg_model* model, const lqcpg_policy* policy, int refine,
                                   int rk4, const char* path);

/* ---- policy gradient runs ---- */

/* variant: 0 continuous, 1 discrete scaled, 2 discrete unscaled. */
LQCPG_API int lqcpg_pg_run(const lqcpg_model* model, const lqcpg_policy* theta0,
                           const lqcpg_riccati* reference, int variant, double tau, int max_iterations,
                           double stop_epsilon, int refine, lqcpg_run** out);
LQCPG_API void lqcpg_run_free(lqcpg_run* run);
LQCPG_API int lqcpg_run_info(const lqcpg_run* run, int* iterations_run, int* n_epsilon,
                             double* reference_optimum, int* aborted);
/* Cost trace; returns the number of entries copied (capacity permitting). */
LQCPG_API int lqcpg_run_costs(const lqcpg_run* run, double* costs, size_t capacity, size_t* written);
LQCPG_API int lqcpg_run_csv(const lqcpg_run* run, const char* path);

/* Mesh sweep over uniform meshes; counts measured at `epsilon` against the
 * tail-average mesh-restricted optimum.  rows_* buffers hold one entry per
 * mesh. */
LQCPG_API int lqcpg_mesh_sweep(const lqcpg_model* model, const lqcpg_policy* theta0, const int* meshes,
                               int num_meshes, int eval_grid, double epsilon, double tau_scaled,
                               double tau_unscaled, int iterations_scaled, int iterations_unscaled,
                               int* n_scaled, int* n_unscaled, int* n_continuous, double* c_pi_star,
                               const char* csv_path_or_null);

/* ---- landscape checks ---- */

/* C(s * K^eps) of the 1-D noncoercivity example on a uniform grid of [0,1]. */
LQCPG_API int lqcpg_noncoercive_cost(double epsilon, double scaling, int grid_n, double* out);

/* Randomized verification sweep of the performance-gap identity and the
 * Lojasiewicz / almost-smoothness inequalities.  Outputs (when non-null):
 * number of satisfied checks, total checks, worst identity residual. */
LQCPG_API int lqcpg_landscape_sweep(int scalar_cases, int matrix_cases, uint64_t seed, int grid_n,
                                    int* satisfied, int* total, double* max_gap_residual,
                                    const char* csv_path_or_null);

/* ---- Monte Carlo ---- */

/* Simulates `paths` trajectories on a uniform grid with `grid_n` steps and
 * estimates the cost (mean and standard error).  Optional CSV dump of the
 * per-node state statistics. */
LQCPG_API int lqcpg_mc_estimate(const lqcpg_model* model, const lqcpg_policy* policy, int paths,
                                int grid_n, uint64_t seed, double* cost_mean, double* cost_se,
                                const char* csv_path_or_null);

/* Model-free scaled PG with finite-difference common-random-number
 * gradients.  Writes the estimated-cost trace like lqcpg_pg_run. */
LQCPG_API int lqcpg_model_free_pg(const lqcpg_model* model, const lqcpg_policy* theta0, double tau,
                                  int iterations, int paths, int grid_n, uint64_t seed, double fd_step,
                                  double reference_optimum, lqcpg_run** out);

/* ---- benchmark orchestration ---- */

LQCPG_API int lqcpg_spec_from_preset(const char* name, lqcpg_spec** out);
LQCPG_API int lqcpg_spec_from_config(const char* path, lqcpg_spec** out);
LQCPG_API void lqcpg_spec_free(lqcpg_spec* spec);
/* Canonical config emission (round-trips through lqcpg_spec_from_config). */
LQCPG_API int lqcpg_spec_emit(const lqcpg_spec* spec, char* buffer, size_t capacity, size_t* written);
/* Scalar overrides keyed by config name: "grid", "epsilon", "tau_scaled",
 * "tau_unscaled", "pg_iterations", "pg_iterations_unscaled", "mc.paths",
 * "mc.grid", "mc.seed", "repetitions", "mode" (0 model-based, 1 model-free),
 * "model_free.grid", "model_free.iterations". */
LQCPG_API int lqcpg_spec_set(lqcpg_spec* spec, const char* key, double value);
/* Reads the same scalar keys lqcpg_spec_set writes. */
LQCPG_API int lqcpg_spec_get(const lqcpg_spec* spec, const char* key, double* out);
LQCPG_API int lqcpg_spec_mesh_family(const lqcpg_spec* spec, int* meshes, size_t capacity,
                                     size_t* count);
LQCPG_API int lqcpg_spec_model(const lqcpg_spec* spec, lqcpg_model** out);
/* The spec's initial policy theta0 as a constant policy on a uniform grid. */
LQCPG_API int lqcpg_spec_initial_policy(const lqcpg_spec* spec, int grid_n, lqcpg_policy** out);

/* format: 0 csv, 1 svg, 2 both.  dry_run != 0 writes the manifest only. */
LQCPG_API int lqcpg_bench_run(const lqcpg_spec* spec, const char* out_dir, int format, int dry_run);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* LQCPG_H */
