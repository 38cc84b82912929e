#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pg.hpp"

namespace lqcpg {

struct SimConfig {
    int num_paths = 1000;
    TimeGrid sim_grid{TimeGrid::uniform(1.0, 128)};            // Euler-Maruyama steps
    TimeGrid randomisation_grid{TimeGrid::uniform(1.0, 128)};  // action-noise refresh; nodes must be
                                                               // a subset of sim_grid nodes
    std::uint64_t seed = 0;
    Vector xi0_mean;
    Matrix xi0_cov;
};

struct McEstimate {
    Matrix value;      // 1x1 for scalars
    Matrix std_error;  // same shape, componentwise
    int num_paths = 0;
};

// Streaming reduction of the simulated ensemble.  Per-path costs are kept
// in full; state statistics are accumulated per node in fixed path order,
// so identical (seed, config) gives bit-identical contents.  The first few
// paths are stored whole for inspection.
struct PathEnsemble {
    SimConfig config;
    std::vector<double> path_costs;
    std::vector<Vector> sum_state;        // per sim node
    std::vector<Matrix> sum_outer;        // per node: sum of x x^T
    std::vector<Matrix> sum_outer_sq;     // per node: componentwise (x x^T)^2
    std::vector<std::vector<Vector>> sample_paths;  // first <= 16 paths
};

// Euler-Maruyama simulation of the randomized linear dynamics
//   X_{i+1} = X_i + (A X_i + B a_i) dt + sum_j (C_j X_i + D_j a_i) dW_j,
//   a_i = K X_i + V^{1/2} zeta,
// with zeta refreshed per randomisation interval.  Per-path costs integrate
// the quadratic running cost at the realized action plus the closed-form
// Gaussian relative entropy, by left-endpoint Riemann sum, plus the
// terminal cost.
PathEnsemble simulate_paths(const LqcModel& model, const Policy& theta, const SimConfig& cfg);

McEstimate estimate_cost(const PathEnsemble& ensemble);

// Empirical second moments E[X X^T] at the given sim-grid node indices,
// with jackknife standard errors.
std::vector<McEstimate> estimate_covariance(const PathEnsemble& ensemble,
                                            const std::vector<int>& node_indices);

struct McGradient {
    std::vector<Matrix> grad_K, grad_K_se;  // per interval of theta's grid
    std::vector<Matrix> grad_V, grad_V_se;
    std::vector<Matrix> sigma_nodes;        // empirical second moment at interval starts
};

// Central finite differences of the Monte Carlo cost per policy entry with
// common random numbers: both sides of every difference reuse the identical
// (seed, path) noise.  Standard errors come from the per-path cost
// differences.  Throws if a perturbed V loses positive definiteness.
McGradient estimate_gradient_fd_crn(const LqcModel& model, const Policy& theta, const SimConfig& cfg,
                                    double h);

// Model-free scaled PG: per iteration simulate, estimate gradients and the
// covariance preconditioner, update
//   K_i <- K_i - tau/Delta_i * grad_K_i * (Sigma_hat_i + reg I)^{-1},
//   V_i <- V_i - tau/Delta_i * (V_i grad_V_i + grad_V_i V_i).
// The +1e-8 I regularization activates only when Sigma_hat is near
// singular.  Costs recorded are the per-iteration Monte Carlo estimates.
RunRecord run_model_free_pg(const LqcModel& model, const Policy& theta0, const PgConfig& pg_cfg,
                            const SimConfig& sim_cfg, double fd_step, double reference_optimum);

// CSV: t, mean state, second moment entries, std errors; one row per node.
void write_ensemble_csv(const PathEnsemble& ensemble, const std::string& path);

}  // namespace lqcpg
