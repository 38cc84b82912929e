#pragma once

#include <optional>
#include <string>
#include <vector>

#include "gradient.hpp"

namespace lqcpg {

enum class PgVariant { Continuous, DiscreteScaled, DiscreteUnscaled };

struct PgConfig {
    double tau = 0.01;
    int max_iterations = 1000;
    PgVariant variant = PgVariant::Continuous;
    double stop_epsilon = 1e-6;
    bool diagnostics_on = true;

    // Solver refinement for the per-iteration cost/gradient evaluation,
    // relative to the policy grid.
    int refine = 1;
    // Degenerate V handling: headline runs error out, diagnostic runs may
    // continue with the Moore-Penrose inverse.
    bool allow_pseudo_inverse = false;
};

struct DiagnosticsRecord {
    int iteration = 0;
    double cost = 0.0;
    double l2_K = 0.0;
    double min_eig_V = 0.0, max_eig_V = 0.0;      // envelopes over intervals
    double min_eig_Sigma = 0.0, max_eig_Sigma = 0.0;
    bool p_monotone_prev = true;   // P^{n-1} >= P^n (Loewner, 1e-8)
    bool p_dominates_star = true;  // P^n >= P* (Loewner, 1e-8)
    bool cost_monotone = true;     // C(theta^n) <= C(theta^{n-1}) + tol
    bool v_envelope_ok = true;     // min/max eig V within the a-priori band
    bool k_bound_ok = true;        // ||K^n|| within the running a-priori bound
    double lambda0_bar = 0.0;      // max eig of D^T P^{theta^0} D + R + rho Vbar^{-1}
    double delta_tilde = 0.0;      // strong-regularity margin of the reference
};

struct IterationStat {
    double cost = 0.0;
    double suboptimality = 0.0;
    double grad_K_l2 = 0.0;
    double grad_V_l2 = 0.0;
    DiagnosticsRecord diagnostics;
};

inline constexpr int kNotReached = -1;

struct RunRecord {
    std::vector<IterationStat> iterations;  // costs recorded verbatim
    int iterations_run = 0;
    bool reached_epsilon = false;
    int n_epsilon = kNotReached;
    double reference_optimum = 0.0;
    bool aborted = false;            // NaN cost; trace holds the snapshot
    std::string abort_reason;
    std::optional<Policy> final_theta;

    std::vector<double> costs() const;
};

// Continuous-time geometry-aware iteration on theta0's grid:
//   K <- K - tau D_K,  V <- V - tau (D_V V + V D_V).
// Stops at the first iterate with cost - reference < stop_epsilon, at
// max_iterations, or on a non-finite cost (aborted flag).  The reference
// optimum is the Riccati-route optimal cost on the matching solver grid.
RunRecord run_continuous_pg(const LqcModel& model, const Policy& theta0, const PgConfig& config,
                            const RiccatiSolution& reference);

// Mesh-parameterized iteration with exact per-interval gradients:
//   scaled:   K_i <- K_i - tau/Delta_i * grad_{K_i} C * Sigma_{t_i}^{-1},
//             V_i <- V_i - tau/Delta_i * (V_i grad_{V_i} C + grad_{V_i} C V_i),
//   unscaled: same with Delta_i replaced by 1.
RunRecord run_discrete_pg(const LqcModel& model, const Policy& theta0, const PgConfig& config,
                          const RiccatiSolution& reference);

// Smallest n with cost[n] - reference_optimum < epsilon (strict), else
// kNotReached.
int iterations_to_tolerance(const std::vector<double>& costs, double epsilon, double reference_optimum);

struct MeshSweepRow {
    int mesh_intervals = 0;
    int n_scaled = kNotReached;
    int n_unscaled = kNotReached;
    int n_continuous = kNotReached;
    double c_pi_star = 0.0;  // tail-average mesh-restricted optimum
};

struct MeshSweepConfig {
    std::vector<int> mesh_family{8, 16, 32, 64, 128};
    int eval_grid = 128;             // evaluation grid intervals (fixed across meshes)
    double epsilon = 0.01;
    PgConfig scaled;                 // tau interpreted per the scaled update
    PgConfig unscaled;
    int c_pi_tail_window = 50;       // C*_pi = mean of the last `window` of
    int c_pi_iterations = 1000;      // the first `iterations` scaled costs
};

// Runs both variants from theta0 projected onto every mesh; counts are
// measured against the common per-mesh C*_pi estimated from the scaled
// trace.  Meshes run concurrently; row order follows mesh_family.
std::vector<MeshSweepRow> mesh_sweep(const LqcModel& model, const Policy& theta0,
                                     const MeshSweepConfig& cfg);

// CSV: iter, cost, subopt, gradK_l2, gradV_l2, minEigV, maxEigV, minEigSigma,
// p_monotone_flag.
void write_run_csv(const RunRecord& record, const std::string& path);

void write_mesh_sweep_csv(const std::vector<MeshSweepRow>& rows, const std::string& path);

}  // namespace lqcpg
