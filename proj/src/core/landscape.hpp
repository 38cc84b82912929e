#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gradient.hpp"

namespace lqcpg {

// Outcome of one identity/inequality evaluation.  For identities the
// residual is |lhs - rhs|; for inequalities it is rhs - lhs and `satisfied`
// means residual >= -tol.  Tolerances are relative with an absolute floor.
struct ResidualReport {
    double lhs = 0.0;
    double rhs = 0.0;
    double residual = 0.0;
    bool satisfied = false;
    std::string theta_pair;
};

// Exact cost-difference representation (performance gap):
//   C(theta') - C(theta) = int [ <K'-K, D_K(theta) Sigma'>
//     + 1/2 <K'-K, M(theta) (K'-K) Sigma'> + l(V') - l(V) ] dt,
// with l_t(V, P) = 1/2 ( <D^T P D + R + rho Vbar^{-1}, V> - rho ln det V ).
ResidualReport performance_gap_residual(const LqcModel& model, const Policy& theta,
                                        const Policy& theta_prime, const SolveOptions& opts = {1},
                                        double tol = 1e-5);

// Nonuniform Lojasiewicz bound:
//   C(theta) - C* <= int [ 1/2 <M^{-1} D_K, D_K Sigma*>
//     + (1/rho) max(||V*||_2^2, ||V||_2^2) |D_V|^2 ] dt.
ResidualReport lojasiewicz_residual(const LqcModel& model, const Policy& theta,
                                    const RiccatiSolution& reference, const SolveOptions& opts = {1},
                                    double tol = 1e-6);

// Almost-smoothness upper bound with the rho/4 |V'-V|^2 / min lambda_min^2
// covariance term.
ResidualReport smoothness_residual(const LqcModel& model, const Policy& theta, const Policy& theta_prime,
                                   const SolveOptions& opts = {1}, double tol = 1e-6);

// Cost of the 1-D deterministic example K^eps_t = -(1+eps-t)^{-1} scaled by
// s, evaluated by RK4 on the given grid of [0,1]:
//   X' = s K X, X_0 = 1, C = int (s K X)^2 dt.
double noncoercive_example_cost(double epsilon, double scaling, const TimeGrid& grid);

struct PolicyDirection {
    std::vector<Matrix> dK;
    std::vector<Matrix> dV;  // symmetric
};

// Central finite difference of the cost along (dK, dV) against the Gateaux
// formula; returns the relative error.  Throws if a perturbed V loses
// positive definiteness ("shrink h").
double fd_gradient_check(const LqcModel& model, const Policy& theta, const PolicyDirection& direction,
                         double h, const SolveOptions& opts = {1});

// Randomized verification sweeps.  Cases draw K entries uniform in [-1, 1]
// and V = L^T L + 0.1 I; models are resampled until strongly regular.
struct SweepCase {
    int case_id = 0;
    std::uint64_t seed = 0;
    ResidualReport gap;
    ResidualReport lojasiewicz;
    ResidualReport smoothness;
};

std::vector<SweepCase> landscape_sweep(int num_scalar_cases, int num_matrix_cases, std::uint64_t seed,
                                       int grid_intervals = 256);

// CSV: case_id, seed, lhs, rhs, residual, satisfied (one row per check).
void write_sweep_csv(const std::vector<SweepCase>& cases, const std::string& path);

}  // namespace lqcpg
