#pragma once

#include <string>
#include <vector>

#include "model.hpp"
#include "policy.hpp"

namespace lqcpg {

enum class OdeScheme { Euler, Rk4 };

// All solvers march on the request grid refined by `refine`.  Explicit Euler
// samples time-dependent coefficients at the left endpoint of each step and
// the marching variable at the known node; backward recursions therefore use
// the right-node value of P inside the right-hand side, which makes the
// Euler solves the exact dynamic program of the discretized system.  Rk4 is
// the high-order mode for oracle-grade cross checks.
struct SolveOptions {
    int refine = 8;
    OdeScheme scheme = OdeScheme::Euler;
};

struct RiccatiSolution {
    TimeGrid grid;                 // solver grid
    std::vector<Matrix> P_star;    // per node, symmetric, P_star.back() == G
    bool strongly_regular = false;
    double delta_tilde = 0.0;      // min over nodes of min-eig of D^T P* D + R + rho Vbar^{-1}
};

struct TrajectorySolution {
    TimeGrid grid;
    std::vector<Matrix> P;       // policy value matrix, backward from G
    std::vector<Matrix> Sigma;   // state second moment, forward from Sigma0
    std::vector<double> phi;     // scalar value offset, backward from 0
};

struct CostBreakdown {
    double total = 0.0;               // route 1: 1/2 tr(P_0 Sigma0) + phi_0
    double quadratic_terminal = 0.0;  // route 2 components below
    double running_quadratic = 0.0;
    double entropy_term = 0.0;
    double representation_gap = 0.0;  // |route 1 - route 2|
};

RiccatiSolution solve_riccati(const LqcModel& model, const TimeGrid& grid, const SolveOptions& opts = {});

// Optimal policy extracted per solver interval:
//   K*_i = -M^{-1} (B^T P* + D^T P* C + S),  V*_i = rho M^{-1},
// with coefficients at the interval's left endpoint and P* at its right
// node (the minimizer of the discrete backward step).
Policy optimal_policy(const LqcModel& model, const RiccatiSolution& riccati);

// Riccati-route optimal cost 1/2 tr(P*_0 Sigma0) + phi*_0 on the solution's
// own grid.
double optimal_cost(const LqcModel& model, const RiccatiSolution& riccati);

std::vector<Matrix> solve_policy_lyapunov(const LqcModel& model, const Policy& theta,
                                          const SolveOptions& opts = {});
std::vector<Matrix> solve_state_covariance(const LqcModel& model, const Policy& theta,
                                           const SolveOptions& opts = {});
// Euler mode integrates the phi source with the same left-coefficient /
// right-node-P rectangle rule as the backward P step; Rk4 mode upgrades to
// trapezoid on node values.
std::vector<double> solve_phi(const LqcModel& model, const Policy& theta, const TimeGrid& solver_grid,
                              const std::vector<Matrix>& P, OdeScheme scheme = OdeScheme::Euler);

TrajectorySolution solve_trajectories(const LqcModel& model, const Policy& theta,
                                      const SolveOptions& opts = {});

CostBreakdown evaluate_cost(const LqcModel& model, const Policy& theta, const SolveOptions& opts = {});

// CSV dump: t, vec(P) row-major, vec(Sigma), phi; one row per node.
void write_trajectory_csv(const TrajectorySolution& traj, const std::string& path);

}  // namespace lqcpg
