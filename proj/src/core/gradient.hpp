#pragma once

#include <vector>

#include "ode.hpp"

namespace lqcpg {

// Closed-form gradient fields of the cost at theta, one value per policy
// interval.  Conventions match the Euler solves: coefficients at the
// interval's left endpoint, P at the first solver node to its right, so an
// interval's D_K vanishes exactly at the extracted optimal policy.
struct GradientField {
    TimeGrid grid;                  // policy grid
    std::vector<Matrix> DK;         // k x d
    std::vector<Matrix> DV;         // k x k symmetric
    std::vector<Matrix> DV_bw;      // D_V V + V D_V
    std::vector<Matrix> vanilla_K;  // D_K Sigma at the interval's left node
    double l2_DK = 0.0;
    double l2_DV = 0.0;
};

std::vector<Matrix> gradient_K(const LqcModel& model, const Policy& theta, const TimeGrid& solver_grid,
                               const std::vector<Matrix>& P);

// With allow_pseudo_inverse, a singular V falls back to the Moore-Penrose
// inverse instead of erroring (diagnostic mode only).
std::vector<Matrix> gradient_V(const LqcModel& model, const Policy& theta, const TimeGrid& solver_grid,
                               const std::vector<Matrix>& P, bool allow_pseudo_inverse = false);

// Bures-Wasserstein direction D_V V + V D_V per interval.
std::vector<Matrix> bw_gradient_V(const std::vector<Matrix>& DV, const Policy& theta);

GradientField gradient_field(const LqcModel& model, const Policy& theta, const TrajectorySolution& traj,
                             bool allow_pseudo_inverse = false);

// One step of the geometry-aware iteration:
//   K <- K - tau D_K,   V <- V - tau (D_V V + V D_V).
// Never fails; if any updated V loses positive definiteness the returned
// policy has in_theta() == false and *left_theta is set.
Policy npg_step(const Policy& theta, const GradientField& grad, double tau, bool* left_theta = nullptr);

// Exact gradients of the discretized cost with respect to the per-interval
// parameters:
//   grad_K[i] = int_{t_i}^{t_{i+1}} D_K Sigma dt,  grad_V[i] = int D_V dt,
// accumulated with the left-rectangle rule over solver sub-steps (the
// discrete adjoint of the Euler solves, exact to round-off).
struct IntervalGradients {
    std::vector<Matrix> grad_K;
    std::vector<Matrix> grad_V;
    std::vector<Matrix> sigma_left;  // Sigma at each interval's left node
};

IntervalGradients interval_gradients(const LqcModel& model, const Policy& theta,
                                     const TrajectorySolution& traj, bool allow_pseudo_inverse = false);

}  // namespace lqcpg
