#pragma once

#include <optional>
#include <string>
#include <vector>

#include "coefficients.hpp"
#include "matrix_ops.hpp"
#include "time_grid.hpp"

namespace lqcpg {

// Entropy-regularized stochastic LQ model with p independent scalar noise
// channels.  Dynamics
//   dX = (A X + B a) dt + sum_j (C_j X + D_j a) dW_j
// under actions a sampled from a Gaussian feedback policy, running cost
// 1/2 <(Q S^T; S R)(x;a),(x;a)> + rho * KL(policy || N(0, Vbar)), terminal
// cost 1/2 x^T G x.  Q, R, G may be indefinite.  Only the second moment
// Sigma0 = E[xi0 xi0^T] enters the deterministic solvers; the full initial
// law (xi0_mean, xi0_cov) is used by the Monte Carlo layer.
struct LqcModel {
    int state_dim = 0;      // d
    int action_dim = 0;     // k
    int noise_channels = 0; // p
    double horizon = 0.0;   // T

    CoefficientFn A;                 // d x d
    CoefficientFn B;                 // d x k
    std::vector<CoefficientFn> C;    // p entries, d x d
    std::vector<CoefficientFn> D;    // p entries, d x k
    CoefficientFn Q;                 // d x d symmetric
    CoefficientFn S;                 // k x d
    CoefficientFn R;                 // k x k symmetric
    Matrix G;                        // d x d symmetric
    double rho = 0.0;
    CoefficientFn Vbar;              // k x k symmetric PD
    Matrix Sigma0;                   // d x d symmetric PSD

    std::optional<Vector> xi0_mean;  // d
    std::optional<Matrix> xi0_cov;   // d x d PSD

    // sum_j D_j(t)^T P D_j(t) + R(t) + rho * Vbar(t)^{-1}; the Hessian of the
    // action Hamiltonian and the recurring regularity block.
    Matrix action_hessian(double t, const Matrix& P) const;

    // B(t)^T P + sum_j D_j(t)^T P C_j(t) + S(t).
    Matrix action_linear(double t, const Matrix& P) const;

    Matrix vbar_inverse(double t) const;
};

struct ValidationReport {
    bool ok = false;
    std::vector<std::string> violations;  // (H.1)-style assumption failures
    std::vector<std::string> warnings;    // symmetrized inputs etc.
};

// Dimension mismatches are hard errors (std::invalid_argument); assumption
// violations (rho <= 0, Vbar not uniformly PD, asymmetric Q/R/G/Sigma0,
// Sigma0 not PSD) are listed in the report.  Pure: same inputs, same report.
ValidationReport validate_model(const LqcModel& model, const TimeGrid& grid);

// Expected relative entropy E[KL(N(Kx, V) || N(0, Vbar))] under E[xx^T] = M:
//   1/2 ( tr(K^T Vbar^{-1} K M) + tr(Vbar^{-1} V) - k + ln det(Vbar)/det(V) ).
double relative_entropy_gaussian(const Matrix& K, const Matrix& V, const Matrix& Vbar,
                                 const Matrix& second_moment);

}  // namespace lqcpg
