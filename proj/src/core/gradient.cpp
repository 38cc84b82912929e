#include "gradient.hpp"

#include <stdexcept>

#include "errors.hpp"

namespace lqcpg {

namespace {

int refine_factor(const Policy& theta, const TimeGrid& solver_grid) {
    const int n_policy = theta.grid().num_intervals();
    const int n_solver = solver_grid.num_intervals();
    if (n_solver % n_policy != 0) {
        throw std::invalid_argument("gradient: solver grid does not refine the policy grid");
    }
    return n_solver / n_policy;
}

Matrix inverse_V(const Matrix& V, bool allow_pseudo_inverse) {
    if (!allow_pseudo_inverse && min_eigenvalue(V) <= 1e-12) {
        throw numerical_error("gradient_V: V is singular");
    }
    return sym_inverse(V, 1e-12, allow_pseudo_inverse);
}

}  // namespace

std::vector<Matrix> gradient_K(const LqcModel& model, const Policy& theta, const TimeGrid& solver_grid,
                               const std::vector<Matrix>& P) {
    const int r = refine_factor(theta, solver_grid);
    std::vector<Matrix> out;
    out.reserve(static_cast<std::size_t>(theta.num_intervals()));
    for (int i = 0; i < theta.num_intervals(); ++i) {
        const double tl = theta.grid().node(i);
        const Matrix& Pn = P[static_cast<std::size_t>(i * r) + 1];
        out.push_back(model.action_linear(tl, Pn) + model.action_hessian(tl, Pn) * theta.K(i));
    }
    return out;
}

std::vector<Matrix> gradient_V(const LqcModel& model, const Policy& theta, const TimeGrid& solver_grid,
                               const std::vector<Matrix>& P, bool allow_pseudo_inverse) {
    const int r = refine_factor(theta, solver_grid);
    std::vector<Matrix> out;
    out.reserve(static_cast<std::size_t>(theta.num_intervals()));
    for (int i = 0; i < theta.num_intervals(); ++i) {
        const double tl = theta.grid().node(i);
        const Matrix& Pn = P[static_cast<std::size_t>(i * r) + 1];
        const Matrix M = model.action_hessian(tl, Pn);
        out.push_back(symmetrize(0.5 * (M - model.rho * inverse_V(theta.V(i), allow_pseudo_inverse))));
    }
    return out;
}

std::vector<Matrix> bw_gradient_V(const std::vector<Matrix>& DV, const Policy& theta) {
    if (DV.size() != static_cast<std::size_t>(theta.num_intervals())) {
        throw std::invalid_argument("bw_gradient_V: shape mismatch");
    }
    std::vector<Matrix> out;
    out.reserve(DV.size());
    for (int i = 0; i < theta.num_intervals(); ++i) {
        const Matrix& V = theta.V(i);
        out.push_back(DV[static_cast<std::size_t>(i)] * V + V * DV[static_cast<std::size_t>(i)]);
    }
    return out;
}

GradientField gradient_field(const LqcModel& model, const Policy& theta, const TrajectorySolution& traj,
                             bool allow_pseudo_inverse) {
    const int r = refine_factor(theta, traj.grid);
    GradientField out{theta.grid(), {}, {}, {}, {}, 0.0, 0.0};
    out.DK = gradient_K(model, theta, traj.grid, traj.P);
    out.DV = gradient_V(model, theta, traj.grid, traj.P, allow_pseudo_inverse);
    out.DV_bw = bw_gradient_V(out.DV, theta);
    out.vanilla_K.reserve(out.DK.size());
    for (int i = 0; i < theta.num_intervals(); ++i) {
        out.vanilla_K.push_back(out.DK[static_cast<std::size_t>(i)] *
                                traj.Sigma[static_cast<std::size_t>(i * r)]);
    }
    std::vector<double> dt(static_cast<std::size_t>(theta.num_intervals()));
    for (int i = 0; i < theta.num_intervals(); ++i) dt[static_cast<std::size_t>(i)] = theta.grid().dt(i);
    out.l2_DK = piecewise_l2_norm(out.DK, dt);
    out.l2_DV = piecewise_l2_norm(out.DV, dt);
    return out;
}

Policy npg_step(const Policy& theta, const GradientField& grad, double tau, bool* left_theta) {
    if (tau < 0.0) throw std::invalid_argument("npg_step: tau must be nonnegative");
    std::vector<Matrix> K, V;
    K.reserve(static_cast<std::size_t>(theta.num_intervals()));
    V.reserve(static_cast<std::size_t>(theta.num_intervals()));
    for (int i = 0; i < theta.num_intervals(); ++i) {
        K.push_back(theta.K(i) - tau * grad.DK[static_cast<std::size_t>(i)]);
        V.push_back(theta.V(i) - tau * grad.DV_bw[static_cast<std::size_t>(i)]);
    }
    Policy next(theta.grid(), std::move(K), std::move(V));
    if (left_theta != nullptr) *left_theta = !next.in_theta();
    return next;
}

IntervalGradients interval_gradients(const LqcModel& model, const Policy& theta,
                                     const TrajectorySolution& traj, bool allow_pseudo_inverse) {
    const int r = refine_factor(theta, traj.grid);
    IntervalGradients out;
    out.grad_K.reserve(static_cast<std::size_t>(theta.num_intervals()));
    out.grad_V.reserve(static_cast<std::size_t>(theta.num_intervals()));
    out.sigma_left.reserve(static_cast<std::size_t>(theta.num_intervals()));
    for (int i = 0; i < theta.num_intervals(); ++i) {
        const Matrix& K = theta.K(i);
        const Matrix Vinv = inverse_V(theta.V(i), allow_pseudo_inverse);
        Matrix accK = Matrix::Zero(K.rows(), K.cols());
        Matrix accV = Matrix::Zero(K.rows(), K.rows());
        for (int s = 0; s < r; ++s) {
            const int j = i * r + s;
            const double tl = traj.grid.node(j);
            const double h = traj.grid.dt(j);
            const Matrix& Pn = traj.P[static_cast<std::size_t>(j) + 1];
            const Matrix M = model.action_hessian(tl, Pn);
            const Matrix DK = model.action_linear(tl, Pn) + M * K;
            accK += h * DK * traj.Sigma[static_cast<std::size_t>(j)];
            accV += h * symmetrize(0.5 * (M - model.rho * Vinv));
        }
        out.grad_K.push_back(std::move(accK));
        out.grad_V.push_back(std::move(accV));
        out.sigma_left.push_back(traj.Sigma[static_cast<std::size_t>(i * r)]);
    }
    return out;
}

}  // namespace lqcpg
