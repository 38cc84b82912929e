#include "ode.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "errors.hpp"

namespace lqcpg {

namespace {

constexpr double kEigFloor = 1e-10;

double log_det_pd(const Matrix& m, const char* what) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(m));
    if (es.eigenvalues().minCoeff() <= 0.0) {
        throw numerical_error(std::string(what) + ": matrix not positive definite");
    }
    return es.eigenvalues().array().log().sum();
}

void check_finite(const Matrix& m, const char* what, double t) {
    if (!m.allFinite()) {
        std::ostringstream os;
        os << what << ": solve diverged (non-finite values) at t=" << t;
        throw numerical_error(os.str());
    }
}

// Riccati right-hand side dP/dt at (t, P).
Matrix riccati_rhs(const LqcModel& model, double t, const Matrix& P) {
    const Matrix A = model.A(t);
    Matrix drift = A.transpose() * P + P * A + model.Q(t);
    for (int j = 0; j < model.noise_channels; ++j) {
        const Matrix Cj = model.C[static_cast<std::size_t>(j)](t);
        drift += Cj.transpose() * P * Cj;
    }
    const Matrix M = model.action_hessian(t, P);
    if (min_eigenvalue(M) <= kEigFloor) {
        std::ostringstream os;
        os << "solve_riccati: strong regularity lost at t=" << t;
        throw numerical_error(os.str());
    }
    const Matrix L = model.action_linear(t, P);
    drift -= L.transpose() * M.ldlt().solve(L);
    return -drift;  // dP/dt = -(A^T P + P A + C^T P C + Q - L^T M^{-1} L)
}

// Policy value equation right-hand side dP/dt at (t, P) for fixed (K, V).
Matrix lyapunov_rhs(const LqcModel& model, double t, const Matrix& P, const Matrix& K) {
    const Matrix ABK = model.A(t) + model.B(t) * K;
    Matrix drift = ABK.transpose() * P + P * ABK + model.Q(t);
    for (int j = 0; j < model.noise_channels; ++j) {
        const Matrix CDK =
            model.C[static_cast<std::size_t>(j)](t) + model.D[static_cast<std::size_t>(j)](t) * K;
        drift += CDK.transpose() * P * CDK;
    }
    const Matrix S = model.S(t);
    drift += K.transpose() * ((model.R(t) + model.rho * model.vbar_inverse(t)) * K) + S.transpose() * K +
             K.transpose() * S;
    return -drift;
}

Matrix covariance_rhs(const LqcModel& model, double t, const Matrix& Sigma, const Matrix& K,
                      const Matrix& V) {
    const Matrix ABK = model.A(t) + model.B(t) * K;
    Matrix rhs = ABK * Sigma + Sigma * ABK.transpose();
    for (int j = 0; j < model.noise_channels; ++j) {
        const Matrix Dj = model.D[static_cast<std::size_t>(j)](t);
        const Matrix CDK = model.C[static_cast<std::size_t>(j)](t) + Dj * K;
        rhs += CDK * Sigma * CDK.transpose() + Dj * V * Dj.transpose();
    }
    return rhs;
}

// Backward marching loop shared by the Riccati and policy value solves.
template <typename Rhs>
std::vector<Matrix> march_backward(const TimeGrid& grid, const Matrix& terminal, OdeScheme scheme,
                                   const char* what, Rhs&& rhs) {
    const int n = grid.num_intervals();
    std::vector<Matrix> P(static_cast<std::size_t>(n) + 1);
    P[static_cast<std::size_t>(n)] = symmetrize(terminal);
    for (int i = n; i > 0; --i) {
        const double tl = grid.node(i - 1);
        const double h = grid.dt(i - 1);
        const Matrix& Pr = P[static_cast<std::size_t>(i)];
        Matrix next;
        if (scheme == OdeScheme::Euler) {
            next = Pr - h * rhs(i - 1, tl, Pr);
        } else {
            const double tr = grid.node(i);
            const Matrix k1 = rhs(i - 1, tr, Pr);
            const Matrix k2 = rhs(i - 1, tr - 0.5 * h, symmetrize(Pr - 0.5 * h * k1));
            const Matrix k3 = rhs(i - 1, tr - 0.5 * h, symmetrize(Pr - 0.5 * h * k2));
            const Matrix k4 = rhs(i - 1, tl, symmetrize(Pr - h * k3));
            next = Pr - (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
        next = symmetrize(next);
        check_finite(next, what, tl);
        P[static_cast<std::size_t>(i) - 1] = std::move(next);
    }
    return P;
}

}  // namespace

RiccatiSolution solve_riccati(const LqcModel& model, const TimeGrid& grid, const SolveOptions& opts) {
    RiccatiSolution out{grid.refined(opts.refine), {}, false, 0.0};
    out.P_star = march_backward(out.grid, model.G, opts.scheme, "solve_riccati",
                                [&](int, double t, const Matrix& P) { return riccati_rhs(model, t, P); });
    out.delta_tilde = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= out.grid.num_intervals(); ++i) {
        const Matrix M = model.action_hessian(out.grid.node(i), out.P_star[static_cast<std::size_t>(i)]);
        out.delta_tilde = std::min(out.delta_tilde, min_eigenvalue(M));
    }
    out.strongly_regular = out.delta_tilde > 0.0;
    return out;
}

Policy optimal_policy(const LqcModel& model, const RiccatiSolution& riccati) {
    if (!riccati.strongly_regular) {
        throw numerical_error("optimal_policy: Riccati solution is not strongly regular");
    }
    const TimeGrid& g = riccati.grid;
    std::vector<Matrix> K, V;
    K.reserve(static_cast<std::size_t>(g.num_intervals()));
    V.reserve(static_cast<std::size_t>(g.num_intervals()));
    for (int i = 0; i < g.num_intervals(); ++i) {
        const double tl = g.node(i);
        const Matrix& P = riccati.P_star[static_cast<std::size_t>(i) + 1];
        const Matrix M = model.action_hessian(tl, P);
        if (min_eigenvalue(M) <= kEigFloor) {
            std::ostringstream os;
            os << "optimal_policy: strong regularity lost at t=" << tl;
            throw numerical_error(os.str());
        }
        const Matrix Minv = sym_inverse(M, kEigFloor);
        K.push_back(-Minv * model.action_linear(tl, P));
        V.push_back(model.rho * Minv);
    }
    return Policy(g, std::move(K), std::move(V));
}

double optimal_cost(const LqcModel& model, const RiccatiSolution& riccati) {
    const Policy theta_star = optimal_policy(model, riccati);
    const std::vector<double> phi = solve_phi(model, theta_star, riccati.grid, riccati.P_star);
    return 0.5 * (riccati.P_star.front() * model.Sigma0).trace() + phi.front();
}

std::vector<Matrix> solve_policy_lyapunov(const LqcModel& model, const Policy& theta,
                                          const SolveOptions& opts) {
    const TimeGrid grid = theta.grid().refined(opts.refine);
    return march_backward(grid, model.G, opts.scheme, "solve_policy_lyapunov",
                          [&](int step, double t, const Matrix& P) {
                              const Matrix& K = theta.K(step / opts.refine);
                              return lyapunov_rhs(model, t, P, K);
                          });
}

std::vector<Matrix> solve_state_covariance(const LqcModel& model, const Policy& theta,
                                           const SolveOptions& opts) {
    const TimeGrid grid = theta.grid().refined(opts.refine);
    const int n = grid.num_intervals();
    std::vector<Matrix> Sigma(static_cast<std::size_t>(n) + 1);
    Sigma[0] = symmetrize(model.Sigma0);
    for (int i = 0; i < n; ++i) {
        const double tl = grid.node(i);
        const double h = grid.dt(i);
        const Matrix& K = theta.K(i / opts.refine);
        const Matrix& V = theta.V(i / opts.refine);
        const Matrix& S = Sigma[static_cast<std::size_t>(i)];
        Matrix next;
        if (opts.scheme == OdeScheme::Euler) {
            next = S + h * covariance_rhs(model, tl, S, K, V);
        } else {
            const Matrix k1 = covariance_rhs(model, tl, S, K, V);
            const Matrix k2 = covariance_rhs(model, tl + 0.5 * h, symmetrize(S + 0.5 * h * k1), K, V);
            const Matrix k3 = covariance_rhs(model, tl + 0.5 * h, symmetrize(S + 0.5 * h * k2), K, V);
            const Matrix k4 = covariance_rhs(model, tl + h, symmetrize(S + h * k3), K, V);
            next = S + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
        next = symmetrize(next);
        check_finite(next, "solve_state_covariance", tl);
        const double scale = std::max(1.0, next.cwiseAbs().maxCoeff());
        if (min_eigenvalue(next) < -kEigFloor * scale) {
            std::ostringstream os;
            os << "solve_state_covariance: covariance lost PSD at t=" << grid.node(i + 1)
               << " (grid too coarse)";
            throw numerical_error(os.str());
        }
        Sigma[static_cast<std::size_t>(i) + 1] = std::move(next);
    }
    return Sigma;
}

std::vector<double> solve_phi(const LqcModel& model, const Policy& theta, const TimeGrid& solver_grid,
                              const std::vector<Matrix>& P, OdeScheme scheme) {
    const int n = solver_grid.num_intervals();
    if (static_cast<int>(P.size()) != n + 1) {
        throw std::invalid_argument("solve_phi: P trajectory does not match solver grid");
    }
    const double k = static_cast<double>(model.action_dim);
    auto source = [&](double t, const Matrix& Pn, const Matrix& V) {
        const Matrix M = model.action_hessian(t, Pn);
        return 0.5 * (M * V).trace() +
               0.5 * model.rho *
                   (-k + log_det_pd(model.Vbar(t), "solve_phi (Vbar)") - log_det_pd(V, "solve_phi (V)"));
    };
    std::vector<double> phi(static_cast<std::size_t>(n) + 1, 0.0);
    for (int i = n; i > 0; --i) {
        const double tl = solver_grid.node(i - 1);
        const double h = solver_grid.dt(i - 1);
        const Matrix& V = theta.V_at(tl);
        double integral;
        if (scheme == OdeScheme::Euler) {
            integral = h * source(tl, P[static_cast<std::size_t>(i)], V);
        } else {
            integral = 0.5 * h *
                       (source(tl, P[static_cast<std::size_t>(i) - 1], V) +
                        source(solver_grid.node(i), P[static_cast<std::size_t>(i)], V));
        }
        phi[static_cast<std::size_t>(i) - 1] = phi[static_cast<std::size_t>(i)] + integral;
    }
    return phi;
}

TrajectorySolution solve_trajectories(const LqcModel& model, const Policy& theta,
                                      const SolveOptions& opts) {
    TrajectorySolution out{theta.grid().refined(opts.refine), {}, {}, {}};
    out.P = solve_policy_lyapunov(model, theta, opts);
    out.Sigma = solve_state_covariance(model, theta, opts);
    out.phi = solve_phi(model, theta, out.grid, out.P, opts.scheme);
    return out;
}

CostBreakdown evaluate_cost(const LqcModel& model, const Policy& theta, const SolveOptions& opts) {
    const TrajectorySolution traj = solve_trajectories(model, theta, opts);
    CostBreakdown out;
    out.total = 0.5 * (traj.P.front() * model.Sigma0).trace() + traj.phi.front();

    // Route 2: trapezoid on node samples of the running integrand, with the
    // policy looked up per step.
    const TimeGrid& g = traj.grid;
    auto integrand = [&](double t_coeff, const Matrix& Sigma, const Matrix& K, const Matrix& V) {
        const Matrix Q = model.Q(t_coeff), S = model.S(t_coeff), R = model.R(t_coeff);
        const Matrix quad = Q + S.transpose() * K + K.transpose() * S + K.transpose() * (R * K);
        const double running = 0.5 * (quad * Sigma).trace() + 0.5 * (R * V).trace();
        const double entropy =
            model.rho * relative_entropy_gaussian(K, V, model.Vbar(t_coeff), Sigma);
        return std::pair<double, double>(running, entropy);
    };
    double running = 0.0, entropy = 0.0;
    for (int i = 0; i < g.num_intervals(); ++i) {
        const double tl = g.node(i), tr = g.node(i + 1), h = g.dt(i);
        const Matrix& K = theta.K_at(tl);
        const Matrix& V = theta.V_at(tl);
        const auto [run_l, ent_l] = integrand(tl, traj.Sigma[static_cast<std::size_t>(i)], K, V);
        const auto [run_r, ent_r] = integrand(tr, traj.Sigma[static_cast<std::size_t>(i) + 1], K, V);
        running += 0.5 * h * (run_l + run_r);
        entropy += 0.5 * h * (ent_l + ent_r);
    }
    out.running_quadratic = running;
    out.entropy_term = entropy;
    out.quadratic_terminal = 0.5 * (symmetrize(model.G) * traj.Sigma.back()).trace();
    const double route2 = out.quadratic_terminal + out.running_quadratic + out.entropy_term;
    out.representation_gap = std::abs(out.total - route2);
    return out;
}

void write_trajectory_csv(const TrajectorySolution& traj, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw config_error("write_trajectory_csv: cannot open " + path);
    const auto d = traj.P.front().rows();
    os << "t";
    for (Eigen::Index r = 0; r < d; ++r)
        for (Eigen::Index c = 0; c < d; ++c) os << ",P_" << r << c;
    for (Eigen::Index r = 0; r < d; ++r)
        for (Eigen::Index c = 0; c < d; ++c) os << ",Sigma_" << r << c;
    os << ",phi\n";
    char buf[32];
    auto put = [&](double v) {
        std::snprintf(buf, sizeof(buf), "%.12g", v);
        os << ',' << buf;
    };
    for (int i = 0; i <= traj.grid.num_intervals(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.12g", traj.grid.node(i));
        os << buf;
        const Matrix& P = traj.P[static_cast<std::size_t>(i)];
        const Matrix& S = traj.Sigma[static_cast<std::size_t>(i)];
        for (Eigen::Index r = 0; r < d; ++r)
            for (Eigen::Index c = 0; c < d; ++c) put(P(r, c));
        for (Eigen::Index r = 0; r < d; ++r)
            for (Eigen::Index c = 0; c < d; ++c) put(S(r, c));
        put(traj.phi[static_cast<std::size_t>(i)]);
        os << '\n';
    }
}

}  // namespace lqcpg
