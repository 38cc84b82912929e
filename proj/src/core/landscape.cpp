#include "landscape.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

#include "errors.hpp"

namespace lqcpg {

namespace {

double spectral_norm_sym(const Matrix& m) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(m), Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

double log_det(const Matrix& v) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(v), Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() <= 0.0) throw numerical_error("landscape: V not positive definite");
    return es.eigenvalues().array().log().sum();
}

// l_t(V, Z) from the cost-difference representation.
double entropy_l(const LqcModel& model, double t, const Matrix& V, const Matrix& Z) {
    return 0.5 * ((model.action_hessian(t, Z) * V).trace() - model.rho * log_det(V));
}

}  // namespace

ResidualReport performance_gap_residual(const LqcModel& model, const Policy& theta,
                                        const Policy& theta_prime, const SolveOptions& opts, double tol) {
    if (!(theta.grid() == theta_prime.grid())) {
        throw std::invalid_argument("performance_gap_residual: policies must share a grid");
    }
    const CostBreakdown c = evaluate_cost(model, theta, opts);
    const CostBreakdown cp = evaluate_cost(model, theta_prime, opts);
    const std::vector<Matrix> P = solve_policy_lyapunov(model, theta, opts);
    const std::vector<Matrix> Sp = solve_state_covariance(model, theta_prime, opts);
    const TimeGrid grid = theta.grid().refined(opts.refine);

    double rhs = 0.0;
    for (int j = 0; j < grid.num_intervals(); ++j) {
        const double tl = grid.node(j);
        const double h = grid.dt(j);
        const Matrix& Pn = P[static_cast<std::size_t>(j) + 1];
        const Matrix& Sn = Sp[static_cast<std::size_t>(j)];
        const Matrix& K = theta.K_at(tl);
        const Matrix& Kp = theta_prime.K_at(tl);
        const Matrix M = model.action_hessian(tl, Pn);
        const Matrix DK = model.action_linear(tl, Pn) + M * K;
        const Matrix dK = Kp - K;
        rhs += h * ((dK.transpose() * (DK * Sn)).trace() +
                    0.5 * (dK.transpose() * (M * dK * Sn)).trace() +
                    entropy_l(model, tl, theta_prime.V_at(tl), Pn) -
                    entropy_l(model, tl, theta.V_at(tl), Pn));
    }

    ResidualReport rep;
    rep.lhs = cp.total - c.total;
    rep.rhs = rhs;
    rep.residual = std::abs(rep.lhs - rep.rhs);
    rep.satisfied = rep.residual <= tol * (1.0 + std::abs(rep.lhs));
    rep.theta_pair = "theta,theta_prime";
    return rep;
}

ResidualReport lojasiewicz_residual(const LqcModel& model, const Policy& theta,
                                    const RiccatiSolution& reference, const SolveOptions& opts,
                                    double tol) {
    const TimeGrid grid = theta.grid().refined(opts.refine);
    if (!(reference.grid == grid)) {
        throw std::invalid_argument("lojasiewicz_residual: reference grid must match the solver grid");
    }
    const CostBreakdown c = evaluate_cost(model, theta, opts);
    const double c_star = optimal_cost(model, reference);
    const std::vector<Matrix> P = solve_policy_lyapunov(model, theta, opts);
    const Policy theta_star = optimal_policy(model, reference);
    const std::vector<Matrix> S_star = solve_state_covariance(model, theta_star, SolveOptions{1});

    double rhs = 0.0;
    for (int j = 0; j < grid.num_intervals(); ++j) {
        const double tl = grid.node(j);
        const double h = grid.dt(j);
        const Matrix& Pn = P[static_cast<std::size_t>(j) + 1];
        const Matrix M = model.action_hessian(tl, Pn);
        if (min_eigenvalue(M) <= 0.0) {
            throw numerical_error("lojasiewicz_residual: action Hessian not PD along theta");
        }
        const Matrix& K = theta.K_at(tl);
        const Matrix& V = theta.V_at(tl);
        const Matrix DK = model.action_linear(tl, Pn) + M * K;
        const Matrix DV =
            symmetrize(0.5 * (M - model.rho * sym_inverse(V)));
        const double v_norms =
            std::max(std::pow(spectral_norm_sym(theta_star.V(j)), 2), std::pow(spectral_norm_sym(V), 2));
        rhs += h * (0.5 * (DK.transpose() * M.ldlt().solve(DK) * S_star[static_cast<std::size_t>(j)]).trace() +
                    v_norms / model.rho * DV.squaredNorm());
    }

    ResidualReport rep;
    rep.lhs = c.total - c_star;
    rep.rhs = rhs;
    rep.residual = rep.rhs - rep.lhs;
    rep.satisfied = rep.residual >= -tol * (1.0 + std::abs(rep.lhs));
    rep.theta_pair = "theta,theta_star";
    return rep;
}

ResidualReport smoothness_residual(const LqcModel& model, const Policy& theta, const Policy& theta_prime,
                                   const SolveOptions& opts, double tol) {
    if (!(theta.grid() == theta_prime.grid())) {
        throw std::invalid_argument("smoothness_residual: policies must share a grid");
    }
    const CostBreakdown c = evaluate_cost(model, theta, opts);
    const CostBreakdown cp = evaluate_cost(model, theta_prime, opts);
    const std::vector<Matrix> P = solve_policy_lyapunov(model, theta, opts);
    const std::vector<Matrix> Sp = solve_state_covariance(model, theta_prime, opts);
    const TimeGrid grid = theta.grid().refined(opts.refine);

    double rhs = 0.0;
    for (int j = 0; j < grid.num_intervals(); ++j) {
        const double tl = grid.node(j);
        const double h = grid.dt(j);
        const Matrix& Pn = P[static_cast<std::size_t>(j) + 1];
        const Matrix& Sn = Sp[static_cast<std::size_t>(j)];
        const Matrix M = model.action_hessian(tl, Pn);
        const Matrix& K = theta.K_at(tl);
        const Matrix& V = theta.V_at(tl);
        const Matrix& Kp = theta_prime.K_at(tl);
        const Matrix& Vp = theta_prime.V_at(tl);
        const Matrix dK = Kp - K;
        const Matrix dV = Vp - V;
        const Matrix DK = model.action_linear(tl, Pn) + M * K;
        const Matrix DV = symmetrize(0.5 * (M - model.rho * sym_inverse(V)));
        const double lmin = std::min(min_eigenvalue(V), min_eigenvalue(Vp));
        if (lmin <= 0.0) throw numerical_error("smoothness_residual: V not positive definite");
        rhs += h * ((dK.transpose() * (DK * Sn)).trace() +
                    0.5 * (dK.transpose() * (M * dK * Sn)).trace() + (DV * dV).trace() +
                    0.25 * model.rho * dV.squaredNorm() / (lmin * lmin));
    }

    ResidualReport rep;
    rep.lhs = cp.total - c.total;
    rep.rhs = rhs;
    rep.residual = rep.rhs - rep.lhs;
    rep.satisfied = rep.residual >= -tol * (1.0 + std::abs(rep.lhs));
    rep.theta_pair = "theta,theta_prime";
    return rep;
}

double noncoercive_example_cost(double epsilon, double scaling, const TimeGrid& grid) {
    if (epsilon <= 0.0) throw std::invalid_argument("noncoercive_example_cost: epsilon must be positive");
    if (std::abs(grid.horizon() - 1.0) > 1e-12) {
        throw std::invalid_argument("noncoercive_example_cost: grid must cover [0, 1]");
    }
    const auto K = [&](double t) { return -1.0 / (1.0 + epsilon - t); };
    // RK4 on the augmented system X' = s K X, c' = (s K X)^2.
    double x = 1.0, cost = 0.0;
    for (int i = 0; i < grid.num_intervals(); ++i) {
        const double t = grid.node(i), h = grid.dt(i);
        auto f = [&](double tt, double xx) { return scaling * K(tt) * xx; };
        auto g = [&](double tt, double xx) { return std::pow(scaling * K(tt) * xx, 2); };
        const double k1 = f(t, x), c1 = g(t, x);
        const double k2 = f(t + 0.5 * h, x + 0.5 * h * k1), c2 = g(t + 0.5 * h, x + 0.5 * h * k1);
        const double k3 = f(t + 0.5 * h, x + 0.5 * h * k2), c3 = g(t + 0.5 * h, x + 0.5 * h * k2);
        const double k4 = f(t + h, x + h * k3), c4 = g(t + h, x + h * k3);
        cost += (h / 6.0) * (c1 + 2.0 * c2 + 2.0 * c3 + c4);
        x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    return cost;
}

double fd_gradient_check(const LqcModel& model, const Policy& theta, const PolicyDirection& direction,
                         double h, const SolveOptions& opts) {
    if (h <= 0.0) throw std::invalid_argument("fd_gradient_check: h must be positive");
    const auto n = static_cast<std::size_t>(theta.num_intervals());
    if (direction.dK.size() != n || direction.dV.size() != n) {
        throw std::invalid_argument("fd_gradient_check: direction shape mismatch");
    }

    auto shifted = [&](double sign) {
        std::vector<Matrix> K, V;
        K.reserve(n);
        V.reserve(n);
        for (std::size_t i = 0; i < n; ++i) {
            K.push_back(theta.K(static_cast<int>(i)) + sign * h * direction.dK[i]);
            const Matrix v = theta.V(static_cast<int>(i)) + sign * h * symmetrize(direction.dV[i]);
            if (min_eigenvalue(symmetrize(v)) <= 0.0) {
                throw numerical_error("fd_gradient_check: perturbed V not PD; shrink h");
            }
            V.push_back(v);
        }
        return Policy(theta.grid(), std::move(K), std::move(V));
    };

    const double c_plus = evaluate_cost(model, shifted(1.0), opts).total;
    const double c_minus = evaluate_cost(model, shifted(-1.0), opts).total;
    const double fd = (c_plus - c_minus) / (2.0 * h);

    const TrajectorySolution traj = solve_trajectories(model, theta, opts);
    const GradientField grad = gradient_field(model, theta, traj);
    double gateaux = 0.0;
    for (int i = 0; i < theta.num_intervals(); ++i) {
        const auto idx = static_cast<std::size_t>(i);
        gateaux += theta.grid().dt(i) * ((grad.vanilla_K[idx].transpose() * direction.dK[idx]).trace() +
                                         (grad.DV[idx] * symmetrize(direction.dV[idx])).trace());
    }

    const double denom = std::max({std::abs(fd), std::abs(gateaux), 1e-12});
    if (std::abs(fd) < 1e-14 && std::abs(gateaux) < 1e-14) return 0.0;
    return std::abs(fd - gateaux) / denom;
}

namespace {

LqcModel random_scalar_model(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    LqcModel m;
    m.state_dim = m.action_dim = m.noise_channels = 1;
    m.horizon = 1.0;
    m.A = CoefficientFn::constant(Matrix::Constant(1, 1, u(rng)));
    m.B = CoefficientFn::constant(Matrix::Constant(1, 1, u(rng)));
    m.C = {CoefficientFn::constant(Matrix::Constant(1, 1, u(rng)))};
    m.D = {CoefficientFn::constant(Matrix::Constant(1, 1, u(rng)))};
    m.Q = CoefficientFn::constant(Matrix::Constant(1, 1, u(rng)));
    m.S = CoefficientFn::constant(Matrix::Constant(1, 1, u(rng)));
    m.R = CoefficientFn::constant(Matrix::Constant(1, 1, 0.4 + 0.6 * std::abs(u(rng))));
    m.G = Matrix::Constant(1, 1, 0.5 * std::abs(u(rng)));
    m.rho = 0.4;
    m.Vbar = CoefficientFn::constant(Matrix::Constant(1, 1, 0.5 + std::abs(u(rng))));
    m.Sigma0 = Matrix::Constant(1, 1, 0.2 + std::abs(u(rng)));
    return m;
}

LqcModel random_matrix_model(std::mt19937_64& rng, int d, int k) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    auto rand_mat = [&](int r, int c) {
        Matrix m(r, c);
        for (int i = 0; i < r; ++i)
            for (int j = 0; j < c; ++j) m(i, j) = u(rng);
        return m;
    };
    auto rand_spd = [&](int nsize, double shift) {
        const Matrix L = rand_mat(nsize, nsize);
        return Matrix(L.transpose() * L + shift * Matrix::Identity(nsize, nsize));
    };
    LqcModel m;
    m.state_dim = d;
    m.action_dim = k;
    m.noise_channels = 1;
    m.horizon = 1.0;
    m.A = CoefficientFn::constant(0.5 * rand_mat(d, d));
    m.B = CoefficientFn::constant(rand_mat(d, k));
    m.C = {CoefficientFn::constant(0.5 * rand_mat(d, d))};
    m.D = {CoefficientFn::constant(0.5 * rand_mat(d, k))};
    m.Q = CoefficientFn::constant(symmetrize(0.5 * rand_mat(d, d)));
    m.S = CoefficientFn::constant(0.5 * rand_mat(k, d));
    m.R = CoefficientFn::constant(symmetrize(0.3 * rand_mat(k, k)));
    m.G = 0.5 * rand_spd(d, 0.1);
    m.rho = 0.4;
    m.Vbar = CoefficientFn::constant(rand_spd(k, 0.5));
    m.Sigma0 = rand_spd(d, 0.2);
    return m;
}

Policy random_policy(std::mt19937_64& rng, const TimeGrid& grid, int d, int k) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<Matrix> K, V;
    for (int i = 0; i < grid.num_intervals(); ++i) {
        Matrix Ki(k, d);
        for (int r = 0; r < k; ++r)
            for (int c = 0; c < d; ++c) Ki(r, c) = u(rng);
        Matrix L(k, k);
        for (int r = 0; r < k; ++r)
            for (int c = 0; c < k; ++c) L(r, c) = u(rng);
        K.push_back(Ki);
        V.push_back(L.transpose() * L + 0.1 * Matrix::Identity(k, k));
    }
    return Policy(grid, std::move(K), std::move(V));
}

}  // namespace

std::vector<SweepCase> landscape_sweep(int num_scalar_cases, int num_matrix_cases, std::uint64_t seed,
                                       int grid_intervals) {
    std::vector<SweepCase> out;
    out.reserve(static_cast<std::size_t>(num_scalar_cases + num_matrix_cases));
    const SolveOptions opts{1, OdeScheme::Euler};
    int case_id = 0;
    for (int pass = 0; pass < 2; ++pass) {
        const int total = pass == 0 ? num_scalar_cases : num_matrix_cases;
        const int d = pass == 0 ? 1 : 2, k = pass == 0 ? 1 : 2;
        for (int c = 0; c < total; ++c, ++case_id) {
            const std::uint64_t case_seed = seed + static_cast<std::uint64_t>(case_id);
            std::mt19937_64 rng(case_seed);
            const TimeGrid grid = TimeGrid::uniform(1.0, grid_intervals);
            // Resample until the model is strongly regular so the
            // Lojasiewicz bound applies.
            LqcModel model;
            RiccatiSolution ric{grid, {}, false, 0.0};
            for (int attempt = 0;; ++attempt) {
                model = pass == 0 ? random_scalar_model(rng) : random_matrix_model(rng, d, k);
                try {
                    ric = solve_riccati(model, grid, opts);
                } catch (const numerical_error&) {
                    continue;
                }
                if (ric.strongly_regular && ric.delta_tilde > 1e-4) break;
                if (attempt > 200) throw numerical_error("landscape_sweep: no strongly regular sample");
            }
            SweepCase sc;
            sc.case_id = case_id;
            sc.seed = case_seed;
            const Policy theta = random_policy(rng, grid, d, k);
            const Policy theta_prime = random_policy(rng, grid, d, k);
            sc.gap = performance_gap_residual(model, theta, theta_prime, opts);
            sc.lojasiewicz = lojasiewicz_residual(model, theta, ric, opts);
            sc.smoothness = smoothness_residual(model, theta, theta_prime, opts);
            out.push_back(std::move(sc));
        }
    }
    return out;
}

void write_sweep_csv(const std::vector<SweepCase>& cases, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw config_error("write_sweep_csv: cannot open " + path);
    os << "case_id,seed,check,lhs,rhs,residual,satisfied\n";
    char buf[256];
    auto row = [&](const SweepCase& sc, const char* name, const ResidualReport& r) {
        std::snprintf(buf, sizeof(buf), "%d,%llu,%s,%.12g,%.12g,%.12g,%d\n", sc.case_id,
                      static_cast<unsigned long long>(sc.seed), name, r.lhs, r.rhs, r.residual,
                      r.satisfied ? 1 : 0);
        os << buf;
    };
    for (const auto& sc : cases) {
        row(sc, "performance_gap", sc.gap);
        row(sc, "lojasiewicz", sc.lojasiewicz);
        row(sc, "smoothness", sc.smoothness);
    }
}

}  // namespace lqcpg
