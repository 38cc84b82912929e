#include "pg.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <future>
#include <limits>

#include "errors.hpp"

namespace lqcpg {

namespace {

constexpr double kLoewnerTol = 1e-8;

double max_action_hessian_eig(const LqcModel& model, const TimeGrid& grid,
                              const std::vector<Matrix>& P) {
    double m = -std::numeric_limits<double>::infinity();
    for (int i = 0; i <= grid.num_intervals(); ++i) {
        m = std::max(m, max_eigenvalue(model.action_hessian(grid.node(i), P[static_cast<std::size_t>(i)])));
    }
    return m;
}

bool loewner_geq_trajectory(const std::vector<Matrix>& lhs, const std::vector<Matrix>& rhs) {
    for (std::size_t i = 0; i < lhs.size(); ++i) {
        if (min_eigenvalue(symmetrize(lhs[i] - rhs[i])) < -kLoewnerTol) return false;
    }
    return true;
}

// ||B^T P + D^T P C + S||_{L2} sampled per policy interval (left-endpoint
// coefficients, right-node P), for the a-priori K bound.
double action_linear_l2(const LqcModel& model, const TimeGrid& policy_grid, int refine,
                        const std::vector<Matrix>& P) {
    double acc = 0.0;
    for (int i = 0; i < policy_grid.num_intervals(); ++i) {
        const Matrix L = model.action_linear(policy_grid.node(i), P[static_cast<std::size_t>(i * refine) + 1]);
        acc += policy_grid.dt(i) * L.squaredNorm();
    }
    return std::sqrt(acc);
}

struct LoopShared {
    double lambda0_bar = 0.0;
    double v_lo = 0.0, v_hi = 0.0;
    double k0_l2 = 0.0;
    double sup_action_linear_l2 = 0.0;
};

// Everything shared by the continuous and discrete loops: per-iteration
// evaluation, diagnostics, stopping.  The variants differ only in the
// update applied to theta.
template <typename Update>
RunRecord pg_loop(const LqcModel& model, const Policy& theta0, const PgConfig& config,
                  const RiccatiSolution& reference, Update&& update) {
    if (config.tau <= 0.0) throw std::invalid_argument("pg: tau must be positive");
    if (config.max_iterations < 1) throw std::invalid_argument("pg: max_iterations must be positive");
    if (config.stop_epsilon <= 0.0) throw std::invalid_argument("pg: stop_epsilon must be positive");
    if (!reference.strongly_regular) throw std::invalid_argument("pg: reference must be strongly regular");

    const SolveOptions opts{config.refine, OdeScheme::Euler};
    RunRecord record;
    record.reference_optimum = optimal_cost(model, reference);

    Policy theta = theta0;
    LoopShared shared;
    shared.k0_l2 = theta0.l2_norm_K();
    std::vector<Matrix> prev_P;
    double prev_cost = std::numeric_limits<double>::infinity();

    const bool compare_star = reference.grid == theta0.grid().refined(config.refine);

    for (int n = 0; n < config.max_iterations; ++n) {
        TrajectorySolution traj = solve_trajectories(model, theta, opts);
        const double cost = 0.5 * (traj.P.front() * model.Sigma0).trace() + traj.phi.front();
        if (!std::isfinite(cost)) {
            record.aborted = true;
            record.abort_reason = "non-finite cost at iteration " + std::to_string(n);
            break;
        }
        if (n == 0) {
            shared.lambda0_bar = max_action_hessian_eig(model, traj.grid, traj.P);
            shared.v_lo = std::min(theta0.min_eig_V(), model.rho / shared.lambda0_bar);
            shared.v_hi = std::max(theta0.max_eig_V(), model.rho / reference.delta_tilde);
        }

        GradientField grad = gradient_field(model, theta, traj, config.allow_pseudo_inverse);

        IterationStat stat;
        stat.cost = cost;
        stat.suboptimality = cost - record.reference_optimum;
        stat.grad_K_l2 = grad.l2_DK;
        stat.grad_V_l2 = grad.l2_DV;
        if (config.diagnostics_on) {
            DiagnosticsRecord& d = stat.diagnostics;
            d.iteration = n;
            d.cost = cost;
            d.l2_K = theta.l2_norm_K();
            d.min_eig_V = theta.min_eig_V();
            d.max_eig_V = theta.max_eig_V();
            d.min_eig_Sigma = std::numeric_limits<double>::infinity();
            d.max_eig_Sigma = -std::numeric_limits<double>::infinity();
            for (const auto& s : traj.Sigma) {
                d.min_eig_Sigma = std::min(d.min_eig_Sigma, min_eigenvalue(s));
                d.max_eig_Sigma = std::max(d.max_eig_Sigma, max_eigenvalue(s));
            }
            d.lambda0_bar = shared.lambda0_bar;
            d.delta_tilde = reference.delta_tilde;
            d.cost_monotone = cost <= prev_cost + 1e-10 * (1.0 + std::abs(cost));
            d.p_monotone_prev = prev_P.empty() || loewner_geq_trajectory(prev_P, traj.P);
            d.p_dominates_star = !compare_star || loewner_geq_trajectory(traj.P, reference.P_star);
            d.v_envelope_ok =
                d.min_eig_V >= shared.v_lo - kLoewnerTol && d.max_eig_V <= shared.v_hi + kLoewnerTol;
            shared.sup_action_linear_l2 = std::max(
                shared.sup_action_linear_l2, action_linear_l2(model, theta.grid(), config.refine, traj.P));
            d.k_bound_ok = d.l2_K <= shared.k0_l2 + shared.sup_action_linear_l2 / shared.lambda0_bar +
                                         kLoewnerTol;
        }
        record.iterations.push_back(std::move(stat));
        record.iterations_run = n + 1;
        prev_cost = cost;
        prev_P = traj.P;

        if (cost - record.reference_optimum < config.stop_epsilon) {
            record.reached_epsilon = true;
            record.n_epsilon = n;
            break;
        }
        theta = update(theta, traj, grad);
    }
    record.final_theta = std::move(theta);
    return record;
}

}  // namespace

std::vector<double> RunRecord::costs() const {
    std::vector<double> out;
    out.reserve(iterations.size());
    for (const auto& it : iterations) out.push_back(it.cost);
    return out;
}

RunRecord run_continuous_pg(const LqcModel& model, const Policy& theta0, const PgConfig& config,
                            const RiccatiSolution& reference) {
    return pg_loop(model, theta0, config, reference,
                   [&](const Policy& theta, const TrajectorySolution&, const GradientField& grad) {
                       return npg_step(theta, grad, config.tau);
                   });
}

RunRecord run_discrete_pg(const LqcModel& model, const Policy& theta0, const PgConfig& config,
                          const RiccatiSolution& reference) {
    const bool scaled = config.variant != PgVariant::DiscreteUnscaled;
    return pg_loop(model, theta0, config, reference,
                   [&, scaled](const Policy& theta, const TrajectorySolution& traj, const GradientField&) {
                       IntervalGradients ig =
                           interval_gradients(model, theta, traj, config.allow_pseudo_inverse);
                       std::vector<Matrix> K, V;
                       K.reserve(ig.grad_K.size());
                       V.reserve(ig.grad_V.size());
                       for (int i = 0; i < theta.num_intervals(); ++i) {
                           const auto idx = static_cast<std::size_t>(i);
                           const double delta = scaled ? theta.grid().dt(i) : 1.0;
                           const Matrix& sigma = ig.sigma_left[idx];
                           if (min_eigenvalue(sigma) <= 1e-12) {
                               throw numerical_error(
                                   "run_discrete_pg: state covariance singular at an interval start "
                                   "(requires Sigma0 > 0)");
                           }
                           K.push_back(theta.K(i) -
                                       (config.tau / delta) * ig.grad_K[idx] * sym_inverse(sigma, 1e-12));
                           const Matrix& gv = ig.grad_V[idx];
                           V.push_back(theta.V(i) -
                                       (config.tau / delta) * (theta.V(i) * gv + gv * theta.V(i)));
                       }
                       return Policy(theta.grid(), std::move(K), std::move(V));
                   });
}

int iterations_to_tolerance(const std::vector<double>& costs, double epsilon, double reference_optimum) {
    for (std::size_t n = 0; n < costs.size(); ++n) {
        if (costs[n] - reference_optimum < epsilon) return static_cast<int>(n);
    }
    return kNotReached;
}

std::vector<MeshSweepRow> mesh_sweep(const LqcModel& model, const Policy& theta0,
                                     const MeshSweepConfig& cfg) {
    auto run_mesh = [&](int m) {
        if (cfg.eval_grid % m != 0) {
            throw std::invalid_argument("mesh_sweep: eval_grid must be a multiple of every mesh");
        }
        const int refine = cfg.eval_grid / m;
        const TimeGrid pi = TimeGrid::uniform(model.horizon, m);
        const Policy theta_pi = project_policy_to_grid(theta0, pi);
        const RiccatiSolution ric = solve_riccati(model, pi, SolveOptions{refine, OdeScheme::Euler});

        PgConfig scaled = cfg.scaled;
        scaled.variant = PgVariant::DiscreteScaled;
        scaled.refine = refine;
        scaled.max_iterations = std::max(scaled.max_iterations, cfg.c_pi_iterations);
        // Counts are taken against the tail-average C*_pi, so the run must
        // not stop early on the Riccati reference.
        scaled.stop_epsilon = 1e-300;
        RunRecord rs = run_discrete_pg(model, theta_pi, scaled, ric);

        PgConfig unscaled = cfg.unscaled;
        unscaled.variant = PgVariant::DiscreteUnscaled;
        unscaled.refine = refine;
        unscaled.stop_epsilon = 1e-300;
        RunRecord ru = run_discrete_pg(model, theta_pi, unscaled, ric);

        MeshSweepRow row;
        row.mesh_intervals = m;
        const std::vector<double> cs = rs.costs();
        const int tail_end = std::min<int>(cfg.c_pi_iterations, static_cast<int>(cs.size()));
        const int tail_begin = std::max(0, tail_end - cfg.c_pi_tail_window);
        double acc = 0.0;
        for (int i = tail_begin; i < tail_end; ++i) acc += cs[static_cast<std::size_t>(i)];
        row.c_pi_star = acc / std::max(1, tail_end - tail_begin);
        row.n_scaled = iterations_to_tolerance(cs, cfg.epsilon, row.c_pi_star);
        row.n_unscaled = iterations_to_tolerance(ru.costs(), cfg.epsilon, row.c_pi_star);
        return row;
    };

    std::vector<std::future<MeshSweepRow>> futures;
    futures.reserve(cfg.mesh_family.size());
    for (int m : cfg.mesh_family) futures.push_back(std::async(std::launch::async, run_mesh, m));

    // Continuous-time reference count N(epsilon) on the evaluation grid.
    const TimeGrid eval_grid = TimeGrid::uniform(model.horizon, cfg.eval_grid);
    const RiccatiSolution ric = solve_riccati(model, eval_grid, SolveOptions{1, OdeScheme::Euler});
    PgConfig cont = cfg.scaled;
    cont.variant = PgVariant::Continuous;
    cont.refine = 1;
    cont.stop_epsilon = cfg.epsilon;
    RunRecord rc = run_continuous_pg(model, project_policy_to_grid(theta0, eval_grid), cont, ric);
    const int n_cont = rc.n_epsilon;

    std::vector<MeshSweepRow> rows;
    rows.reserve(futures.size());
    for (auto& f : futures) {
        MeshSweepRow row = f.get();
        row.n_continuous = n_cont;
        rows.push_back(row);
    }
    return rows;
}

void write_run_csv(const RunRecord& record, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw config_error("write_run_csv: cannot open " + path);
    os << "iter,cost,subopt,gradK_l2,gradV_l2,minEigV,maxEigV,minEigSigma,p_monotone_flag\n";
    char buf[256];
    for (std::size_t n = 0; n < record.iterations.size(); ++n) {
        const IterationStat& it = record.iterations[n];
        const DiagnosticsRecord& d = it.diagnostics;
        const bool p_ok = d.p_monotone_prev && d.p_dominates_star;
        std::snprintf(buf, sizeof(buf), "%zu,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%d\n", n, it.cost,
                      it.suboptimality, it.grad_K_l2, it.grad_V_l2, d.min_eig_V, d.max_eig_V,
                      d.min_eig_Sigma, p_ok ? 1 : 0);
        os << buf;
    }
}

void write_mesh_sweep_csv(const std::vector<MeshSweepRow>& rows, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw config_error("write_mesh_sweep_csv: cannot open " + path);
    os << "mesh_intervals,n_scaled,n_unscaled,n_continuous,c_pi_star\n";
    char buf[160];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof(buf), "%d,%d,%d,%d,%.12g\n", r.mesh_intervals, r.n_scaled, r.n_unscaled,
                      r.n_continuous, r.c_pi_star);
        os << buf;
    }
}

}  // namespace lqcpg
