#include "mc.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "errors.hpp"
#include "rng.hpp"

namespace lqcpg {

namespace {

constexpr int kMaxSamplePaths = 16;

// Map every randomisation node onto a sim node; every sim step then knows
// which action-noise interval it belongs to.
std::vector<int> randomisation_interval_per_step(const TimeGrid& sim, const TimeGrid& rand_grid) {
    std::vector<int> out(static_cast<std::size_t>(sim.num_intervals()));
    for (int i = 0; i < sim.num_intervals(); ++i) {
        out[static_cast<std::size_t>(i)] = rand_grid.interval_of(sim.node(i));
    }
    return out;
}

void check_nested(const TimeGrid& sim, const TimeGrid& rand_grid) {
    for (double t : rand_grid.nodes()) {
        bool found = false;
        for (double s : sim.nodes()) {
            if (std::abs(s - t) <= 1e-12) {
                found = true;
                break;
            }
        }
        if (!found) {
            throw std::invalid_argument("simulate_paths: randomisation grid is not nested in the sim grid");
        }
    }
}

struct Workspace {
    std::vector<Matrix> A, B, Q, S, R, Vbar_inv;      // per sim step (left endpoint)
    std::vector<std::vector<Matrix>> C, D;            // per channel, per step
    std::vector<double> log_det_vbar;                 // per step
    std::vector<int> policy_interval, rand_interval;  // per step
    std::vector<Matrix> sqrt_V;                       // per policy interval
    Matrix sqrt_xi0_cov;
};

Workspace precompute(const LqcModel& model, const Policy& theta, const SimConfig& cfg) {
    check_nested(cfg.sim_grid, cfg.randomisation_grid);
    for (double t : theta.grid().nodes()) {
        bool found = false;
        for (double s : cfg.sim_grid.nodes()) {
            if (std::abs(s - t) <= 1e-12) {
                found = true;
                break;
            }
        }
        if (!found) throw std::invalid_argument("simulate_paths: policy grid is not nested in the sim grid");
    }
    if (cfg.num_paths < 1) throw std::invalid_argument("simulate_paths: num_paths must be >= 1");

    const int n = cfg.sim_grid.num_intervals();
    Workspace ws;
    ws.A.reserve(static_cast<std::size_t>(n));
    ws.C.resize(static_cast<std::size_t>(model.noise_channels));
    ws.D.resize(static_cast<std::size_t>(model.noise_channels));
    ws.rand_interval = randomisation_interval_per_step(cfg.sim_grid, cfg.randomisation_grid);
    for (int i = 0; i < n; ++i) {
        const double t = cfg.sim_grid.node(i);
        ws.A.push_back(model.A(t));
        ws.B.push_back(model.B(t));
        ws.Q.push_back(model.Q(t));
        ws.S.push_back(model.S(t));
        ws.R.push_back(model.R(t));
        ws.Vbar_inv.push_back(model.vbar_inverse(t));
        Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(model.Vbar(t)), Eigen::EigenvaluesOnly);
        ws.log_det_vbar.push_back(es.eigenvalues().array().log().sum());
        for (int j = 0; j < model.noise_channels; ++j) {
            ws.C[static_cast<std::size_t>(j)].push_back(model.C[static_cast<std::size_t>(j)](t));
            ws.D[static_cast<std::size_t>(j)].push_back(model.D[static_cast<std::size_t>(j)](t));
        }
        ws.policy_interval.push_back(theta.grid().interval_of(t));
    }
    for (int i = 0; i < theta.num_intervals(); ++i) ws.sqrt_V.push_back(psd_sqrt(theta.V(i)));
    if (!model.xi0_mean.has_value() || !model.xi0_cov.has_value()) {
        throw std::invalid_argument("simulate_paths: model carries no initial-state law (xi0 mean/cov)");
    }
    ws.sqrt_xi0_cov = psd_sqrt(*model.xi0_cov);
    return ws;
}

double log_det_pd_local(const Matrix& v) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(v), Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() <= 0.0) throw numerical_error("simulate_paths: V not positive definite");
    return es.eigenvalues().array().log().sum();
}

}  // namespace

PathEnsemble simulate_paths(const LqcModel& model, const Policy& theta, const SimConfig& cfg) {
    const Workspace ws = precompute(model, theta, cfg);
    const int n = cfg.sim_grid.num_intervals();
    const int d = model.state_dim, k = model.action_dim, p = model.noise_channels;
    const double kd = static_cast<double>(k);

    std::vector<double> log_det_v(static_cast<std::size_t>(theta.num_intervals()));
    for (int i = 0; i < theta.num_intervals(); ++i) log_det_v[static_cast<std::size_t>(i)] = log_det_pd_local(theta.V(i));

    PathEnsemble out;
    out.config = cfg;
    out.path_costs.resize(static_cast<std::size_t>(cfg.num_paths));
    out.sum_state.assign(static_cast<std::size_t>(n) + 1, Vector::Zero(d));
    out.sum_outer.assign(static_cast<std::size_t>(n) + 1, Matrix::Zero(d, d));
    out.sum_outer_sq.assign(static_cast<std::size_t>(n) + 1, Matrix::Zero(d, d));

    const Matrix G = symmetrize(model.G);
    Vector x(d), z0(d), zeta(k), action(k);

    for (int path = 0; path < cfg.num_paths; ++path) {
        const auto path_u = static_cast<std::uint32_t>(path);
        for (int c = 0; c < d; ++c) {
            z0[c] = normal_draw(cfg.seed, RngStream::InitialState, path_u, 0,
                                static_cast<std::uint32_t>(c));
        }
        x = *model.xi0_mean + ws.sqrt_xi0_cov * z0;

        const bool keep = path < kMaxSamplePaths;
        if (keep) out.sample_paths.emplace_back();
        double cost = 0.0;
        int current_rand = -1;
        for (int i = 0; i <= n; ++i) {
            out.sum_state[static_cast<std::size_t>(i)] += x;
            const Matrix outer = x * x.transpose();
            out.sum_outer[static_cast<std::size_t>(i)] += outer;
            out.sum_outer_sq[static_cast<std::size_t>(i)] += outer.cwiseProduct(outer);
            if (keep) out.sample_paths.back().push_back(x);
            if (i == n) break;

            const double h = cfg.sim_grid.dt(i);
            const int pol = ws.policy_interval[static_cast<std::size_t>(i)];
            if (ws.rand_interval[static_cast<std::size_t>(i)] != current_rand) {
                current_rand = ws.rand_interval[static_cast<std::size_t>(i)];
                for (int c = 0; c < k; ++c) {
                    zeta[c] = normal_draw(cfg.seed, RngStream::ActionNoise, path_u,
                                          static_cast<std::uint32_t>(current_rand),
                                          static_cast<std::uint32_t>(c));
                }
            }
            const Matrix& K = theta.K(pol);
            const Vector mean_action = K * x;
            action = mean_action + ws.sqrt_V[static_cast<std::size_t>(pol)] * zeta;

            // Running cost at the realized action + closed-form entropy.
            const auto iu = static_cast<std::size_t>(i);
            const double quad = 0.5 * (x.dot(ws.Q[iu] * x) + 2.0 * action.dot(ws.S[iu] * x) +
                                       action.dot(ws.R[iu] * action));
            const double entropy =
                0.5 * (mean_action.dot(ws.Vbar_inv[iu] * mean_action) +
                       (ws.Vbar_inv[iu] * theta.V(pol)).trace() - kd + ws.log_det_vbar[iu] -
                       log_det_v[static_cast<std::size_t>(pol)]);
            cost += h * (quad + model.rho * entropy);

            Vector dx = h * (ws.A[iu] * x + ws.B[iu] * action);
            const double sqrt_h = std::sqrt(h);
            for (int j = 0; j < p; ++j) {
                const double dw = sqrt_h * normal_draw(cfg.seed, RngStream::BrownianIncrement, path_u,
                                                       static_cast<std::uint32_t>(i),
                                                       static_cast<std::uint32_t>(j));
                dx += (ws.C[static_cast<std::size_t>(j)][iu] * x +
                       ws.D[static_cast<std::size_t>(j)][iu] * action) *
                      dw;
            }
            x += dx;
        }
        cost += 0.5 * x.dot(G * x);
        out.path_costs[static_cast<std::size_t>(path)] = cost;
    }
    return out;
}

McEstimate estimate_cost(const PathEnsemble& ensemble) {
    const auto n = static_cast<double>(ensemble.path_costs.size());
    double mean = 0.0;
    for (double c : ensemble.path_costs) mean += c;
    mean /= n;
    double var = 0.0;
    for (double c : ensemble.path_costs) var += (c - mean) * (c - mean);
    McEstimate est;
    est.num_paths = static_cast<int>(ensemble.path_costs.size());
    est.value = Matrix::Constant(1, 1, mean);
    est.std_error = Matrix::Constant(1, 1, n > 1.0 ? std::sqrt(var / (n * (n - 1.0))) : 0.0);
    return est;
}

std::vector<McEstimate> estimate_covariance(const PathEnsemble& ensemble,
                                            const std::vector<int>& node_indices) {
    const auto n = static_cast<double>(ensemble.path_costs.size());
    std::vector<McEstimate> out;
    out.reserve(node_indices.size());
    for (int idx : node_indices) {
        if (idx < 0 || idx >= static_cast<int>(ensemble.sum_outer.size())) {
            throw std::invalid_argument("estimate_covariance: node index out of range");
        }
        const auto i = static_cast<std::size_t>(idx);
        McEstimate est;
        est.num_paths = static_cast<int>(n);
        est.value = ensemble.sum_outer[i] / n;
        // Jackknife SE of the mean: sqrt((n-1)/n * sum (x_l - mean)^2) with
        // leave-one-out means; reduces to the classical formula below.
        if (n > 1.0) {
            const Matrix mean_sq = est.value.cwiseProduct(est.value);
            const Matrix var = (ensemble.sum_outer_sq[i] / n - mean_sq).cwiseMax(0.0);
            est.std_error = (var / (n - 1.0)).cwiseSqrt();
        } else {
            est.std_error = Matrix::Zero(est.value.rows(), est.value.cols());
        }
        out.push_back(std::move(est));
    }
    return out;
}

namespace {

McEstimate cost_difference(const std::vector<double>& plus, const std::vector<double>& minus, double h) {
    const auto n = static_cast<double>(plus.size());
    double mean = 0.0;
    for (std::size_t i = 0; i < plus.size(); ++i) mean += (plus[i] - minus[i]) / (2.0 * h);
    mean /= n;
    double var = 0.0;
    for (std::size_t i = 0; i < plus.size(); ++i) {
        const double diff = (plus[i] - minus[i]) / (2.0 * h) - mean;
        var += diff * diff;
    }
    McEstimate est;
    est.num_paths = static_cast<int>(plus.size());
    est.value = Matrix::Constant(1, 1, mean);
    est.std_error = Matrix::Constant(1, 1, n > 1.0 ? std::sqrt(var / (n * (n - 1.0))) : 0.0);
    return est;
}

Policy with_entry(const Policy& theta, int interval, bool in_K, int row, int col, double delta) {
    std::vector<Matrix> K = theta.K(), V = theta.V();
    if (in_K) {
        K[static_cast<std::size_t>(interval)](row, col) += delta;
    } else {
        // symmetric perturbation direction
        V[static_cast<std::size_t>(interval)](row, col) += row == col ? delta : 0.5 * delta;
        if (row != col) V[static_cast<std::size_t>(interval)](col, row) += 0.5 * delta;
    }
    return Policy(theta.grid(), std::move(K), std::move(V));
}

}  // namespace

McGradient estimate_gradient_fd_crn(const LqcModel& model, const Policy& theta, const SimConfig& cfg,
                                    double h) {
    if (h <= 0.0) throw std::invalid_argument("estimate_gradient_fd_crn: h must be positive");
    const int d = model.state_dim, k = model.action_dim;
    McGradient out;
    const PathEnsemble base = simulate_paths(model, theta, cfg);
    std::vector<int> starts;
    for (int i = 0; i < theta.num_intervals(); ++i) {
        const double t = theta.grid().node(i);
        starts.push_back(cfg.sim_grid.interval_of(t) + (t >= cfg.sim_grid.horizon() ? 1 : 0));
    }
    for (const McEstimate& e : estimate_covariance(base, starts)) out.sigma_nodes.push_back(e.value);

    auto run_cost = [&](const Policy& p) {
        if (p.min_eig_V() <= 0.0) {
            throw numerical_error("estimate_gradient_fd_crn: perturbed V not PD; shrink h");
        }
        return simulate_paths(model, p, cfg).path_costs;
    };

    for (int i = 0; i < theta.num_intervals(); ++i) {
        Matrix gk(k, d), gk_se(k, d), gv(k, k), gv_se(k, k);
        for (int r = 0; r < k; ++r) {
            for (int c = 0; c < d; ++c) {
                const auto plus = run_cost(with_entry(theta, i, true, r, c, h));
                const auto minus = run_cost(with_entry(theta, i, true, r, c, -h));
                const McEstimate est = cost_difference(plus, minus, h);
                gk(r, c) = est.value(0, 0);
                gk_se(r, c) = est.std_error(0, 0);
            }
        }
        for (int r = 0; r < k; ++r) {
            for (int c = r; c < k; ++c) {
                const auto plus = run_cost(with_entry(theta, i, false, r, c, h));
                const auto minus = run_cost(with_entry(theta, i, false, r, c, -h));
                const McEstimate est = cost_difference(plus, minus, h);
                // The symmetric unit direction 1/2 (e_r e_c^T + e_c e_r^T)
                // recovers the (r,c) entry of the symmetric gradient directly.
                gv(r, c) = est.value(0, 0);
                gv(c, r) = gv(r, c);
                gv_se(r, c) = est.std_error(0, 0);
                gv_se(c, r) = gv_se(r, c);
            }
        }
        out.grad_K.push_back(std::move(gk));
        out.grad_K_se.push_back(std::move(gk_se));
        out.grad_V.push_back(std::move(gv));
        out.grad_V_se.push_back(std::move(gv_se));
    }
    return out;
}

RunRecord run_model_free_pg(const LqcModel& model, const Policy& theta0, const PgConfig& pg_cfg,
                            const SimConfig& sim_cfg, double fd_step, double reference_optimum) {
    if (pg_cfg.tau <= 0.0) throw std::invalid_argument("run_model_free_pg: tau must be positive");
    RunRecord record;
    record.reference_optimum = reference_optimum;
    Policy theta = theta0;
    for (int n = 0; n < pg_cfg.max_iterations; ++n) {
        SimConfig it_cfg = sim_cfg;
        it_cfg.seed = sim_cfg.seed + 0x9E3779B97F4A7C15ull * static_cast<std::uint64_t>(n + 1);
        const PathEnsemble ens = simulate_paths(model, theta, it_cfg);
        const McEstimate cost = estimate_cost(ens);

        IterationStat stat;
        stat.cost = cost.value(0, 0);
        stat.suboptimality = stat.cost - reference_optimum;
        if (!std::isfinite(stat.cost)) {
            record.aborted = true;
            record.abort_reason = "non-finite Monte Carlo cost at iteration " + std::to_string(n);
            break;
        }
        record.iterations.push_back(stat);
        record.iterations_run = n + 1;
        if (stat.suboptimality < pg_cfg.stop_epsilon) {
            record.reached_epsilon = true;
            record.n_epsilon = n;
            break;
        }

        const McGradient grad = estimate_gradient_fd_crn(model, theta, it_cfg, fd_step);
        std::vector<Matrix> K = theta.K(), V = theta.V();
        for (int i = 0; i < theta.num_intervals(); ++i) {
            const auto idx = static_cast<std::size_t>(i);
            const double delta = theta.grid().dt(i);
            Matrix sigma = grad.sigma_nodes[idx];
            if (min_eigenvalue(sigma) < 1e-8) {
                sigma += 1e-8 * Matrix::Identity(sigma.rows(), sigma.cols());
            }
            K[idx] -= (pg_cfg.tau / delta) * grad.grad_K[idx] * sym_inverse(sigma, 1e-300);
            const Matrix& gv = grad.grad_V[idx];
            V[idx] -= (pg_cfg.tau / delta) * (V[idx] * gv + gv * V[idx]);
        }
        theta = Policy(theta.grid(), std::move(K), std::move(V));
    }
    record.final_theta = std::move(theta);
    return record;
}

void write_ensemble_csv(const PathEnsemble& ensemble, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw config_error("write_ensemble_csv: cannot open " + path);
    const auto n_paths = static_cast<double>(ensemble.path_costs.size());
    const auto d = ensemble.sum_state.front().size();
    os << "t";
    for (Eigen::Index c = 0; c < d; ++c) os << ",mean_x" << c;
    for (Eigen::Index r = 0; r < d; ++r)
        for (Eigen::Index c = 0; c < d; ++c) os << ",m2_" << r << c;
    for (Eigen::Index r = 0; r < d; ++r)
        for (Eigen::Index c = 0; c < d; ++c) os << ",se_" << r << c;
    os << "\n";
    std::vector<int> all_nodes;
    for (int i = 0; i < static_cast<int>(ensemble.sum_state.size()); ++i) all_nodes.push_back(i);
    const auto cov = estimate_covariance(ensemble, all_nodes);
    char buf[32];
    auto put = [&](double v) {
        std::snprintf(buf, sizeof(buf), "%.12g", v);
        os << ',' << buf;
    };
    for (std::size_t i = 0; i < ensemble.sum_state.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.12g", ensemble.config.sim_grid.node(static_cast<int>(i)));
        os << buf;
        for (Eigen::Index c = 0; c < d; ++c) put(ensemble.sum_state[i][c] / n_paths);
        for (Eigen::Index r = 0; r < d; ++r)
            for (Eigen::Index c = 0; c < d; ++c) put(cov[i].value(r, c));
        for (Eigen::Index r = 0; r < d; ++r)
            for (Eigen::Index c = 0; c < d; ++c) put(cov[i].std_error(r, c));
        os << "\n";
    }
}

}  // namespace lqcpg
