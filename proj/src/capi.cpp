#include "lqcpg/lqcpg.h"

#include <cstring>
#include <string>

#include "core/bench.hpp"
#include "core/errors.hpp"
#include "core/landscape.hpp"

namespace {

thread_local std::string g_last_error;

int fail(int code, const char* what) {
    g_last_error = what != nullptr ? what : "unknown error";
    return code;
}

template <typename Fn>
int guarded(Fn&& fn) {
    try {
        return fn();
    } catch (const lqcpg::config_error& e) {
        return fail(LQCPG_ERR_CONFIG, e.what());
    } catch (const lqcpg::numerical_error& e) {
        return fail(LQCPG_ERR_NUMERICAL, e.what());
    } catch (const std::invalid_argument& e) {
        return fail(LQCPG_ERR_ARGUMENT, e.what());
    } catch (const std::exception& e) {
        return fail(LQCPG_ERR_NUMERICAL, e.what());
    }
}

int copy_string(const std::string& s, char* buffer, size_t capacity, size_t* written) {
    if (written != nullptr) *written = s.size() + 1;
    if (buffer == nullptr || capacity == 0) return LQCPG_OK;
    const size_t n = std::min(capacity - 1, s.size());
    std::memcpy(buffer, s.data(), n);
    buffer[n] = '\0';
    return LQCPG_OK;
}

}  // namespace

struct lqcpg_model {
    lqcpg::LqcModel value;
};
struct lqcpg_policy {
    lqcpg::Policy value;
};
struct lqcpg_riccati {
    lqcpg::RiccatiSolution value;
};
struct lqcpg_run {
    lqcpg::RunRecord value;
};
struct lqcpg_spec {
    lqcpg::RunSpec value;
};

extern "C" {

const char* lqcpg_last_error(void) { return g_last_error.c_str(); }

const char* lqcpg_version(void) { return "0.1.0"; }

int lqcpg_model_from_preset(const char* name, lqcpg_model** out) {
    if (name == nullptr || out == nullptr) return fail(LQCPG_ERR_ARGUMENT, "null argument");
    return guarded([&] {
        *out = new lqcpg_model{lqcpg::build_model(lqcpg::preset_spec(name).model)};
        return LQCPG_OK;
    });
}

int lqcpg_model_from_config(const char* path, lqcpg_model** out) {
    if (path == nullptr || out == nullptr) return fail(LQCPG_ERR_ARGUMENT, "null argument");
    return guarded([&] {
        *out = new lqcpg_model{lqcpg::build_model(lqcpg::load_config(path).model)};
        return LQCPG_OK;
    });
}

void lqcpg_model_free(lqcpg_model* model) { delete model; }

int lqcpg_model_dims(const lqcpg_model* model, int* state_dim, int* action_dim, int* noise_channels) {
    if (model == nullptr) return fail(LQCPG_ERR_ARGUMENT, "null model");
    if (state_dim != nullptr) *state_dim = model->value.state_dim;
    if (action_dim != nullptr) *action_dim = model->value.action_dim;
    if (noise_channels != nullptr) *noise_channels = model->value.noise_channels;
    return LQCPG_OK;
}

int lqcpg_validate(const lqcpg_model* model, int grid_n, int* ok, char* report,
                   size_t report_capacity) {
    if (model == nullptr) return fail(LQCPG_ERR_ARGUMENT, "null model");
    return guarded([&] {
        const auto grid = lqcpg::TimeGrid::uniform(model->value.horizon, grid_n);
        const lqcpg::ValidationReport rep = lqcpg::validate_model(model->value, grid);
        if (ok != nullptr) *ok = rep.ok ? 1 : 0;
        std::string text;
        for (const auto& v : rep.violations) text += "violation: " + v + "\n";
        for (const auto& w : rep.warnings) text += "warning: " + w + "\n";
        return copy_string(text, report, report_capacity, nullptr);
    });
}

int lqcpg_policy_constant(const lqcpg_model* model, int grid_n, const double* K, const double* V,
                          lqcpg_policy** out) {
    if (model == nullptr || K == nullptr || V == nullptr || out == nullptr) {
        return fail(LQCPG_ERR_ARGUMENT, "null argument");
    }
    return guarded([&] {
        const int d = model->value.state_dim, k = model->value.action_dim;
        lqcpg::Matrix Km(k, d), Vm(k, k);
        for (int r = 0; r < k; ++r)
            for (int c = 0; c < d; ++c) Km(r, c) = K[r * d + c];
        for (int r = 0; r < k; ++r)
            for (int c = 0; c < k; ++c) Vm(r, c) = V[r * k + c];
        const auto grid = lqcpg::TimeGrid::uniform(model->value.horizon, grid_n);
        *out = new lqcpg_policy{lqcpg::Policy::constant(grid, Km, Vm)};
        return LQCPG_OK;
    });
}

int lqcpg_policy_project(const lqcpg_policy* policy, int grid_n, int v_left_sample,
                         lqcpg_policy** out) {
    if (policy == nullptr || out == nullptr) return fail(LQCPG_ERR_ARGUMENT, "null argument");
    return guarded([&] {
        const auto target = lqcpg::TimeGrid::uniform(policy->value.grid().horizon(), grid_n);
        const auto mode = v_left_sample != 0 ? lqcpg::ProjectionMode::LeftSample
                                             : lqcpg::ProjectionMode::IntervalAverage;
        *out = new lqcpg_policy{lqcpg::project_policy_to_grid(policy->value, target, mode)};
        return LQCPG_OK;
    });
}

void lqcpg_policy_free(lqcpg_policy* policy) { delete policy; }

int lqcpg_policy_values(const lqcpg_policy* policy, int interval, double* K, double* V) {
    if (policy == nullptr) return fail(LQCPG_ERR_ARGUMENT, "null policy");
    if (interval < 0 || interval >= policy->value.num_intervals()) {
        return fail(LQCPG_ERR_ARGUMENT, "interval out of range");
    }
    const lqcpg::Matrix& Km = policy->value.K(interval);
    const lqcpg::Matrix& Vm = policy->value.V(interval);
    if (K != nullptr) {
        for (Eigen::Index r = 0; r < Km.rows(); ++r)
            for (Eigen::Index c = 0; c < Km.cols(); ++c) K[r * Km.cols() + c] = Km(r, c);
    }
    if (V != nullptr) {
        for (Eigen::Index r = 0; r < Vm.rows(); ++r)
            for (Eigen::Index c = 0; c < Vm.cols(); ++c) V[r * Vm.cols() + c] = Vm(r, c);
    }
    return LQCPG_OK;
}

int lqcpg_policy_num_intervals(const lqcpg_policy* policy, int* out) {
    if (policy == nullptr || out == nullptr) return fail(LQCPG_ERR_ARGUMENT, "null argument");
    *out = policy->value.num_intervals();
    return LQCPG_OK;
}

int lqcpg_riccati_solve(const lqcpg_model* model, int grid_n, int refine, lqcpg_riccati** out) {
    if (model == nullptr || out == nullptr) return fail(LQCPG_ERR_ARGUMENT, "null argument");
    return guarded([&] {
        const auto grid = lqcpg::TimeGrid::uniform(model->value.horizon, grid_n);
        *out = new lqcpg_riccati{
            lqcpg::solve_riccati(model->value, grid, lqcpg::SolveOptions{refine, lqcpg::OdeScheme::Euler})};
        return LQCPG_OK;
    });
}

void lqcpg_riccati_free(lqcpg_riccati* riccati) { delete riccati; }

int lqcpg_riccati_info(const lqcpg_riccati* riccati, int* strongly_regular, double* delta_tilde) {
    if (riccati == nullptr) return fail(LQCPG_ERR_ARGUMENT, "null riccati");
    if (strongly_regular != nullptr) *strongly_regular = riccati->value.strongly_regular ? 1 : 0;
    if (delta_tilde != nullptr) *delta_tilde = riccati->value.delta_tilde;
    return LQCPG_OK;
}

int lqcpg_riccati_optimal_cost(const lqcpg_model* model, const lqcpg_riccati* riccati, double* out) {
    if (model == nullptr || riccati == nullptr || out == nullptr) {
        return fail(LQCPG_ERR_ARGUMENT, "null argument");
    }
    return guarded([&] {
        *out = lqcpg::optimal_cost(model->value, riccati->value);
        return LQCPG_OK;
    });
}

int lqcpg_optimal_policy(const lqcpg_model* model, const lqcpg_riccati* riccati, lqcpg_policy** out) {
    if (model == nullptr || riccati == nullptr || out == nullptr) {
        return fail(LQCPG_ERR_ARGUMENT, "null argument");
    }
    return guarded([&] {
        *out = new lqcpg_policy{lqcpg::optimal_policy(model->value, riccati->value)};
        return LQCPG_OK;
    });
}

int lqcpg_evaluate_cost(const lqcpg_model* model, const lqcpg_policy* policy, int refine, int rk4,
                        double out[5]) {
    if (model == nullptr || policy == nullptr || out == nullptr) {
        return fail(LQCPG_ERR_ARGUMENT, "null argument");
    }
    return guarded([&] {
        const lqcpg::SolveOptions opts{refine, rk4 != 0 ? lqcpg::OdeScheme::Rk4 : lqcpg::OdeScheme::Euler};
        const lqcpg::CostBreakdown c = lqcpg::evaluate_cost(model->value, policy->value, opts);
        out[0] = c.total;
        out[1] = c.quadratic_terminal;
        out[2] = c.running_quadratic;
        out[3] = c.entropy_term;
        out[4] = c.representation_gap;
        return LQCPG_OK;
    });
}

int lqcpg_trajectory_csv(const lqcpg_model* model, const lqcpg_policy* policy, int refine, int rk4,
                         const char* path) {
    if (model == nullptr || policy == nullptr || path == nullptr) {
        return fail(LQCPG_ERR_ARGUMENT, "null argument");
    }
    return guarded([&] {
        const lqcpg::SolveOptions opts{refine, rk4 != 0 ? lqcpg::OdeScheme::Rk4 : lqcpg::OdeScheme::Euler};
        lqcpg::write_trajectory_csv(lqcpg::solve_trajectories(model->value, policy->value, opts), path);
        return LQCPG_OK;
    });
}

int lqcpg_pg_run(const lqcpg_model* model, const lqcpg_policy* theta0, const lqcpg_riccati* reference,
                 int variant, double tau, int max_iterations, double stop_epsilon, int refine,
                 lqcpg_run** out) {
    if (model == nullptr || theta0 == nullptr || reference == nullptr || out == nullptr) {
        return fail(LQCPG_ERR_ARGUMENT, "null argument");
    }
    if (variant < 0 || variant > 2) return fail(LQCPG_ERR_ARGUMENT, "variant must be 0, 1 or 2");
    return guarded([&] {
        lqcpg::PgConfig cfg;
        cfg.tau = tau;
        cfg.max_iterations = max_iterations;
        cfg.stop_epsilon = stop_epsilon;
        cfg.refine = refine;
        cfg.variant = variant == 0   ? lqcpg::PgVariant::Continuous
                      : variant == 1 ? lqcpg::PgVariant::DiscreteScaled
                                     : lqcpg::PgVariant::DiscreteUnscaled;
        lqcpg::RunRecord rec =
            variant == 0 ? lqcpg::run_continuous_pg(model->value, theta0->value, cfg, reference->value)
                         : lqcpg::run_discrete_pg(model->value, theta0->value, cfg, reference->value);
        *out = new lqcpg_run{std::move(rec)};
        return LQCPG_OK;
    });
}

void lqcpg_run_free(lqcpg_run* run) { delete run; }

int lqcpg_run_info(const lqcpg_run* run, int* iterations_run, int* n_epsilon, double* reference_optimum,
                   int* aborted) {
    if (run == nullptr) return fail(LQCPG_ERR_ARGUMENT, "null run");
    if (iterations_run != nullptr) *iterations_run = run->value.iterations_run;
    if (n_epsilon != nullptr) *n_epsilon = run->value.n_epsilon;
    if (reference_optimum != nullptr) *reference_optimum = run->value.reference_optimum;
    if (aborted != nullptr) *aborted = run->value.aborted ? 1 : 0;
    return LQCPG_OK;
}

int lqcpg_run_costs(const lqcpg_run* run, double* costs, size_t capacity, size_t* written) {
    if (run == nullptr) return fail(LQCPG_ERR_ARGUMENT, "null run");
    const std::vector<double> cs = run->value.costs();
    const size_t n = std::min(capacity, cs.size());
    if (costs != nullptr) std::memcpy(costs, cs.data(), n * sizeof(double));
    if (written != nullptr) *written = n;
    return LQCPG_OK;
}

int lqcpg_run_csv(const lqcpg_run* run, const char* path) {
    if (run == nullptr || path == nullptr) return fail(LQCPG_ERR_ARGUMENT, "null argument");
    return guarded([&] {
        lqcpg::write_run_csv(run->value, path);
        return LQCPG_OK;
    });
}

int lqcpg_mesh_sweep(const lqcpg_model* model, const lqcpg_policy* theta0, const int* meshes,
                     int num_meshes, int eval_grid, double epsilon, double tau_scaled,
                     double tau_unscaled, int iterations_scaled, int iterations_unscaled, int* n_scaled,
                     int* n_unscaled, int* n_continuous, double* c_pi_star,
                     const char* csv_path_or_null) {
    if (model == nullptr || theta0 == nullptr || meshes == nullptr || num_meshes < 1) {
        return fail(LQCPG_ERR_ARGUMENT, "null argument");
    }
    return guarded([&] {
        lqcpg::MeshSweepConfig cfg;
        cfg.mesh_family.assign(meshes, meshes + num_meshes);
        cfg.eval_grid = eval_grid;
        cfg.epsilon = epsilon;
        cfg.scaled.tau = tau_scaled;
        cfg.scaled.max_iterations = iterations_scaled;
        cfg.scaled.diagnostics_on = false;
        cfg.unscaled.tau = tau_unscaled;
        cfg.unscaled.max_iterations = iterations_unscaled;
        cfg.unscaled.diagnostics_on = false;
        cfg.c_pi_iterations = iterations_scaled;
        const auto rows = lqcpg::mesh_sweep(model->value, theta0->value, cfg);
        for (int i = 0; i < num_meshes; ++i) {
            const auto idx = static_cast<std::size_t>(i);
            if (n_scaled != nullptr) n_scaled[i] = rows[idx].n_scaled;
            if (n_unscaled != nullptr) n_unscaled[i] = rows[idx].n_unscaled;
            if (n_continuous != nullptr) n_continuous[i] = rows[idx].n_continuous;
            if (c_pi_star != nullptr) c_pi_star[i] = rows[idx].c_pi_star;
        }
        if (csv_path_or_null != nullptr) lqcpg::write_mesh_sweep_csv(rows, csv_path_or_null);
        return LQCPG_OK;
    });
}

int lqcpg_noncoercive_cost(double epsilon, double scaling, int grid_n, double* out) {
    if (out == nullptr) return fail(LQCPG_ERR_ARGUMENT, "null output");
    return guarded([&] {
        *out = lqcpg::noncoercive_example_cost(epsilon, scaling, lqcpg::TimeGrid::uniform(1.0, grid_n));
        return LQCPG_OK;
    });
}

int lqcpg_landscape_sweep(int scalar_cases, int matrix_cases, uint64_t seed, int grid_n, int* satisfied,
                          int* total, double* max_gap_residual, const char* csv_path_or_null) {
    return guarded([&] {
        const auto cases = lqcpg::landscape_sweep(scalar_cases, matrix_cases, seed, grid_n);
        int sat = 0, tot = 0;
        double worst = 0.0;
        for (const auto& c : cases) {
            for (const lqcpg::ResidualReport* r : {&c.gap, &c.lojasiewicz, &c.smoothness}) {
                ++tot;
                if (r->satisfied) ++sat;
            }
            worst = std::max(worst, c.gap.residual);
        }
        if (satisfied != nullptr) *satisfied = sat;
        if (total != nullptr) *total = tot;
        if (max_gap_residual != nullptr) *max_gap_residual = worst;
        if (csv_path_or_null != nullptr) lqcpg::write_sweep_csv(cases, csv_path_or_null);
        return LQCPG_OK;
    });
}

int lqcpg_mc_estimate(const lqcpg_model* model, const lqcpg_policy* policy, int paths, int grid_n,
                      uint64_t seed, double* cost_mean, double* cost_se, const char* csv_path_or_null) {
    if (model == nullptr || policy == nullptr) return fail(LQCPG_ERR_ARGUMENT, "null argument");
    return guarded([&] {
        lqcpg::SimConfig cfg;
        cfg.num_paths = paths;
        cfg.sim_grid = lqcpg::TimeGrid::uniform(model->value.horizon, grid_n);
        cfg.randomisation_grid = cfg.sim_grid;
        cfg.seed = seed;
        const lqcpg::PathEnsemble ens = lqcpg::simulate_paths(model->value, policy->value, cfg);
        const lqcpg::McEstimate est = lqcpg::estimate_cost(ens);
        if (cost_mean != nullptr) *cost_mean = est.value(0, 0);
        if (cost_se != nullptr) *cost_se = est.std_error(0, 0);
        if (csv_path_or_null != nullptr) lqcpg::write_ensemble_csv(ens, csv_path_or_null);
        return LQCPG_OK;
    });
}

int lqcpg_model_free_pg(const lqcpg_model* model, const lqcpg_policy* theta0, double tau, int iterations,
                        int paths, int grid_n, uint64_t seed, double fd_step, double reference_optimum,
                        lqcpg_run** out) {
    if (model == nullptr || theta0 == nullptr || out == nullptr) {
        return fail(LQCPG_ERR_ARGUMENT, "null argument");
    }
    return guarded([&] {
        lqcpg::SimConfig sim;
        sim.num_paths = paths;
        sim.sim_grid = lqcpg::TimeGrid::uniform(model->value.horizon, grid_n);
        sim.randomisation_grid = sim.sim_grid;
        sim.seed = seed;
        lqcpg::PgConfig cfg;
        cfg.tau = tau;
        cfg.max_iterations = iterations;
        cfg.stop_epsilon = 1e-12;
        lqcpg::RunRecord rec =
            lqcpg::run_model_free_pg(model->value, theta0->value, cfg, sim, fd_step, reference_optimum);
        *out = new lqcpg_run{std::move(rec)};
        return LQCPG_OK;
    });
}

int lqcpg_spec_from_preset(const char* name, lqcpg_spec** out) {
    if (name == nullptr || out == nullptr) return fail(LQCPG_ERR_ARGUMENT, "null argument");
    return guarded([&] {
        *out = new lqcpg_spec{lqcpg::preset_spec(name)};
        return LQCPG_OK;
    });
}

int lqcpg_spec_from_config(const char* path, lqcpg_spec** out) {
    if (path == nullptr || out == nullptr) return fail(LQCPG_ERR_ARGUMENT, "null argument");
    return guarded([&] {
        *out = new lqcpg_spec{lqcpg::load_config(path)};
        return LQCPG_OK;
    });
}

void lqcpg_spec_free(lqcpg_spec* spec) { delete spec; }

int lqcpg_spec_emit(const lqcpg_spec* spec, char* buffer, size_t capacity, size_t* written) {
    if (spec == nullptr) return fail(LQCPG_ERR_ARGUMENT, "null spec");
    return guarded([&] { return copy_string(lqcpg::emit_config(spec->value), buffer, capacity, written); });
}

int lqcpg_spec_set(lqcpg_spec* spec, const char* key, double value) {
    if (spec == nullptr || key == nullptr) return fail(LQCPG_ERR_ARGUMENT, "null argument");
    lqcpg::RunSpec& s = spec->value;
    const std::string k = key;
    if (k == "grid") s.grid = static_cast<int>(value);
    else if (k == "epsilon") s.epsilon = value;
    else if (k == "tau_scaled") s.tau_scaled = value;
    else if (k == "tau_unscaled") s.tau_unscaled = value;
    else if (k == "pg_iterations") s.pg_iterations = static_cast<int>(value);
    else if (k == "pg_iterations_unscaled") s.pg_iterations_unscaled = static_cast<int>(value);
    else if (k == "mc.paths") s.mc_paths = static_cast<int>(value);
    else if (k == "mc.grid") s.mc_grid = static_cast<int>(value);
    else if (k == "mc.seed") s.seed = static_cast<std::uint64_t>(value);
    else if (k == "repetitions") s.repetitions = static_cast<int>(value);
    else if (k == "mode") s.mode = value != 0.0 ? "model-free" : "model-based";
    else if (k == "model_free.grid") s.model_free_grid = static_cast<int>(value);
    else if (k == "model_free.iterations") s.model_free_iterations = static_cast<int>(value);
    else return fail(LQCPG_ERR_ARGUMENT, "unknown override key");
    return LQCPG_OK;
}

int lqcpg_spec_get(const lqcpg_spec* spec, const char* key, double* out) {
    if (spec == nullptr || key == nullptr || out == nullptr) {
        return fail(LQCPG_ERR_ARGUMENT, "null argument");
    }
    const lqcpg::RunSpec& s = spec->value;
    const std::string k = key;
    if (k == "grid") *out = s.grid;
    else if (k == "epsilon") *out = s.epsilon;
    else if (k == "tau_scaled") *out = s.tau_scaled;
    else if (k == "tau_unscaled") *out = s.tau_unscaled;
    else if (k == "pg_iterations") *out = s.pg_iterations;
    else if (k == "pg_iterations_unscaled") *out = s.pg_iterations_unscaled;
    else if (k == "mc.paths") *out = s.mc_paths;
    else if (k == "mc.grid") *out = s.mc_grid;
    else if (k == "mc.seed") *out = static_cast<double>(s.seed);
    else if (k == "repetitions") *out = s.repetitions;
    else if (k == "mode") *out = s.mode == "model-free" ? 1.0 : 0.0;
    else if (k == "model_free.grid") *out = s.model_free_grid;
    else if (k == "model_free.iterations") *out = s.model_free_iterations;
    else return fail(LQCPG_ERR_ARGUMENT, "unknown key");
    return LQCPG_OK;
}

int lqcpg_spec_mesh_family(const lqcpg_spec* spec, int* meshes, size_t capacity, size_t* count) {
    if (spec == nullptr) return fail(LQCPG_ERR_ARGUMENT, "null spec");
    const auto& fam = spec->value.mesh_family;
    if (count != nullptr) *count = fam.size();
    if (meshes != nullptr) {
        for (size_t i = 0; i < std::min(capacity, fam.size()); ++i) meshes[i] = fam[i];
    }
    return LQCPG_OK;
}

int lqcpg_spec_model(const lqcpg_spec* spec, lqcpg_model** out) {
    if (spec == nullptr || out == nullptr) return fail(LQCPG_ERR_ARGUMENT, "null argument");
    return guarded([&] {
        *out = new lqcpg_model{lqcpg::build_model(spec->value.model)};
        return LQCPG_OK;
    });
}

int lqcpg_spec_initial_policy(const lqcpg_spec* spec, int grid_n, lqcpg_policy** out) {
    if (spec == nullptr || out == nullptr) return fail(LQCPG_ERR_ARGUMENT, "null argument");
    return guarded([&] {
        *out = new lqcpg_policy{lqcpg::initial_policy(spec->value, grid_n)};
        return LQCPG_OK;
    });
}

int lqcpg_bench_run(const lqcpg_spec* spec, const char* out_dir, int format, int dry_run) {
    if (spec == nullptr || out_dir == nullptr) return fail(LQCPG_ERR_ARGUMENT, "null argument");
    if (format < 0 || format > 2) return fail(LQCPG_ERR_ARGUMENT, "format must be 0, 1 or 2");
    return guarded([&] {
        const lqcpg::ReportBundle bundle = lqcpg::run_benchmark(spec->value, dry_run != 0);
        lqcpg::emit_report(bundle, out_dir,
                           format == 0   ? lqcpg::ReportFormat::Csv
                           : format == 1 ? lqcpg::ReportFormat::Svg
                                         : lqcpg::ReportFormat::Both);
        return LQCPG_OK;
    });
}

}  // extern "C"
