// Command-line front end.  Talks to the library exclusively through the C
// API in lqcpg/lqcpg.h.  Exit codes: 0 success, 1 config error, 2 numerical
// failure (diagnostics written to --out when given).
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lqcpg/lqcpg.h"

namespace {

struct CommonArgs {
    std::string config;
    std::string preset = "mean-variance";
    int grid = 0;  // 0: take the spec's value
    double tau = 0.0;
    double epsilon = 0.0;
    std::uint64_t seed = 0;
    int paths = 0;
    std::string mode;
    std::string out;
    std::string format = "csv";
    bool dry_run = false;
};

using SpecPtr = std::unique_ptr<lqcpg_spec, decltype(&lqcpg_spec_free)>;
using ModelPtr = std::unique_ptr<lqcpg_model, decltype(&lqcpg_model_free)>;
using PolicyPtr = std::unique_ptr<lqcpg_policy, decltype(&lqcpg_policy_free)>;
using RiccatiPtr = std::unique_ptr<lqcpg_riccati, decltype(&lqcpg_riccati_free)>;
using RunPtr = std::unique_ptr<lqcpg_run, decltype(&lqcpg_run_free)>;

int exit_code_for(int status) {
    switch (status) {
        case LQCPG_OK: return 0;
        case LQCPG_ERR_NUMERICAL: return 2;
        default: return 1;
    }
}

int report_failure(const CommonArgs& args, int status) {
    std::fprintf(stderr, "error: %s\n", lqcpg_last_error());
    if (status == LQCPG_ERR_NUMERICAL && !args.out.empty()) {
        std::error_code ec;
        std::filesystem::create_directories(args.out, ec);
        std::ofstream os(args.out + "/diagnostics.txt");
        if (os) os << lqcpg_last_error() << "\n";
        std::fprintf(stderr, "diagnostics written to %s/diagnostics.txt\n", args.out.c_str());
    }
    return exit_code_for(status);
}

// Loads the spec and applies command-line overrides.
int load_spec(const CommonArgs& args, SpecPtr& spec) {
    lqcpg_spec* raw = nullptr;
    int status = args.config.empty() ? lqcpg_spec_from_preset(args.preset.c_str(), &raw)
                                     : lqcpg_spec_from_config(args.config.c_str(), &raw);
    spec.reset(raw);
    if (status != LQCPG_OK) return status;
    if (args.grid > 0) lqcpg_spec_set(spec.get(), "grid", args.grid);
    if (args.tau > 0.0) lqcpg_spec_set(spec.get(), "tau_scaled", args.tau);
    if (args.epsilon > 0.0) lqcpg_spec_set(spec.get(), "epsilon", args.epsilon);
    if (args.seed != 0) lqcpg_spec_set(spec.get(), "mc.seed", static_cast<double>(args.seed));
    if (args.paths > 0) lqcpg_spec_set(spec.get(), "mc.paths", args.paths);
    if (!args.mode.empty()) lqcpg_spec_set(spec.get(), "mode", args.mode == "model-free" ? 1.0 : 0.0);
    return LQCPG_OK;
}

double get(const lqcpg_spec* spec, const char* key) {
    double v = 0.0;
    lqcpg_spec_get(spec, key, &v);
    return v;
}

int spec_and_model(const CommonArgs& args, SpecPtr& spec, ModelPtr& model) {
    int status = load_spec(args, spec);
    if (status != LQCPG_OK) return status;
    lqcpg_model* raw = nullptr;
    status = lqcpg_spec_model(spec.get(), &raw);
    model.reset(raw);
    return status;
}

void ensure_out_dir(const std::string& out) {
    if (out.empty()) return;
    std::error_code ec;
    std::filesystem::create_directories(out, ec);
}

int cmd_validate(const CommonArgs& args) {
    SpecPtr spec(nullptr, &lqcpg_spec_free);
    ModelPtr model(nullptr, &lqcpg_model_free);
    int status = spec_and_model(args, spec, model);
    if (status != LQCPG_OK) return report_failure(args, status);
    int ok = 0;
    std::string report(4096, '\0');
    status = lqcpg_validate(model.get(), static_cast<int>(get(spec.get(), "grid")), &ok, report.data(),
                            report.size());
    if (status != LQCPG_OK) return report_failure(args, status);
    std::printf("%s", report.c_str());
    std::printf("validation: %s\n", ok != 0 ? "ok" : "failed");
    return ok != 0 ? 0 : 1;
}

int cmd_riccati(const CommonArgs& args) {
    SpecPtr spec(nullptr, &lqcpg_spec_free);
    ModelPtr model(nullptr, &lqcpg_model_free);
    int status = spec_and_model(args, spec, model);
    if (status != LQCPG_OK) return report_failure(args, status);
    const int grid = static_cast<int>(get(spec.get(), "grid"));
    RiccatiPtr ric(nullptr, &lqcpg_riccati_free);
    {
        lqcpg_riccati* raw = nullptr;
        status = lqcpg_riccati_solve(model.get(), grid, 1, &raw);
        ric.reset(raw);
    }
    if (status != LQCPG_OK) return report_failure(args, status);
    int regular = 0;
    double delta = 0.0, c_star = 0.0;
    lqcpg_riccati_info(ric.get(), &regular, &delta);
    status = lqcpg_riccati_optimal_cost(model.get(), ric.get(), &c_star);
    if (status != LQCPG_OK) return report_failure(args, status);
    std::printf("grid intervals:    %d\n", grid);
    std::printf("strongly regular:  %s\n", regular != 0 ? "yes" : "no");
    std::printf("delta_tilde:       %.6g\n", delta);
    std::printf("optimal cost:      %.6f\n", c_star);
    if (!args.out.empty()) {
        ensure_out_dir(args.out);
        PolicyPtr star(nullptr, &lqcpg_policy_free);
        lqcpg_policy* raw = nullptr;
        status = lqcpg_optimal_policy(model.get(), ric.get(), &raw);
        star.reset(raw);
        if (status != LQCPG_OK) return report_failure(args, status);
        const std::string path = args.out + "/riccati_trajectory.csv";
        status = lqcpg_trajectory_csv(model.get(), star.get(), 1, 0, path.c_str());
        if (status != LQCPG_OK) return report_failure(args, status);
        std::printf("trajectory:        %s\n", path.c_str());
    }
    return 0;
}

int cmd_cost(const CommonArgs& args) {
    SpecPtr spec(nullptr, &lqcpg_spec_free);
    ModelPtr model(nullptr, &lqcpg_model_free);
    int status = spec_and_model(args, spec, model);
    if (status != LQCPG_OK) return report_failure(args, status);
    const int grid = static_cast<int>(get(spec.get(), "grid"));
    PolicyPtr theta(nullptr, &lqcpg_policy_free);
    {
        lqcpg_policy* raw = nullptr;
        status = lqcpg_spec_initial_policy(spec.get(), grid, &raw);
        theta.reset(raw);
    }
    if (status != LQCPG_OK) return report_failure(args, status);
    double out[5] = {0, 0, 0, 0, 0};
    status = lqcpg_evaluate_cost(model.get(), theta.get(), 8, 0, out);
    if (status != LQCPG_OK) return report_failure(args, status);
    std::printf("total:               %.8f\n", out[0]);
    std::printf("quadratic terminal:  %.8f\n", out[1]);
    std::printf("running quadratic:   %.8f\n", out[2]);
    std::printf("entropy term:        %.8f\n", out[3]);
    std::printf("representation gap:  %.3e\n", out[4]);
    if (!args.out.empty()) {
        ensure_out_dir(args.out);
        const std::string path = args.out + "/trajectory.csv";
        status = lqcpg_trajectory_csv(model.get(), theta.get(), 8, 0, path.c_str());
        if (status != LQCPG_OK) return report_failure(args, status);
        std::printf("trajectory:          %s\n", path.c_str());
    }
    return 0;
}

int cmd_pg_run(const CommonArgs& args) {
    SpecPtr spec(nullptr, &lqcpg_spec_free);
    ModelPtr model(nullptr, &lqcpg_model_free);
    int status = spec_and_model(args, spec, model);
    if (status != LQCPG_OK) return report_failure(args, status);
    const double tau = get(spec.get(), "tau_scaled");
    const double epsilon = get(spec.get(), "epsilon");
    const bool model_free = get(spec.get(), "mode") != 0.0;

    RunPtr run(nullptr, &lqcpg_run_free);
    if (model_free) {
        const int policy_grid = static_cast<int>(get(spec.get(), "model_free.grid"));
        const int sim_grid = static_cast<int>(get(spec.get(), "mc.grid"));
        const int paths = static_cast<int>(get(spec.get(), "mc.paths"));
        const int iterations = static_cast<int>(get(spec.get(), "model_free.iterations"));
        PolicyPtr theta0(nullptr, &lqcpg_policy_free);
        {
            lqcpg_policy* raw = nullptr;
            status = lqcpg_spec_initial_policy(spec.get(), policy_grid, &raw);
            theta0.reset(raw);
        }
        if (status != LQCPG_OK) return report_failure(args, status);
        RiccatiPtr ric(nullptr, &lqcpg_riccati_free);
        {
            lqcpg_riccati* raw = nullptr;
            status = lqcpg_riccati_solve(model.get(), sim_grid, 1, &raw);
            ric.reset(raw);
        }
        if (status != LQCPG_OK) return report_failure(args, status);
        double c_star = 0.0;
        lqcpg_riccati_optimal_cost(model.get(), ric.get(), &c_star);
        lqcpg_run* raw = nullptr;
        status = lqcpg_model_free_pg(model.get(), theta0.get(), tau, iterations, paths, sim_grid,
                                     static_cast<std::uint64_t>(get(spec.get(), "mc.seed")), 1e-3,
                                     c_star, &raw);
        run.reset(raw);
    } else {
        const int grid = static_cast<int>(get(spec.get(), "grid"));
        PolicyPtr theta0(nullptr, &lqcpg_policy_free);
        {
            lqcpg_policy* raw = nullptr;
            status = lqcpg_spec_initial_policy(spec.get(), grid, &raw);
            theta0.reset(raw);
        }
        if (status != LQCPG_OK) return report_failure(args, status);
        RiccatiPtr ric(nullptr, &lqcpg_riccati_free);
        {
            lqcpg_riccati* raw = nullptr;
            status = lqcpg_riccati_solve(model.get(), grid, 1, &raw);
            ric.reset(raw);
        }
        if (status != LQCPG_OK) return report_failure(args, status);
        lqcpg_run* raw = nullptr;
        status = lqcpg_pg_run(model.get(), theta0.get(), ric.get(), 0, tau,
                              static_cast<int>(get(spec.get(), "pg_iterations")), epsilon, 1, &raw);
        run.reset(raw);
    }
    if (status != LQCPG_OK) return report_failure(args, status);

    int iters = 0, n_eps = 0, aborted = 0;
    double ref = 0.0;
    lqcpg_run_info(run.get(), &iters, &n_eps, &ref, &aborted);
    std::printf("iterations run:    %d\n", iters);
    std::printf("N(epsilon):        %d\n", n_eps);
    std::printf("reference optimum: %.6f\n", ref);
    if (!args.out.empty()) {
        ensure_out_dir(args.out);
        const std::string path = args.out + "/pg_run.csv";
        status = lqcpg_run_csv(run.get(), path.c_str());
        if (status != LQCPG_OK) return report_failure(args, status);
        std::printf("trace:             %s\n", path.c_str());
    }
    return aborted != 0 ? report_failure(args, LQCPG_ERR_NUMERICAL) : 0;
}

int cmd_mesh_sweep(const CommonArgs& args) {
    SpecPtr spec(nullptr, &lqcpg_spec_free);
    ModelPtr model(nullptr, &lqcpg_model_free);
    int status = spec_and_model(args, spec, model);
    if (status != LQCPG_OK) return report_failure(args, status);
    size_t count = 0;
    lqcpg_spec_mesh_family(spec.get(), nullptr, 0, &count);
    std::vector<int> meshes(count);
    lqcpg_spec_mesh_family(spec.get(), meshes.data(), meshes.size(), &count);
    PolicyPtr theta0(nullptr, &lqcpg_policy_free);
    {
        lqcpg_policy* raw = nullptr;
        status = lqcpg_spec_initial_policy(spec.get(), meshes.front(), &raw);
        theta0.reset(raw);
    }
    if (status != LQCPG_OK) return report_failure(args, status);
    std::vector<int> n_s(count), n_u(count), n_c(count);
    std::vector<double> c_pi(count);
    ensure_out_dir(args.out);
    const std::string csv = args.out.empty() ? std::string() : args.out + "/sweep.csv";
    status = lqcpg_mesh_sweep(
        model.get(), theta0.get(), meshes.data(), static_cast<int>(count),
        static_cast<int>(get(spec.get(), "grid")), get(spec.get(), "epsilon"),
        get(spec.get(), "tau_scaled"), get(spec.get(), "tau_unscaled"),
        static_cast<int>(get(spec.get(), "pg_iterations")),
        static_cast<int>(get(spec.get(), "pg_iterations_unscaled")), n_s.data(), n_u.data(), n_c.data(),
        c_pi.data(), csv.empty() ? nullptr : csv.c_str());
    if (status != LQCPG_OK) return report_failure(args, status);
    std::printf("mesh   N_scaled   N_unscaled   N_continuous   C*_pi\n");
    for (std::size_t i = 0; i < count; ++i) {
        std::printf("%4d   %8d   %10d   %12d   %.6f\n", meshes[i], n_s[i], n_u[i], n_c[i], c_pi[i]);
    }
    if (!csv.empty()) std::printf("sweep: %s\n", csv.c_str());
    return 0;
}

int cmd_mc_estimate(const CommonArgs& args, const std::string& policy_kind) {
    SpecPtr spec(nullptr, &lqcpg_spec_free);
    ModelPtr model(nullptr, &lqcpg_model_free);
    int status = spec_and_model(args, spec, model);
    if (status != LQCPG_OK) return report_failure(args, status);
    const int grid = static_cast<int>(get(spec.get(), "mc.grid"));
    const int paths = static_cast<int>(get(spec.get(), "mc.paths"));
    const auto seed = static_cast<std::uint64_t>(get(spec.get(), "mc.seed"));
    PolicyPtr theta(nullptr, &lqcpg_policy_free);
    if (policy_kind == "optimal") {
        RiccatiPtr ric(nullptr, &lqcpg_riccati_free);
        lqcpg_riccati* rawr = nullptr;
        status = lqcpg_riccati_solve(model.get(), grid, 1, &rawr);
        ric.reset(rawr);
        if (status != LQCPG_OK) return report_failure(args, status);
        lqcpg_policy* raw = nullptr;
        status = lqcpg_optimal_policy(model.get(), ric.get(), &raw);
        theta.reset(raw);
    } else {
        lqcpg_policy* raw = nullptr;
        status = lqcpg_spec_initial_policy(spec.get(), grid, &raw);
        theta.reset(raw);
    }
    if (status != LQCPG_OK) return report_failure(args, status);
    ensure_out_dir(args.out);
    const std::string csv = args.out.empty() ? std::string() : args.out + "/ensemble.csv";
    double mean = 0.0, se = 0.0;
    status = lqcpg_mc_estimate(model.get(), theta.get(), paths, grid, seed, &mean, &se,
                               csv.empty() ? nullptr : csv.c_str());
    if (status != LQCPG_OK) return report_failure(args, status);
    std::printf("policy:      %s\n", policy_kind.c_str());
    std::printf("paths:       %d\n", paths);
    std::printf("cost mean:   %.6f\n", mean);
    std::printf("cost se:     %.3e\n", se);
    if (!csv.empty()) std::printf("ensemble:    %s\n", csv.c_str());
    return 0;
}

int cmd_landscape(const CommonArgs& args) {
    ensure_out_dir(args.out);
    const std::string csv = args.out.empty() ? std::string() : args.out + "/landscape.csv";
    int satisfied = 0, total = 0;
    double max_gap = 0.0;
    const std::uint64_t seed = args.seed != 0 ? args.seed : 12345;
    int status = lqcpg_landscape_sweep(100, 20, seed, 256, &satisfied, &total, &max_gap,
                                       csv.empty() ? nullptr : csv.c_str());
    if (status != LQCPG_OK) return report_failure(args, status);
    std::printf("inequality checks:   %d/%d satisfied\n", satisfied, total);
    std::printf("max identity gap:    %.3e\n", max_gap);
    for (const double eps : {0.1, 0.01}) {
        double c1 = 0.0, c_half = 0.0;
        lqcpg_noncoercive_cost(eps, 1.0, 4096, &c1);
        lqcpg_noncoercive_cost(eps, 0.5, 4096, &c_half);
        std::printf("noncoercive eps=%.2g: C(K)=%.6f C(0.5K)=%.6f\n", eps, c1, c_half);
    }
    if (!csv.empty()) std::printf("cases: %s\n", csv.c_str());
    return 0;
}

int cmd_bench(const CommonArgs& args) {
    SpecPtr spec(nullptr, &lqcpg_spec_free);
    int status = load_spec(args, spec);
    if (status != LQCPG_OK) return report_failure(args, status);
    const std::string out = args.out.empty() ? "bench_out" : args.out;
    const int format = args.format == "svg" ? 1 : args.format == "both" ? 2 : 0;
    status = lqcpg_bench_run(spec.get(), out.c_str(), format, args.dry_run ? 1 : 0);
    if (status != LQCPG_OK) return report_failure(args, status);
    std::printf("report written to %s\n", out.c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Entropy-regularized LQ control: geometry-aware policy gradient toolkit"};
    app.require_subcommand(1);
    app.fallthrough();  // global flags may follow the subcommand

    CommonArgs args;
    std::string policy_kind = "optimal";
    app.add_option("--config", args.config, "Path to a JSON run configuration");
    app.add_option("--preset", args.preset, "Benchmark preset name (default mean-variance)");
    app.add_option("--grid", args.grid, "Uniform grid intervals (default from spec: 128)");
    app.add_option("--tau", args.tau, "Stepsize override");
    app.add_option("--epsilon", args.epsilon, "Target accuracy override");
    app.add_option("--seed", args.seed, "RNG seed override");
    app.add_option("--paths", args.paths, "Monte Carlo path count override");
    app.add_option("--mode", args.mode, "model-based or model-free")
        ->check(CLI::IsMember({"model-based", "model-free"}));
    app.add_option("--out", args.out, "Output directory");
    app.add_option("--format", args.format, "Report format: csv, svg or both")
        ->check(CLI::IsMember({"csv", "svg", "both"}));
    app.add_flag("--dry-run", args.dry_run, "Resolve the config and write the manifest only");

    auto* validate = app.add_subcommand("validate", "Check the standing assumptions of a model");
    auto* riccati = app.add_subcommand("riccati", "Solve the Riccati equation and report the optimal cost");
    auto* cost = app.add_subcommand("cost", "Evaluate the cost of the initial policy");
    auto* pg_run = app.add_subcommand("pg-run", "Run the geometry-aware policy gradient iteration");
    auto* mesh_sweep = app.add_subcommand("mesh-sweep", "Compare scaled/unscaled PG across action meshes");
    auto* mc_estimate = app.add_subcommand("mc-estimate", "Monte Carlo cost estimate");
    mc_estimate->add_option("--policy", policy_kind, "Which policy to estimate: optimal or initial")
        ->check(CLI::IsMember({"optimal", "initial"}));
    auto* landscape = app.add_subcommand("landscape", "Verify landscape identities and inequalities");
    auto* bench = app.add_subcommand("bench", "Full benchmark: convergence run + mesh sweep + reports");

    CLI11_PARSE(app, argc, argv);

    if (validate->parsed()) return cmd_validate(args);
    if (riccati->parsed()) return cmd_riccati(args);
    if (cost->parsed()) return cmd_cost(args);
    if (pg_run->parsed()) return cmd_pg_run(args);
    if (mesh_sweep->parsed()) return cmd_mesh_sweep(args);
    if (mc_estimate->parsed()) return cmd_mc_estimate(args, policy_kind);
    if (landscape->parsed()) return cmd_landscape(args);
    if (bench->parsed()) return cmd_bench(args);
    return 1;
}
