#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mc.hpp"

namespace lqcpg {

// Data-level description of one coefficient: a constant matrix, a named
// entry from the preset registry, or (for the channel family D) a Gram
// matrix whose symmetric PSD root's rows become the channels.
struct CoeffSpec {
    enum class Kind { Constant, Named, Gram } kind = Kind::Constant;
    Matrix value;      // Constant / Gram
    std::string name;  // Named
};

struct ModelSpec {
    int state_dim = 0, action_dim = 0, noise_channels = 0;
    double horizon = 0.0, rho = 0.0;
    CoeffSpec A, B, Q, S, R, Vbar;
    std::vector<CoeffSpec> C;
    CoeffSpec D;  // Gram or per-channel constants via D_channels
    std::vector<CoeffSpec> D_channels;
    Matrix G, Sigma0;
    Vector xi0_mean;
    Matrix xi0_cov;
};

// Fully resolved run specification; round-trips through emit_config /
// load_config byte-identically.
struct RunSpec {
    std::string preset;  // empty when the model is given explicitly
    ModelSpec model;
    Matrix theta0_K, theta0_V;
    int grid = 128;
    double epsilon = 0.01;
    double tau_scaled = 0.01, tau_unscaled = 0.08;
    int pg_iterations = 1000, pg_iterations_unscaled = 5000;
    std::vector<int> mesh_family{8, 16, 32, 64, 128};
    int mc_paths = 100000, mc_grid = 128;
    std::uint64_t seed = 20240801;
    int model_free_grid = 8, model_free_iterations = 250;
    double model_free_fd_step = 1e-3;
    int repetitions = 10;
    std::string mode = "model-based";  // or "model-free"
};

RunSpec preset_spec(const std::string& name);
RunSpec load_config(const std::string& path);
std::string emit_config(const RunSpec& spec);
std::uint64_t config_hash(const RunSpec& spec);

LqcModel build_model(const ModelSpec& spec);
Policy initial_policy(const RunSpec& spec, int grid_intervals);

struct ReportBundle {
    RunSpec spec;
    bool dry_run = false;
    double c_star = 0.0;                               // Riccati-route optimum on the run grid
    std::vector<std::vector<double>> suboptimality;    // per repetition trace
    std::vector<MeshSweepRow> sweep;
    std::vector<std::uint64_t> seeds_used;
};

enum class ReportFormat { Csv, Svg, Both };

// (a) convergence run on the preset grid (model-based: one exact trace;
// model-free: `repetitions` Monte Carlo traces), (b) scaled/unscaled mesh
// sweep.  Deterministic given the spec.
ReportBundle run_benchmark(const RunSpec& spec, bool dry_run = false);

// Writes convergence.csv / sweep.csv / manifest.json (+ .svg panels) into
// out_dir; returns the file names written.  Byte-deterministic.
std::vector<std::string> emit_report(const ReportBundle& bundle, const std::string& out_dir,
                                     ReportFormat format);

}  // namespace lqcpg
