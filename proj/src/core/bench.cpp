#include "bench.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "errors.hpp"

namespace lqcpg {

using nlohmann::json;

namespace {

// ---- named coefficient registry ----

Matrix sinusoidal_b(double t) {
    Matrix b(1, 3);
    b << 0.4, 0.8, 0.4;
    b.array() += 0.2 * std::sin(2.0 * M_PI * t);
    return b;
}

struct NamedCoefficient {
    int rows, cols;
    Matrix (*fn)(double);
};

const std::map<std::string, NamedCoefficient>& named_registry() {
    static const std::map<std::string, NamedCoefficient> reg{
        {"mean_variance_sinusoidal_B", {1, 3, &sinusoidal_b}},
    };
    return reg;
}

// ---- json helpers ----

json matrix_to_json(const Matrix& m) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

Matrix matrix_from_json(const json& j, const std::string& key) {
    if (!j.is_array() || j.empty() || !j.front().is_array()) {
        throw config_error("config: key '" + key + "' must be a matrix (array of rows)");
    }
    const auto rows = j.size();
    const auto cols = j.front().size();
    Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (std::size_t r = 0; r < rows; ++r) {
        if (!j[r].is_array() || j[r].size() != cols) {
            throw config_error("config: ragged matrix for key '" + key + "'");
        }
        for (std::size_t c = 0; c < cols; ++c) {
            if (!j[r][c].is_number()) throw config_error("config: non-numeric entry in '" + key + "'");
            m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = j[r][c].get<double>();
        }
    }
    return m;
}

Vector vector_from_json(const json& j, const std::string& key) {
    if (!j.is_array()) throw config_error("config: key '" + key + "' must be an array");
    Vector v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_number()) throw config_error("config: non-numeric entry in '" + key + "'");
        v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
    }
    return v;
}

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
    std::vector<std::string> unknown;
    for (const auto& [key, _] : j.items()) {
        if (allowed.find(key) == allowed.end()) unknown.push_back(key);
    }
    if (!unknown.empty()) {
        std::string msg = "config: unknown key(s) in " + where + ":";
        for (const auto& k : unknown) msg += " '" + k + "'";
        throw config_error(msg);
    }
}

json coeff_to_json(const CoeffSpec& c) {
    json j;
    switch (c.kind) {
        case CoeffSpec::Kind::Constant: j["constant"] = matrix_to_json(c.value); break;
        case CoeffSpec::Kind::Named: j["named"] = c.name; break;
        case CoeffSpec::Kind::Gram: j["gram"] = matrix_to_json(c.value); break;
    }
    return j;
}

CoeffSpec coeff_from_json(const json& j, const std::string& key, bool allow_gram = false) {
    if (!j.is_object()) {
        throw config_error("config: coefficient '" + key + "' must be an object");
    }
    check_keys(j, {"constant", "named", "gram"}, "coefficient '" + key + "'");
    CoeffSpec c;
    if (j.contains("constant")) {
        c.kind = CoeffSpec::Kind::Constant;
        c.value = matrix_from_json(j["constant"], key);
    } else if (j.contains("named")) {
        c.kind = CoeffSpec::Kind::Named;
        c.name = j["named"].get<std::string>();
        if (named_registry().find(c.name) == named_registry().end()) {
            throw config_error("config: unknown named coefficient '" + c.name + "' for '" + key + "'");
        }
    } else if (j.contains("gram")) {
        if (!allow_gram) throw config_error("config: 'gram' only applies to key 'D'");
        c.kind = CoeffSpec::Kind::Gram;
        c.value = matrix_from_json(j["gram"], key);
    } else {
        throw config_error("config: coefficient '" + key + "' needs 'constant', 'named' or 'gram'");
    }
    return c;
}

CoefficientFn build_coefficient(const CoeffSpec& spec, const std::string& key) {
    switch (spec.kind) {
        case CoeffSpec::Kind::Constant: return CoefficientFn::constant(spec.value);
        case CoeffSpec::Kind::Named: {
            const auto& named = named_registry().at(spec.name);
            return CoefficientFn::named(spec.name, named.fn);
        }
        default: throw config_error("config: coefficient '" + key + "' cannot be a gram matrix");
    }
}

}  // namespace

LqcModel build_model(const ModelSpec& spec) {
    LqcModel m;
    m.state_dim = spec.state_dim;
    m.action_dim = spec.action_dim;
    m.noise_channels = spec.noise_channels;
    m.horizon = spec.horizon;
    m.rho = spec.rho;
    m.A = build_coefficient(spec.A, "A");
    m.B = build_coefficient(spec.B, "B");
    m.Q = build_coefficient(spec.Q, "Q");
    m.S = build_coefficient(spec.S, "S");
    m.R = build_coefficient(spec.R, "R");
    m.Vbar = build_coefficient(spec.Vbar, "Vbar");
    for (std::size_t j = 0; j < spec.C.size(); ++j) m.C.push_back(build_coefficient(spec.C[j], "C"));
    if (spec.D.kind == CoeffSpec::Kind::Gram) {
        // Channels are the rows of the symmetric PSD root; any factor with
        // the same Gram matrix yields the same law.
        const Matrix root = psd_sqrt(spec.D.value);
        if (root.rows() != spec.noise_channels) {
            throw config_error("config: D gram matrix size must equal noise_channels");
        }
        for (int j = 0; j < spec.noise_channels; ++j) {
            m.D.push_back(CoefficientFn::constant(root.row(j)));
        }
    } else {
        for (std::size_t j = 0; j < spec.D_channels.size(); ++j) {
            m.D.push_back(build_coefficient(spec.D_channels[j], "D"));
        }
    }
    m.G = spec.G;
    m.Sigma0 = spec.Sigma0;
    if (spec.xi0_mean.size() > 0) {
        m.xi0_mean = spec.xi0_mean;
        m.xi0_cov = spec.xi0_cov;
    }
    return m;
}

RunSpec preset_spec(const std::string& name) {
    if (name != "mean-variance") throw config_error("unknown preset '" + name + "'");
    RunSpec spec;
    spec.preset = name;
    ModelSpec& m = spec.model;
    m.state_dim = 1;
    m.action_dim = 3;
    m.noise_channels = 3;
    m.horizon = 1.0;
    m.rho = 0.01;
    m.A = {CoeffSpec::Kind::Constant, Matrix::Zero(1, 1), ""};
    m.B = {CoeffSpec::Kind::Named, Matrix(), "mean_variance_sinusoidal_B"};
    m.C.assign(3, {CoeffSpec::Kind::Constant, Matrix::Zero(1, 1), ""});
    Matrix gram(3, 3);
    gram << 0.5, 0.25, -0.125, 0.25, 1.0, -0.25, -0.125, -0.25, 0.5;
    m.D = {CoeffSpec::Kind::Gram, gram, ""};
    m.Q = {CoeffSpec::Kind::Constant, Matrix::Zero(1, 1), ""};
    m.S = {CoeffSpec::Kind::Constant, Matrix::Zero(3, 1), ""};
    m.R = {CoeffSpec::Kind::Constant, Matrix::Zero(3, 3), ""};
    // Terminal weight mu = 0.5 and the effective entropy reference
    // Vbar = 0.05 I, which reproduces the published Riccati reference value
    // of the mean-variance benchmark.
    m.G = Matrix::Constant(1, 1, 0.5);
    m.Vbar = {CoeffSpec::Kind::Constant, 0.05 * Matrix::Identity(3, 3), ""};
    m.Sigma0 = Matrix::Constant(1, 1, 0.26);
    m.xi0_mean = Vector::Constant(1, 0.5);
    m.xi0_cov = Matrix::Constant(1, 1, 0.01);

    spec.theta0_K = Matrix::Constant(3, 1, 1.0 / 3.0);
    spec.theta0_V = 0.1 * gram;
    return spec;
}

Policy initial_policy(const RunSpec& spec, int grid_intervals) {
    const TimeGrid grid = TimeGrid::uniform(spec.model.horizon, grid_intervals);
    return Policy::constant(grid, spec.theta0_K, spec.theta0_V);
}

namespace {

ModelSpec model_spec_from_json(const json& j) {
    check_keys(j,
               {"state_dim", "action_dim", "noise_channels", "horizon", "rho", "A", "B", "C", "D", "Q",
                "S", "R", "G", "Vbar", "Sigma0", "xi0_mean", "xi0_cov"},
               "'model'");
    for (const char* req : {"state_dim", "action_dim", "noise_channels", "horizon", "rho", "B", "D", "G",
                            "Vbar", "Sigma0"}) {
        if (!j.contains(req)) throw config_error(std::string("config: 'model' missing key '") + req + "'");
    }
    ModelSpec m;
    m.state_dim = j["state_dim"].get<int>();
    m.action_dim = j["action_dim"].get<int>();
    m.noise_channels = j["noise_channels"].get<int>();
    m.horizon = j["horizon"].get<double>();
    m.rho = j["rho"].get<double>();
    const Matrix zero_dd = Matrix::Zero(m.state_dim, m.state_dim);
    const Matrix zero_kd = Matrix::Zero(m.action_dim, m.state_dim);
    const Matrix zero_kk = Matrix::Zero(m.action_dim, m.action_dim);
    m.A = j.contains("A") ? coeff_from_json(j["A"], "A") : CoeffSpec{CoeffSpec::Kind::Constant, zero_dd, ""};
    m.B = coeff_from_json(j["B"], "B");
    m.Q = j.contains("Q") ? coeff_from_json(j["Q"], "Q") : CoeffSpec{CoeffSpec::Kind::Constant, zero_dd, ""};
    m.S = j.contains("S") ? coeff_from_json(j["S"], "S") : CoeffSpec{CoeffSpec::Kind::Constant, zero_kd, ""};
    m.R = j.contains("R") ? coeff_from_json(j["R"], "R") : CoeffSpec{CoeffSpec::Kind::Constant, zero_kk, ""};
    m.Vbar = coeff_from_json(j["Vbar"], "Vbar");
    if (j.contains("C")) {
        if (!j["C"].is_array()) throw config_error("config: 'C' must be an array of coefficients");
        for (const auto& cj : j["C"]) m.C.push_back(coeff_from_json(cj, "C"));
    } else {
        m.C.assign(static_cast<std::size_t>(m.noise_channels),
                   CoeffSpec{CoeffSpec::Kind::Constant, zero_dd, ""});
    }
    if (j["D"].is_array()) {
        for (const auto& dj : j["D"]) m.D_channels.push_back(coeff_from_json(dj, "D"));
        m.D.kind = CoeffSpec::Kind::Constant;  // marker: channels given explicitly
        m.D.value = Matrix();
    } else {
        m.D = coeff_from_json(j["D"], "D", /*allow_gram=*/true);
        if (m.D.kind != CoeffSpec::Kind::Gram) m.D_channels.push_back(m.D);
    }
    m.G = matrix_from_json(j["G"], "G");
    m.Sigma0 = matrix_from_json(j["Sigma0"], "Sigma0");
    if (j.contains("xi0_mean")) m.xi0_mean = vector_from_json(j["xi0_mean"], "xi0_mean");
    if (j.contains("xi0_cov")) m.xi0_cov = matrix_from_json(j["xi0_cov"], "xi0_cov");
    return m;
}

json model_spec_to_json(const ModelSpec& m) {
    json j;
    j["state_dim"] = m.state_dim;
    j["action_dim"] = m.action_dim;
    j["noise_channels"] = m.noise_channels;
    j["horizon"] = m.horizon;
    j["rho"] = m.rho;
    j["A"] = coeff_to_json(m.A);
    j["B"] = coeff_to_json(m.B);
    json c = json::array();
    for (const auto& cj : m.C) c.push_back(coeff_to_json(cj));
    j["C"] = std::move(c);
    if (m.D.kind == CoeffSpec::Kind::Gram) {
        j["D"] = coeff_to_json(m.D);
    } else {
        json dch = json::array();
        for (const auto& dj : m.D_channels) dch.push_back(coeff_to_json(dj));
        j["D"] = std::move(dch);
    }
    j["Q"] = coeff_to_json(m.Q);
    j["S"] = coeff_to_json(m.S);
    j["R"] = coeff_to_json(m.R);
    j["Vbar"] = coeff_to_json(m.Vbar);
    j["G"] = matrix_to_json(m.G);
    j["Sigma0"] = matrix_to_json(m.Sigma0);
    if (m.xi0_mean.size() > 0) {
        json mean = json::array();
        for (Eigen::Index i = 0; i < m.xi0_mean.size(); ++i) mean.push_back(m.xi0_mean[i]);
        j["xi0_mean"] = std::move(mean);
        j["xi0_cov"] = matrix_to_json(m.xi0_cov);
    }
    return j;
}

json spec_to_json(const RunSpec& spec) {
    json j;
    if (!spec.preset.empty()) j["preset"] = spec.preset;
    j["model"] = model_spec_to_json(spec.model);
    j["theta0"] = {{"K", matrix_to_json(spec.theta0_K)}, {"V", matrix_to_json(spec.theta0_V)}};
    j["grid"] = spec.grid;
    j["epsilon"] = spec.epsilon;
    j["tau_scaled"] = spec.tau_scaled;
    j["tau_unscaled"] = spec.tau_unscaled;
    j["pg_iterations"] = spec.pg_iterations;
    j["pg_iterations_unscaled"] = spec.pg_iterations_unscaled;
    j["mesh_family"] = spec.mesh_family;
    j["mc"] = {{"paths", spec.mc_paths}, {"grid", spec.mc_grid}, {"seed", spec.seed}};
    j["model_free"] = {{"grid", spec.model_free_grid},
                       {"iterations", spec.model_free_iterations},
                       {"fd_step", spec.model_free_fd_step}};
    j["repetitions"] = spec.repetitions;
    j["mode"] = spec.mode;
    return j;
}

RunSpec spec_from_json(const json& j) {
    check_keys(j,
               {"preset", "model", "theta0", "grid", "epsilon", "tau_scaled", "tau_unscaled",
                "pg_iterations", "pg_iterations_unscaled", "mesh_family", "mc", "model_free",
                "repetitions", "mode"},
               "config");
    RunSpec spec;
    if (j.contains("preset")) {
        spec = preset_spec(j["preset"].get<std::string>());
    } else if (!j.contains("model") || !j.contains("theta0")) {
        throw config_error("config: need either 'preset' or both 'model' and 'theta0'");
    }
    if (j.contains("model")) spec.model = model_spec_from_json(j["model"]);
    if (j.contains("theta0")) {
        check_keys(j["theta0"], {"K", "V"}, "'theta0'");
        spec.theta0_K = matrix_from_json(j["theta0"].at("K"), "theta0.K");
        spec.theta0_V = matrix_from_json(j["theta0"].at("V"), "theta0.V");
    }
    if (j.contains("grid")) spec.grid = j["grid"].get<int>();
    if (j.contains("epsilon")) spec.epsilon = j["epsilon"].get<double>();
    if (j.contains("tau_scaled")) spec.tau_scaled = j["tau_scaled"].get<double>();
    if (j.contains("tau_unscaled")) spec.tau_unscaled = j["tau_unscaled"].get<double>();
    if (j.contains("pg_iterations")) spec.pg_iterations = j["pg_iterations"].get<int>();
    if (j.contains("pg_iterations_unscaled")) {
        spec.pg_iterations_unscaled = j["pg_iterations_unscaled"].get<int>();
    }
    if (j.contains("mesh_family")) spec.mesh_family = j["mesh_family"].get<std::vector<int>>();
    if (j.contains("mc")) {
        check_keys(j["mc"], {"paths", "grid", "seed"}, "'mc'");
        if (j["mc"].contains("paths")) spec.mc_paths = j["mc"]["paths"].get<int>();
        if (j["mc"].contains("grid")) spec.mc_grid = j["mc"]["grid"].get<int>();
        if (j["mc"].contains("seed")) spec.seed = j["mc"]["seed"].get<std::uint64_t>();
    }
    if (j.contains("model_free")) {
        check_keys(j["model_free"], {"grid", "iterations", "fd_step"}, "'model_free'");
        if (j["model_free"].contains("grid")) spec.model_free_grid = j["model_free"]["grid"].get<int>();
        if (j["model_free"].contains("iterations")) {
            spec.model_free_iterations = j["model_free"]["iterations"].get<int>();
        }
        if (j["model_free"].contains("fd_step")) {
            spec.model_free_fd_step = j["model_free"]["fd_step"].get<double>();
        }
    }
    if (j.contains("repetitions")) spec.repetitions = j["repetitions"].get<int>();
    if (j.contains("mode")) {
        spec.mode = j["mode"].get<std::string>();
        if (spec.mode != "model-based" && spec.mode != "model-free") {
            throw config_error("config: mode must be 'model-based' or 'model-free'");
        }
    }
    return spec;
}

}  // namespace

RunSpec load_config(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw config_error("config: cannot open " + path);
    json j;
    try {
        is >> j;
    } catch (const json::exception& e) {
        throw config_error("config: parse error in " + path + ": " + e.what());
    }
    return spec_from_json(j);
}

std::string emit_config(const RunSpec& spec) { return spec_to_json(spec).dump(2) + "\n"; }

std::uint64_t config_hash(const RunSpec& spec) {
    // FNV-1a over the canonical emission.
    const std::string s = emit_config(spec);
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

ReportBundle run_benchmark(const RunSpec& spec, bool dry_run) {
    ReportBundle bundle;
    bundle.spec = spec;
    bundle.dry_run = dry_run;
    if (dry_run) return bundle;

    const LqcModel model = build_model(spec.model);
    {
        const TimeGrid grid = TimeGrid::uniform(model.horizon, spec.grid);
        const ValidationReport report = validate_model(model, grid);
        if (!report.ok) {
            std::string msg = "run_benchmark: model violates standing assumptions:";
            for (const auto& v : report.violations) msg += " " + v + ";";
            throw config_error(msg);
        }
    }

    const TimeGrid run_grid = TimeGrid::uniform(model.horizon, spec.grid);
    const RiccatiSolution ric = solve_riccati(model, run_grid, SolveOptions{1, OdeScheme::Euler});
    bundle.c_star = optimal_cost(model, ric);

    if (spec.mode == "model-based") {
        PgConfig cfg;
        cfg.tau = spec.tau_scaled;
        cfg.max_iterations = spec.pg_iterations;
        cfg.variant = PgVariant::Continuous;
        cfg.stop_epsilon = 1e-10;
        cfg.refine = 1;
        const RunRecord rec = run_continuous_pg(model, initial_policy(spec, spec.grid), cfg, ric);
        std::vector<double> trace;
        for (const auto& it : rec.iterations) trace.push_back(it.cost - bundle.c_star);
        bundle.suboptimality.push_back(std::move(trace));
        bundle.seeds_used.push_back(spec.seed);
    } else {
        for (int rep = 0; rep < spec.repetitions; ++rep) {
            SimConfig sim;
            sim.num_paths = spec.mc_paths;
            sim.sim_grid = TimeGrid::uniform(model.horizon, spec.mc_grid);
            sim.randomisation_grid = sim.sim_grid;
            sim.seed = spec.seed + 1000003ull * static_cast<std::uint64_t>(rep);
            PgConfig cfg;
            cfg.tau = spec.tau_scaled;
            cfg.max_iterations = spec.model_free_iterations;
            cfg.stop_epsilon = 1e-10;
            const Policy theta0 = initial_policy(spec, spec.model_free_grid);
            const RunRecord rec =
                run_model_free_pg(model, theta0, cfg, sim, spec.model_free_fd_step, bundle.c_star);
            std::vector<double> trace;
            for (const auto& it : rec.iterations) trace.push_back(it.cost - bundle.c_star);
            bundle.suboptimality.push_back(std::move(trace));
            bundle.seeds_used.push_back(sim.seed);
        }
    }

    MeshSweepConfig mcfg;
    mcfg.mesh_family = spec.mesh_family;
    mcfg.eval_grid = spec.grid;
    mcfg.epsilon = spec.epsilon;
    mcfg.scaled.tau = spec.tau_scaled;
    mcfg.scaled.max_iterations = spec.pg_iterations;
    mcfg.scaled.diagnostics_on = false;
    mcfg.unscaled.tau = spec.tau_unscaled;
    mcfg.unscaled.max_iterations = spec.pg_iterations_unscaled;
    mcfg.unscaled.diagnostics_on = false;
    mcfg.c_pi_iterations = spec.pg_iterations;
    bundle.sweep = mesh_sweep(model, initial_policy(spec, spec.mesh_family.front()), mcfg);
    return bundle;
}

namespace {

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

void write_convergence_csv(const ReportBundle& bundle, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw config_error("emit_report: cannot open " + path);
    os << "iter";
    for (std::size_t r = 0; r < bundle.suboptimality.size(); ++r) os << ",subopt_rep" << r;
    os << ",subopt_mean,subopt_min,subopt_max\n";
    std::size_t max_len = 0;
    for (const auto& t : bundle.suboptimality) max_len = std::max(max_len, t.size());
    for (std::size_t i = 0; i < max_len; ++i) {
        os << i;
        double mean = 0.0, lo = 0.0, hi = 0.0;
        int count = 0;
        for (const auto& t : bundle.suboptimality) {
            os << ',';
            if (i < t.size()) {
                os << format_double(t[i]);
                mean += t[i];
                lo = count == 0 ? t[i] : std::min(lo, t[i]);
                hi = count == 0 ? t[i] : std::max(hi, t[i]);
                ++count;
            }
        }
        mean /= std::max(count, 1);
        os << ',' << format_double(mean) << ',' << format_double(lo) << ',' << format_double(hi) << "\n";
    }
}

// Minimal polyline SVG with a log-scale y axis.
void write_convergence_svg(const ReportBundle& bundle, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw config_error("emit_report: cannot open " + path);
    const double width = 640, height = 420, ml = 70, mr = 20, mt = 20, mb = 50;
    std::size_t max_len = 1;
    double lo = 1e300, hi = -1e300;
    for (const auto& t : bundle.suboptimality) {
        max_len = std::max(max_len, t.size());
        for (double v : t) {
            if (v > 0) {
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
        }
    }
    if (hi < lo) {
        lo = 1e-8;
        hi = 1.0;
    }
    const double llo = std::floor(std::log10(lo)), lhi = std::ceil(std::log10(hi));
    auto xpos = [&](double i) { return ml + (width - ml - mr) * i / std::max<double>(1.0, static_cast<double>(max_len - 1)); };
    auto ypos = [&](double v) {
        const double l = std::log10(std::max(v, 1e-300));
        return mt + (height - mt - mb) * (lhi - l) / std::max(1.0, lhi - llo);
    };
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
       << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\"" << height - mb
       << "\" stroke=\"black\"/>\n";
    os << "<line x1=\"" << ml << "\" y1=\"" << height - mb << "\" x2=\"" << width - mr << "\" y2=\""
       << height - mb << "\" stroke=\"black\"/>\n";
    for (double l = llo; l <= lhi; l += 1.0) {
        const double y = ypos(std::pow(10.0, l));
        os << "<text x=\"" << ml - 8 << "\" y=\"" << y + 4
           << "\" font-size=\"11\" text-anchor=\"end\">1e" << static_cast<int>(l) << "</text>\n";
        os << "<line x1=\"" << ml - 4 << "\" y1=\"" << y << "\" x2=\"" << ml << "\" y2=\"" << y
           << "\" stroke=\"black\"/>\n";
    }
    os << "<text x=\"" << (ml + width - mr) / 2 << "\" y=\"" << height - 14
       << "\" font-size=\"12\" text-anchor=\"middle\">iteration</text>\n";
    os << "<text x=\"16\" y=\"" << (mt + height - mb) / 2
       << "\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
       << (mt + height - mb) / 2 << ")\">suboptimality</text>\n";
    // min/max band over repetitions, then the mean line
    if (bundle.suboptimality.size() > 1) {
        std::ostringstream pts;
        for (std::size_t i = 0; i < max_len; ++i) {
            double hi_i = -1e300;
            for (const auto& t : bundle.suboptimality)
                if (i < t.size()) hi_i = std::max(hi_i, t[i]);
            pts << xpos(static_cast<double>(i)) << ',' << ypos(hi_i) << ' ';
        }
        for (std::size_t ri = max_len; ri-- > 0;) {
            double lo_i = 1e300;
            for (const auto& t : bundle.suboptimality)
                if (ri < t.size()) lo_i = std::min(lo_i, t[ri]);
            pts << xpos(static_cast<double>(ri)) << ',' << ypos(lo_i) << ' ';
        }
        os << "<polygon points=\"" << pts.str() << "\" fill=\"#9ecae1\" stroke=\"none\"/>\n";
    }
    std::ostringstream mean_pts;
    for (std::size_t i = 0; i < max_len; ++i) {
        double mean = 0.0;
        int count = 0;
        for (const auto& t : bundle.suboptimality) {
            if (i < t.size()) {
                mean += t[i];
                ++count;
            }
        }
        mean /= std::max(count, 1);
        mean_pts << xpos(static_cast<double>(i)) << ',' << ypos(mean) << ' ';
    }
    os << "<polyline points=\"" << mean_pts.str() << "\" fill=\"none\" stroke=\"#08519c\" stroke-width=\"1.5\"/>\n";
    os << "</svg>\n";
}

void write_mesh_svg(const ReportBundle& bundle, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw config_error("emit_report: cannot open " + path);
    const double width = 640, height = 420, ml = 70, mr = 20, mt = 20, mb = 50;
    int max_n = 1;
    for (const auto& row : bundle.sweep) {
        max_n = std::max({max_n, row.n_scaled, row.n_unscaled});
    }
    const std::size_t m = bundle.sweep.size();
    auto xpos = [&](std::size_t i) {
        return ml + (width - ml - mr) * (static_cast<double>(i) + 0.5) / std::max<std::size_t>(m, 1);
    };
    auto ypos = [&](double v) { return mt + (height - mt - mb) * (1.0 - v / max_n); };
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
       << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\"" << height - mb
       << "\" stroke=\"black\"/>\n";
    os << "<line x1=\"" << ml << "\" y1=\"" << height - mb << "\" x2=\"" << width - mr << "\" y2=\""
       << height - mb << "\" stroke=\"black\"/>\n";
    auto series = [&](auto get, const char* color) {
        std::ostringstream pts;
        for (std::size_t i = 0; i < m; ++i) pts << xpos(i) << ',' << ypos(get(bundle.sweep[i])) << ' ';
        os << "<polyline points=\"" << pts.str() << "\" fill=\"none\" stroke=\"" << color
           << "\" stroke-width=\"1.5\"/>\n";
        for (std::size_t i = 0; i < m; ++i) {
            os << "<circle cx=\"" << xpos(i) << "\" cy=\"" << ypos(get(bundle.sweep[i]))
               << "\" r=\"3\" fill=\"" << color << "\"/>\n";
        }
    };
    series([](const MeshSweepRow& r) { return static_cast<double>(r.n_scaled); }, "#08519c");
    series([](const MeshSweepRow& r) { return static_cast<double>(r.n_unscaled); }, "#a63603");
    for (std::size_t i = 0; i < m; ++i) {
        os << "<text x=\"" << xpos(i) << "\" y=\"" << height - mb + 16
           << "\" font-size=\"11\" text-anchor=\"middle\">" << bundle.sweep[i].mesh_intervals
           << "</text>\n";
    }
    os << "<text x=\"" << (ml + width - mr) / 2 << "\" y=\"" << height - 14
       << "\" font-size=\"12\" text-anchor=\"middle\">action mesh intervals</text>\n";
    os << "<text x=\"16\" y=\"" << (mt + height - mb) / 2
       << "\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
       << (mt + height - mb) / 2 << ")\">iterations to epsilon</text>\n";
    os << "<text x=\"" << width - mr - 8 << "\" y=\"" << mt + 14
       << "\" font-size=\"12\" text-anchor=\"end\" fill=\"#08519c\">scaled</text>\n";
    os << "<text x=\"" << width - mr - 8 << "\" y=\"" << mt + 30
       << "\" font-size=\"12\" text-anchor=\"end\" fill=\"#a63603\">unscaled</text>\n";
    os << "</svg>\n";
}

}  // namespace

std::vector<std::string> emit_report(const ReportBundle& bundle, const std::string& out_dir,
                                     ReportFormat format) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw config_error("emit_report: cannot create directory " + out_dir);

    std::vector<std::string> files;
    const bool csv = format != ReportFormat::Svg;
    const bool svg = format != ReportFormat::Csv;

    if (!bundle.dry_run) {
        if (csv) {
            write_convergence_csv(bundle, out_dir + "/convergence.csv");
            files.push_back("convergence.csv");
            write_mesh_sweep_csv(bundle.sweep, out_dir + "/sweep.csv");
            files.push_back("sweep.csv");
        }
        if (svg) {
            write_convergence_svg(bundle, out_dir + "/convergence.svg");
            files.push_back("convergence.svg");
            write_mesh_svg(bundle, out_dir + "/mesh.svg");
            files.push_back("mesh.svg");
        }
    }

    json manifest;
    manifest["config"] = json::parse(emit_config(bundle.spec));
    {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%016llx",
                      static_cast<unsigned long long>(config_hash(bundle.spec)));
        manifest["config_hash"] = buf;
    }
    manifest["dry_run"] = bundle.dry_run;
    manifest["files"] = files;
    if (!bundle.dry_run) {
        manifest["c_star"] = bundle.c_star;
        manifest["seeds"] = bundle.seeds_used;
        // The figure's shaded spread is reported as the min/max range over
        // repetitions; the source does not pin down range vs. std band.
        manifest["spread_definition"] = "min-max range over repetitions";
    }
    std::ofstream os(out_dir + "/manifest.json");
    if (!os) throw config_error("emit_report: cannot open manifest.json");
    os << manifest.dump(2) << "\n";
    files.push_back("manifest.json");
    return files;
}

}  // namespace lqcpg
