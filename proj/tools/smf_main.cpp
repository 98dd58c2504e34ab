// smf: set-membership fusion scenario runner.
//
// Subcommands:
//   simulate    run the configured scenario and write bounds/containment/summary
//   validate    run the oracle-equivalence suite
//   bound-probe dump the remainder bounds of one step for inspection

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "smfusion/scenario.hpp"
#include "smfusion/validation.hpp"
#include "smfusion/version.hpp"

namespace {

using nlohmann::json;

smf::Vec to_vec(const json& j) {
    smf::Vec v(j.size());
    for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
    return v;
}

smf::Mat to_mat(const json& j) {
    const std::size_t rows = j.size();
    const std::size_t cols = rows ? j[0].size() : 0;
    smf::Mat m(rows, cols);
    for (std::size_t r = 0; r < rows; ++r) {
        if (j[r].size() != cols) throw smf::InvalidParameter("config: ragged matrix");
        for (std::size_t c = 0; c < cols; ++c) {
            m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = j[r][c].get<double>();
        }
    }
    return m;
}

smf::ScenarioConfig load_config(const std::string& path) {
    smf::ScenarioConfig cfg = smf::ScenarioConfig::defaults();
    if (path.empty()) return cfg;

    std::ifstream in(path);
    if (!in) throw smf::IoError("cannot open config file: " + path);
    json j;
    in >> j;

    if (j.contains("horizon")) cfg.horizon = j["horizon"].get<int>();
    if (j.contains("runs")) cfg.runs = j["runs"].get<int>();
    if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("T")) cfg.T = j["T"].get<double>();
    if (j.contains("sigma2")) cfg.sigma2 = j["sigma2"].get<double>();
    if (j.contains("sensors")) {
        cfg.sensors.clear();
        for (const auto& s : j["sensors"]) {
            cfg.sensors.emplace_back(s[0].get<double>(), s[1].get<double>());
        }
    }
    if (j.contains("x0")) cfg.x0 = to_vec(j["x0"]);
    if (j.contains("P0")) cfg.P0 = to_mat(j["P0"]);
    if (j.contains("noise")) {
        const auto& nj = j["noise"];
        if (nj.contains("kind")) {
            const std::string kind = nj["kind"].get<std::string>();
            if (kind == "truncated-gaussian") {
                cfg.noise.kind = smf::NoiseConfig::Kind::TruncatedGaussian;
            } else if (kind == "uniform-in-ellipsoid") {
                cfg.noise.kind = smf::NoiseConfig::Kind::UniformInEllipsoid;
            } else {
                throw smf::InvalidParameter("config: unknown noise kind: " + kind);
            }
        }
        if (nj.contains("covariance_scale")) {
            cfg.noise.covariance_scale = nj["covariance_scale"].get<double>();
        }
    }
    if (j.contains("methods")) {
        cfg.methods.clear();
        for (const auto& mj : j["methods"]) {
            smf::Method m;
            if (!smf::parse_method(mj.get<std::string>(), m)) {
                throw smf::InvalidParameter("config: unknown method: " + mj.get<std::string>());
            }
            cfg.methods.push_back(m);
        }
    }
    if (j.contains("objective_weights")) cfg.objective_weights = to_vec(j["objective_weights"]);
    if (j.contains("weight_bank")) {
        cfg.weight_bank.weights.clear();
        for (const auto& w : j["weight_bank"]) cfg.weight_bank.weights.push_back(to_vec(w));
    }
    if (j.contains("remainder")) {
        const auto& rj = j["remainder"];
        if (rj.contains("samples")) cfg.remainder.samples = rj["samples"].get<int>();
        if (rj.contains("inflate")) cfg.remainder.inflate = rj["inflate"].get<double>();
    }
    if (j.contains("cv_standard")) cfg.cv_standard = j["cv_standard"].get<bool>();
    if (j.contains("bearing_degrees")) cfg.bearing_degrees = j["bearing_degrees"].get<bool>();
    if (j.contains("threads")) cfg.threads = j["threads"].get<int>();
    return cfg;
}

json remainder_to_json(const smf::RemainderBound& rem) {
    json j;
    j["center"] = std::vector<double>(rem.e.data(), rem.e.data() + rem.e.size());
    std::vector<double> diag(rem.P.rows());
    std::vector<double> hw(rem.P.rows());
    for (Eigen::Index i = 0; i < rem.P.rows(); ++i) {
        diag[i] = rem.P(i, i);
        hw[i] = rem.B(i, i) / std::sqrt(static_cast<double>(rem.P.rows()));
    }
    j["shape_diagonal"] = diag;
    j["half_widths"] = hw;
    j["degenerate"] = rem.is_degenerate();
    return j;
}

int run_simulate(const std::string& config_path, std::string out_dir, long long seed,
                 int runs, int horizon, int threads) {
    smf::ScenarioConfig cfg;
    try {
        cfg = load_config(config_path);
        if (seed >= 0) cfg.seed = static_cast<std::uint64_t>(seed);
        if (runs > 0) cfg.runs = runs;
        if (horizon > 0) cfg.horizon = horizon;
        if (threads > 0) cfg.threads = threads;
        cfg.validate();
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    }

    const smf::RunResult result = smf::run_scenario(cfg);
    const auto paths = smf::emit_results(result, out_dir);
    for (const auto& p : paths) std::cout << "wrote " << p << "\n";

    for (const auto& m : result.methods) {
        std::printf("%-6s containment %.4f  infeasible steps %d\n", m.name.c_str(),
                    m.containment_rate(), m.infeasible_steps);
    }
    const double aborted_fraction =
        cfg.runs > 0 ? static_cast<double>(result.aborted.size()) / cfg.runs : 0.0;
    if (aborted_fraction > 0.01) {
        std::cerr << "aborted trials: " << result.aborted.size() << " of " << cfg.runs << "\n";
        for (const auto& d : result.aborted) {
            std::cerr << "  trial " << d.trial << ": " << d.error << "\n";
        }
        return 2;
    }
    return 0;
}

int run_validate(bool quick, long long seed) {
    smf::ValidationOptions opt =
        quick ? smf::ValidationOptions::quick() : smf::ValidationOptions();
    if (seed >= 0) opt.seed = static_cast<std::uint64_t>(seed);
    const auto results = smf::run_validation_suite(opt);
    bool all = true;
    for (const auto& r : results) {
        std::printf("[%s] %-42s %s (%.1fs)\n", r.passed ? "PASS" : "FAIL", r.name.c_str(),
                    r.detail.c_str(), r.seconds);
        all = all && r.passed;
    }
    return all ? 0 : 1;
}

int run_bound_probe(const std::string& config_path, int step) {
    smf::ScenarioConfig cfg;
    try {
        cfg = load_config(config_path);
        cfg.validate();
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    }
    const smf::ProbeResult probe = smf::probe_remainders(cfg, step);
    json j;
    j["step"] = probe.step;
    j["state_remainder"] = remainder_to_json(probe.state_remainder);
    j["measurement_remainders"] = json::array();
    for (const auto& rem : probe.measurement_remainders) {
        j["measurement_remainders"].push_back(remainder_to_json(rem));
    }
    j["prediction_center"] = std::vector<double>(
        probe.prediction_center.data(),
        probe.prediction_center.data() + probe.prediction_center.size());
    j["prediction_axis_bounds"] = std::vector<double>(
        probe.prediction_axis_bounds.data(),
        probe.prediction_axis_bounds.data() + probe.prediction_axis_bounds.size());
    std::cout << j.dump(2) << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"set-membership fusion scenario runner"};
    app.set_version_flag("--version", smf::kVersion);
    app.require_subcommand(1);

    auto* simulate = app.add_subcommand("simulate", "run the scenario");
    std::string config_path;
    std::string out_dir = "out";
    long long seed = -1;
    int runs = 0;
    int horizon = 0;
    int threads = 0;
    simulate->add_option("--config", config_path, "scenario config (JSON)");
    simulate->add_option("--out", out_dir, "output directory");
    simulate->add_option("--seed", seed, "override master seed");
    simulate->add_option("--runs", runs, "override Monte Carlo trial count");
    simulate->add_option("--horizon", horizon, "override step count");
    simulate->add_option("--threads", threads, "worker threads for trials");

    auto* validate = app.add_subcommand("validate", "run the oracle-equivalence suite");
    bool quick = false;
    long long vseed = -1;
    validate->add_flag("--quick", quick, "reduced instance counts");
    validate->add_option("--seed", vseed, "override suite seed");

    auto* probe = app.add_subcommand("bound-probe", "dump remainder bounds at one step");
    std::string probe_config;
    int probe_step = 1;
    probe->add_option("--config", probe_config, "scenario config (JSON)");
    probe->add_option("--step", probe_step, "step to inspect (1-based)")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (simulate->parsed()) {
            return run_simulate(config_path, out_dir, seed, runs, horizon, threads);
        }
        if (validate->parsed()) {
            return run_validate(quick, vseed);
        }
        if (probe->parsed()) {
            return run_bound_probe(probe_config, probe_step);
        }
    } catch (const smf::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
