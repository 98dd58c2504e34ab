#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "smfusion/scenario.hpp"
#include "smfusion/version.hpp"

namespace smf {

namespace {

std::string g17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string json_vec(const Vec& v) {
    std::ostringstream os;
    os << "[";
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (i) os << ", ";
        os << g17(v(i));
    }
    os << "]";
    return os.str();
}

std::string json_mat(const Mat& m) {
    std::ostringstream os;
    os << "[";
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        if (r) os << ", ";
        os << json_vec(m.row(r).transpose());
    }
    os << "]";
    return os.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("emit_results: cannot open " + path);
    out << content;
    if (!out) throw IoError("emit_results: write failed for " + path);
}

std::string config_json(const ScenarioConfig& cfg) {
    std::ostringstream os;
    os << "{\n";
    os << "    \"horizon\": " << cfg.horizon << ",\n";
    os << "    \"runs\": " << cfg.runs << ",\n";
    os << "    \"seed\": " << cfg.seed << ",\n";
    os << "    \"T\": " << g17(cfg.T) << ",\n";
    os << "    \"sigma2\": " << g17(cfg.sigma2) << ",\n";
    os << "    \"sensors\": [";
    for (std::size_t i = 0; i < cfg.sensors.size(); ++i) {
        if (i) os << ", ";
        os << "[" << g17(cfg.sensors[i](0)) << ", " << g17(cfg.sensors[i](1)) << "]";
    }
    os << "],\n";
    os << "    \"x0\": " << json_vec(cfg.x0) << ",\n";
    os << "    \"P0\": " << json_mat(cfg.P0) << ",\n";
    os << "    \"noise\": {\"kind\": \""
       << (cfg.noise.kind == NoiseConfig::Kind::TruncatedGaussian ? "truncated-gaussian"
                                                                  : "uniform-in-ellipsoid")
       << "\", \"covariance_scale\": " << g17(cfg.noise.covariance_scale) << "},\n";
    os << "    \"methods\": [";
    for (std::size_t i = 0; i < cfg.methods.size(); ++i) {
        if (i) os << ", ";
        os << "\"" << method_token(cfg.methods[i]) << "\"";
    }
    os << "],\n";
    os << "    \"objective_weights\": " << json_vec(cfg.objective_weights) << ",\n";
    os << "    \"weight_bank\": [";
    for (std::size_t i = 0; i < cfg.weight_bank.weights.size(); ++i) {
        if (i) os << ", ";
        os << json_vec(cfg.weight_bank.weights[i]);
    }
    os << "],\n";
    os << "    \"remainder\": {\"samples\": " << cfg.remainder.samples
       << ", \"inflate\": " << g17(cfg.remainder.inflate) << "},\n";
    os << "    \"cv_standard\": " << (cfg.cv_standard ? "true" : "false") << ",\n";
    os << "    \"bearing_degrees\": " << (cfg.bearing_degrees ? "true" : "false") << ",\n";
    os << "    \"threads\": " << cfg.threads << "\n";
    os << "  }";
    return os.str();
}

} // namespace

std::vector<std::string> emit_results(const RunResult& result, const std::string& dir) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("emit_results: cannot create directory " + dir);

    std::vector<std::string> paths;

    {
        std::ostringstream os;
        os << "method,axis,step,mean_bound,min_bound,max_bound\n";
        for (const auto& m : result.methods) {
            for (Eigen::Index axis = 0; axis < m.mean_bound.rows(); ++axis) {
                for (Eigen::Index step = 0; step < m.mean_bound.cols(); ++step) {
                    os << m.name << "," << axis << "," << (step + 1) << ","
                       << g17(m.mean_bound(axis, step)) << "," << g17(m.min_bound(axis, step))
                       << "," << g17(m.max_bound(axis, step)) << "\n";
                }
            }
        }
        const std::string path = (fs::path(dir) / "bounds.csv").string();
        write_file(path, os.str());
        paths.push_back(path);
    }

    {
        std::ostringstream os;
        os << "method,trial,step,contained\n";
        for (const auto& m : result.methods) {
            for (std::size_t trial = 0; trial < m.contained.size(); ++trial) {
                for (std::size_t step = 0; step < m.contained[trial].size(); ++step) {
                    os << m.name << "," << trial << "," << (step + 1) << ","
                       << (m.contained[trial][step] ? 1 : 0) << "\n";
                }
            }
        }
        const std::string path = (fs::path(dir) / "containment.csv").string();
        write_file(path, os.str());
        paths.push_back(path);
    }

    {
        std::ostringstream os;
        os << "{\n";
        os << "  \"library_version\": \"" << kVersion << "\",\n";
        os << "  \"wall_time_seconds\": " << g17(result.wall_time_seconds) << ",\n";
        os << "  \"aborted_trials\": " << result.aborted.size() << ",\n";
        os << "  \"config\": " << config_json(result.config) << ",\n";
        os << "  \"methods\": {";
        for (std::size_t i = 0; i < result.methods.size(); ++i) {
            const auto& m = result.methods[i];
            if (i) os << ",";
            os << "\n    \"" << m.name << "\": {";
            os << "\"containment_rate\": " << g17(m.containment_rate()) << ", ";
            os << "\"infeasible_steps\": " << m.infeasible_steps << ", ";
            Vec per_axis = m.mean_bound.rowwise().mean();
            os << "\"mean_bound_per_axis\": " << json_vec(per_axis) << ", ";
            os << "\"mean_tau_u\": " << json_vec(m.mean_tau_u) << "}";
        }
        os << "\n  }\n";
        os << "}\n";
        const std::string path = (fs::path(dir) / "summary.json").string();
        write_file(path, os.str());
        paths.push_back(path);
    }

    return paths;
}

} // namespace smf
