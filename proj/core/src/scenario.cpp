#include "smfusion/scenario.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <future>
#include <limits>
#include <optional>
#include <utility>

#include "smfusion/prediction.hpp"

namespace smf {

namespace {

constexpr std::uint64_t kNoiseSalt = 0x6e6f697365ULL;

Vec uniform_weights(Eigen::Index n) {
    return Vec::Constant(n, 1.0 / static_cast<double>(n));
}

} // namespace

std::string method_token(Method m) {
    switch (m) {
        case Method::SmfPerSensor: return "smf-per-sensor";
        case Method::Csmf: return "csmf";
        case Method::Dsmf: return "dsmf";
        case Method::Msmf: return "msmf";
    }
    return "?";
}

bool parse_method(const std::string& s, Method& out) {
    if (s == "smf-per-sensor") out = Method::SmfPerSensor;
    else if (s == "csmf") out = Method::Csmf;
    else if (s == "dsmf") out = Method::Dsmf;
    else if (s == "msmf") out = Method::Msmf;
    else return false;
    return true;
}

ScenarioConfig ScenarioConfig::defaults() {
    ScenarioConfig cfg;
    cfg.sensors = {Eigen::Vector2d(525.0, 525.0), Eigen::Vector2d(524.0, 524.0)};
    cfg.x0 = Vec(4);
    cfg.x0 << 120.0, 120.0, 6.0, 6.0;
    cfg.P0 = Mat::Zero(4, 4);
    cfg.P0.diagonal() << 100.0, 100.0, 30.0, 30.0;
    cfg.methods = {Method::SmfPerSensor, Method::Csmf, Method::Dsmf, Method::Msmf};
    const double big = 19.0 / 25.0;
    const double small = 2.0 / 25.0;
    for (int axis = 0; axis < 4; ++axis) {
        Vec w = Vec::Constant(4, small);
        w(axis) = big;
        cfg.weight_bank.weights.push_back(w);
    }
    return cfg;
}

void ScenarioConfig::validate() const {
    if (horizon < 1) throw InvalidParameter("config: horizon must be >= 1");
    if (runs < 1) throw InvalidParameter("config: runs must be >= 1");
    if (T <= 0.0) throw InvalidParameter("config: T must be positive");
    if (sigma2 <= 0.0) throw InvalidParameter("config: sigma2 must be positive");
    if (sensors.empty()) throw InvalidParameter("config: need at least one sensor");
    if (x0.size() != 4) throw InvalidParameter("config: x0 must have 4 entries");
    if (P0.rows() != 4 || P0.cols() != 4) throw InvalidParameter("config: P0 must be 4x4");
    if (noise.covariance_scale <= 0.0 || noise.covariance_scale > 1.0) {
        throw InvalidParameter("config: covariance scale must be in (0, 1]");
    }
    if (remainder.samples < 100) throw InvalidParameter("config: remainder samples must be >= 100");
    if (remainder.inflate < 1.0) throw InvalidParameter("config: remainder inflate must be >= 1");
    if (threads < 1) throw InvalidParameter("config: threads must be >= 1");
    if (objective_weights.size() != 0 && objective_weights.size() != 4) {
        throw InvalidParameter("config: objective weights must have 4 entries");
    }
    for (Method m : methods) {
        if (m == Method::Msmf) weight_bank.validate();
    }
}

SizeObjective ScenarioConfig::objective() const {
    if (objective_weights.size() == 0) {
        return SizeObjective::weighted_diag(uniform_weights(4));
    }
    return SizeObjective::weighted_diag(objective_weights);
}

SystemModel ScenarioConfig::make_model() const {
    return tracking_model(T, sigma2, sensors, cv_standard, bearing_degrees);
}

double MethodSeries::containment_rate() const {
    std::size_t total = 0;
    std::size_t hit = 0;
    for (const auto& row : contained) {
        for (char c : row) {
            ++total;
            if (c) ++hit;
        }
    }
    return total == 0 ? 1.0 : static_cast<double>(hit) / static_cast<double>(total);
}

const MethodSeries* RunResult::find(const std::string& name) const {
    for (const auto& m : methods) {
        if (m.name == name) return &m;
    }
    return nullptr;
}

Vec sample_truncated_gaussian(const Mat& shape, double scale, Rng& rng) {
    if (scale <= 0.0) throw InvalidParameter("sample_truncated_gaussian: scale must be positive");
    const Mat factor = cholesky_factor(shape);
    const double sqrt_scale = std::sqrt(scale);
    for (int attempt = 0; attempt < 1000000; ++attempt) {
        const Vec z = rng.normal_vector(shape.rows());
        if (scale * z.squaredNorm() <= 1.0) {
            return sqrt_scale * (factor * z);
        }
    }
    throw RejectionBudgetExceeded("sample_truncated_gaussian: rejection budget exceeded");
}

Vec sample_uniform_ellipsoid(const Mat& shape, Rng& rng) {
    const Mat factor = cholesky_factor(shape);
    return factor * rng.unit_ball(shape.rows());
}

std::uint64_t trial_seed(const ScenarioConfig& cfg, int trial) {
    return mix_seed(cfg.seed, static_cast<std::uint64_t>(trial));
}

std::uint64_t remainder_seed(std::uint64_t trial_seed, int step, int pipeline_id, int role) {
    const std::uint64_t packed = static_cast<std::uint64_t>(step) * 1000000ULL +
                                 static_cast<std::uint64_t>(pipeline_id) * 1000ULL +
                                 static_cast<std::uint64_t>(role);
    return mix_seed(trial_seed, packed);
}

TrialData simulate_trial_data(const ScenarioConfig& cfg, const SystemModel& model,
                              std::uint64_t trial_seed) {
    TrialData data;
    Rng rng(mix_seed(trial_seed, kNoiseSalt));
    data.truth.push_back(cfg.x0);
    data.measurements.resize(cfg.horizon);

    auto draw = [&](const Mat& shape) -> Vec {
        if (cfg.noise.kind == NoiseConfig::Kind::TruncatedGaussian) {
            return sample_truncated_gaussian(shape, cfg.noise.covariance_scale, rng);
        }
        return sample_uniform_ellipsoid(shape, rng);
    };

    for (int k = 1; k <= cfg.horizon; ++k) {
        const Vec w = draw(model.Q);
        data.truth.push_back(model.f(data.truth.back()) + w);
        data.measurements[k - 1].resize(model.sensor_count);
        for (int i = 0; i < model.sensor_count; ++i) {
            const Vec v = draw(model.R[i]);
            // Measurements are kept as raw real numbers (no modular
            // reduction), matching the simulated sensor equation exactly.
            data.measurements[k - 1][i] = model.h[i](data.truth.back()) + v;
        }
    }
    return data;
}

namespace {

SystemModel single_sensor_view(const SystemModel& model, int sensor) {
    SystemModel view = model;
    view.sensor_count = 1;
    view.h = {model.h[sensor]};
    view.jac_h = {model.jac_h[sensor]};
    view.R = {model.R[sensor]};
    return view;
}

struct StepStats {
    double tau_u = 0.0;
    bool feasible = true;
};

// One Algorithm-1 pipeline (prediction + centralized update); locals are
// the same machinery with a single-sensor model view.
struct CentralPipeline {
    const SystemModel* model = nullptr;
    std::vector<int> sensors;  // indices into the trial's measurement rows
    SizeObjective obj = SizeObjective::trace();
    int id = 0;
    Ellipsoid est;

    CentralPipeline(const SystemModel* model_, std::vector<int> sensors_, SizeObjective obj_,
                    int id_, Ellipsoid est_)
        : model(model_), sensors(std::move(sensors_)), obj(std::move(obj_)), id(id_),
          est(std::move(est_)) {}

    StepStats step(const ScenarioConfig& cfg, std::uint64_t tseed, int k,
                   const std::vector<Vec>& all_measurements) {
        const auto& m = *model;
        auto wrap = [&m](Vec d) { return m.canonical_measurement_diff(std::move(d)); };

        const RemainderBound rem_f = bound_remainder(
            m.f, est.center(), est.factor(), m.jac_f(est.center()), cfg.remainder.samples,
            remainder_seed(tseed, k, id, 0), cfg.remainder.inflate);
        const PredictResult pred = predict(est, m, rem_f, obj);

        std::vector<Vec> ys;
        std::vector<RemainderBound> rems;
        for (std::size_t j = 0; j < sensors.size(); ++j) {
            ys.push_back(all_measurements[sensors[j]]);
            rems.push_back(bound_remainder(
                m.h[j], pred.ellipsoid.center(), pred.ellipsoid.factor(),
                m.jac_h[j](pred.ellipsoid.center()), cfg.remainder.samples,
                remainder_seed(tseed, k, id, 1 + static_cast<int>(j)), cfg.remainder.inflate,
                wrap));
        }
        FusionResult fused = fuse_update(pred.ellipsoid, m, ys, rems, obj);
        est = fused.ellipsoid;
        return StepStats{fused.tau.tau_u, fused.feasible};
    }
};

struct MethodAccumulator {
    std::string name;
    Mat sum_bound, min_bound, max_bound;  // n x horizon
    std::vector<std::vector<char>> contained;
    Vec sum_tau_u;
    int infeasible_steps = 0;
    int trials = 0;

    void init(const std::string& name_, int n, int horizon) {
        name = name_;
        sum_bound = Mat::Zero(n, horizon);
        min_bound = Mat::Constant(n, horizon, std::numeric_limits<double>::infinity());
        max_bound = Mat::Constant(n, horizon, -std::numeric_limits<double>::infinity());
        sum_tau_u = Vec::Zero(horizon);
    }
};

struct TrialMethodRecord {
    Mat bounds;  // n x horizon
    std::vector<char> contained;
    Vec tau_u;
    int infeasible = 0;
};

struct TrialOutcome {
    int trial = 0;
    bool ok = true;
    std::string error;
    std::vector<TrialMethodRecord> records;  // aligned with method names
    std::vector<char> dsmf_inbound;
};

struct MethodPlan {
    bool smf_per_sensor = false;
    bool csmf = false;
    bool dsmf = false;
    bool msmf = false;
    std::vector<std::string> names;  // output order

    static MethodPlan make(const ScenarioConfig& cfg, int sensor_count) {
        MethodPlan plan;
        for (Method m : cfg.methods) {
            if (m == Method::SmfPerSensor) plan.smf_per_sensor = true;
            if (m == Method::Csmf) plan.csmf = true;
            if (m == Method::Dsmf) plan.dsmf = true;
            if (m == Method::Msmf) plan.msmf = true;
        }
        if (plan.smf_per_sensor) {
            for (int i = 0; i < sensor_count; ++i) {
                plan.names.push_back("smf" + std::to_string(i + 1));
            }
        }
        if (plan.csmf) plan.names.push_back("csmf");
        if (plan.dsmf) plan.names.push_back("dsmf");
        if (plan.msmf) plan.names.push_back("msmf");
        return plan;
    }
};

TrialOutcome run_trial(const ScenarioConfig& cfg, const SystemModel& model,
                       const MethodPlan& plan, int trial) {
    TrialOutcome out;
    out.trial = trial;
    const int n = model.state_dim;
    const int L = model.sensor_count;
    const std::uint64_t tseed = trial_seed(cfg, trial);

    try {
        const TrialData data = simulate_trial_data(cfg, model, tseed);
        const SizeObjective obj = cfg.objective();
        const Ellipsoid init(cfg.x0, cfg.P0);

        const bool need_locals = plan.smf_per_sensor || plan.dsmf;
        std::vector<SystemModel> local_models;
        std::vector<CentralPipeline> locals;
        if (need_locals) {
            for (int i = 0; i < L; ++i) {
                local_models.push_back(single_sensor_view(model, i));
            }
            for (int i = 0; i < L; ++i) {
                locals.emplace_back(&local_models[i], std::vector<int>{i}, obj,
                                    pipeline_ids::local(i), init);
            }
        }

        std::vector<int> all_sensors(L);
        for (int i = 0; i < L; ++i) all_sensors[i] = i;

        std::optional<CentralPipeline> csmf;
        if (plan.csmf) csmf.emplace(&model, all_sensors, obj, pipeline_ids::csmf, init);

        std::optional<Ellipsoid> dsmf_center;
        if (plan.dsmf) dsmf_center = init;

        std::vector<Ellipsoid> msmf_states;
        if (plan.msmf) msmf_states.assign(cfg.weight_bank.weights.size(), init);

        const int records_count = static_cast<int>(plan.names.size());
        out.records.resize(records_count);
        for (auto& rec : out.records) {
            rec.bounds = Mat::Zero(n, cfg.horizon);
            rec.contained.assign(cfg.horizon, 0);
            rec.tau_u = Vec::Zero(cfg.horizon);
        }
        if (plan.dsmf) out.dsmf_inbound.assign(cfg.horizon, 0);

        auto record_ellipsoid = [&](int slot, int k, const Ellipsoid& e, const StepStats& st) {
            auto& rec = out.records[slot];
            for (int a = 0; a < n; ++a) rec.bounds(a, k - 1) = e.axis_error_bound(a);
            rec.contained[k - 1] = e.contains(data.truth[k], 1e-9) ? 1 : 0;
            rec.tau_u(k - 1) = st.tau_u;
            if (!st.feasible) ++rec.infeasible;
        };

        for (int k = 1; k <= cfg.horizon; ++k) {
            const auto& y_k = data.measurements[k - 1];
            int slot = 0;

            if (need_locals) {
                for (int i = 0; i < L; ++i) {
                    const StepStats st = locals[i].step(cfg, tseed, k, y_k);
                    if (plan.smf_per_sensor) record_ellipsoid(slot + i, k, locals[i].est, st);
                }
                if (plan.smf_per_sensor) slot += L;
            }

            if (plan.csmf) {
                const StepStats st = csmf->step(cfg, tseed, k, y_k);
                record_ellipsoid(slot, k, csmf->est, st);
                ++slot;
            }

            if (plan.dsmf) {
                const RemainderBound rem_f = bound_remainder(
                    model.f, dsmf_center->center(), dsmf_center->factor(),
                    model.jac_f(dsmf_center->center()), cfg.remainder.samples,
                    remainder_seed(tseed, k, pipeline_ids::dsmf_center, 0),
                    cfg.remainder.inflate);
                const PredictResult pred = predict(*dsmf_center, model, rem_f, obj);

                std::vector<Ellipsoid> posts;
                for (int i = 0; i < L; ++i) posts.push_back(locals[i].est);

                bool inbound = pred.ellipsoid.contains(data.truth[k], 1e-9);
                for (const auto& p : posts) inbound = inbound && p.contains(data.truth[k], 1e-9);
                out.dsmf_inbound[k - 1] = inbound ? 1 : 0;

                FusionResult fused = fuse_distributed(pred.ellipsoid, posts, obj);
                dsmf_center = fused.ellipsoid;
                record_ellipsoid(slot, k, *dsmf_center, StepStats{fused.tau.tau_u, fused.feasible});
                ++slot;
            }

            if (plan.msmf) {
                double tau_sum = 0.0;
                int infeasible = 0;
                auto stepper = [&](const Ellipsoid& state, const SizeObjective& wobj,
                                   int member) -> Ellipsoid {
                    CentralPipeline member_pipe(&model, all_sensors, wobj,
                                                pipeline_ids::msmf(member), state);
                    const StepStats st = member_pipe.step(cfg, tseed, k, y_k);
                    tau_sum += st.tau_u;
                    if (!st.feasible) ++infeasible;
                    return member_pipe.est;
                };
                msmf_states = run_parallel(stepper, cfg.weight_bank, msmf_states);

                const AxisIntervalSet set = intersect_axis_bounds(msmf_states);
                auto& rec = out.records[slot];
                const Vec hw = set.half_widths();
                for (int a = 0; a < n; ++a) rec.bounds(a, k - 1) = hw(a);
                rec.contained[k - 1] = set.contains(data.truth[k], 1e-9) ? 1 : 0;
                rec.tau_u(k - 1) = tau_sum / static_cast<double>(cfg.weight_bank.size());
                rec.infeasible += infeasible;
                ++slot;
            }
        }
    } catch (const std::exception& e) {
        out.ok = false;
        out.error = e.what();
    }
    return out;
}

} // namespace

RunResult run_scenario(const ScenarioConfig& cfg) {
    cfg.validate();
    const auto start_time = std::chrono::steady_clock::now();

    const SystemModel model = cfg.make_model();
    const MethodPlan plan = MethodPlan::make(cfg, model.sensor_count);
    const int n = model.state_dim;

    RunResult result;
    result.config = cfg;

    std::vector<MethodAccumulator> acc(plan.names.size());
    for (std::size_t i = 0; i < plan.names.size(); ++i) {
        acc[i].init(plan.names[i], n, cfg.horizon);
    }

    std::vector<TrialOutcome> outcomes(cfg.runs);
    if (cfg.threads <= 1) {
        for (int t = 0; t < cfg.runs; ++t) outcomes[t] = run_trial(cfg, model, plan, t);
    } else {
        const int chunks = std::min(cfg.threads, cfg.runs);
        std::vector<std::future<void>> futures;
        for (int c = 0; c < chunks; ++c) {
            futures.push_back(std::async(std::launch::async, [&, c] {
                for (int t = c; t < cfg.runs; t += chunks) {
                    outcomes[t] = run_trial(cfg, model, plan, t);
                }
            }));
        }
        for (auto& f : futures) f.get();
    }

    // Deterministic ordered reduction over trials.
    for (int t = 0; t < cfg.runs; ++t) {
        const auto& o = outcomes[t];
        if (!o.ok) {
            result.aborted.push_back(TrialDiagnostic{t, o.error});
            continue;
        }
        for (std::size_t mi = 0; mi < plan.names.size(); ++mi) {
            const auto& rec = o.records[mi];
            auto& a = acc[mi];
            a.sum_bound += rec.bounds;
            a.min_bound = a.min_bound.cwiseMin(rec.bounds);
            a.max_bound = a.max_bound.cwiseMax(rec.bounds);
            a.contained.push_back(rec.contained);
            a.sum_tau_u += rec.tau_u;
            a.infeasible_steps += rec.infeasible;
            ++a.trials;
        }
        if (plan.dsmf) result.dsmf_inputs_inbound.push_back(o.dsmf_inbound);
    }

    for (auto& a : acc) {
        MethodSeries series;
        series.name = a.name;
        const double denom = std::max(1, a.trials);
        series.mean_bound = a.sum_bound / denom;
        series.min_bound = a.min_bound;
        series.max_bound = a.max_bound;
        series.contained = std::move(a.contained);
        series.mean_tau_u = a.sum_tau_u / denom;
        series.infeasible_steps = a.infeasible_steps;
        result.methods.push_back(std::move(series));
    }

    result.wall_time_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_time).count();
    return result;
}

ProbeResult probe_remainders(const ScenarioConfig& cfg, int step) {
    cfg.validate();
    if (step < 1 || step > cfg.horizon) {
        throw InvalidParameter("probe_remainders: step out of range");
    }
    const SystemModel model = cfg.make_model();
    const std::uint64_t tseed = trial_seed(cfg, 0);
    const TrialData data = simulate_trial_data(cfg, model, tseed);
    const SizeObjective obj = cfg.objective();

    std::vector<int> all_sensors(model.sensor_count);
    for (int i = 0; i < model.sensor_count; ++i) all_sensors[i] = i;
    CentralPipeline pipe(&model, all_sensors, obj, pipeline_ids::csmf, Ellipsoid(cfg.x0, cfg.P0));

    for (int k = 1; k < step; ++k) {
        pipe.step(cfg, tseed, k, data.measurements[k - 1]);
    }

    ProbeResult probe;
    probe.step = step;
    probe.state_remainder = bound_remainder(
        model.f, pipe.est.center(), pipe.est.factor(), model.jac_f(pipe.est.center()),
        cfg.remainder.samples, remainder_seed(tseed, step, pipeline_ids::csmf, 0),
        cfg.remainder.inflate);
    const PredictResult pred = predict(pipe.est, model, probe.state_remainder, obj);
    probe.prediction_center = pred.ellipsoid.center();
    probe.prediction_axis_bounds = Vec(model.state_dim);
    for (int a = 0; a < model.state_dim; ++a) {
        probe.prediction_axis_bounds(a) = pred.ellipsoid.axis_error_bound(a);
    }
    auto wrap = [&model](Vec d) { return model.canonical_measurement_diff(std::move(d)); };
    for (int i = 0; i < model.sensor_count; ++i) {
        probe.measurement_remainders.push_back(bound_remainder(
            model.h[i], pred.ellipsoid.center(), pred.ellipsoid.factor(),
            model.jac_h[i](pred.ellipsoid.center()), cfg.remainder.samples,
            remainder_seed(tseed, step, pipeline_ids::csmf, 1 + i), cfg.remainder.inflate,
            wrap));
    }
    return probe;
}

} // namespace smf
