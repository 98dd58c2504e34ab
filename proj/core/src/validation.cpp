#include "smfusion/validation.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>

#include "smfusion/centralized.hpp"
#include "smfusion/distributed.hpp"
#include "smfusion/prediction.hpp"
#include "smfusion/rng.hpp"

namespace smf {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

Mat random_spd(Eigen::Index n, Rng& rng, double lo = 0.6, double hi = 2.4) {
    Mat a(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) a(i, j) = rng.normal();
    }
    const Eigen::HouseholderQR<Mat> qr(a);
    const Mat q = qr.householderQ();
    Vec eigs(n);
    for (Eigen::Index i = 0; i < n; ++i) eigs(i) = lo + (hi - lo) * rng.uniform01();
    return detail::symmetrize(q * eigs.asDiagonal() * q.transpose());
}

SystemModel identity_state_model(Eigen::Index n, const Mat& q_shape) {
    SystemModel model;
    model.state_dim = static_cast<int>(n);
    model.meas_dim = 0;
    model.sensor_count = 0;
    model.f = [](const Vec& x) { return x; };
    model.jac_f = [n](const Vec&) { return Mat::Identity(n, n); };
    model.Q = q_shape;
    return model;
}

RemainderBound remainder_from_shape(const Vec& e, const Mat& p) {
    RemainderBound rem;
    rem.e = e;
    rem.P = p;
    if (p.cwiseAbs().maxCoeff() == 0.0) {
        rem.B = Mat::Zero(p.rows(), p.cols());
    } else {
        rem.B = cholesky_factor(p);
    }
    return rem;
}

SystemModel linear_measurement_model(Eigen::Index n, const std::vector<Mat>& jacs,
                                     const std::vector<Mat>& noise) {
    SystemModel model;
    model.state_dim = static_cast<int>(n);
    model.meas_dim = static_cast<int>(jacs.front().rows());
    model.sensor_count = static_cast<int>(jacs.size());
    model.f = [](const Vec& x) { return x; };
    model.jac_f = [n](const Vec&) { return Mat::Identity(n, n); };
    for (std::size_t i = 0; i < jacs.size(); ++i) {
        const Mat j = jacs[i];
        model.h.push_back([j](const Vec& x) -> Vec { return j * x; });
        model.jac_h.push_back([j](const Vec&) -> Mat { return j; });
        model.R.push_back(noise[i]);
    }
    return model;
}

Mat random_row_jacobian(Eigen::Index n, Rng& rng) {
    Mat j(1, n);
    for (Eigen::Index k = 0; k < n; ++k) j(0, k) = rng.normal();
    const double norm = j.norm();
    const double target = 0.7 + 0.8 * rng.uniform01();
    if (norm > 1e-12) j *= target / norm;
    else j(0, 0) = target;
    return j;
}

std::string fmt_rel(double v) {
    std::ostringstream os;
    os.precision(3);
    os << std::scientific << v;
    return os.str();
}

} // namespace

ValidationOptions ValidationOptions::quick() {
    ValidationOptions opt;
    opt.prediction_instances = 40;
    opt.update_instances = 12;
    opt.distributed_instances = 12;
    return opt;
}

CheckResult check_prediction_optimality(const ValidationOptions& opt) {
    const auto t0 = Clock::now();
    Rng rng(mix_seed(opt.seed, 1));
    double worst = 0.0;
    for (int i = 0; i < opt.prediction_instances; ++i) {
        const Eigen::Index n = std::vector<Eigen::Index>{1, 2, 4}[i % 3];
        const Mat p = random_spd(n, rng);
        const Mat q = random_spd(n, rng);
        const Mat pf = random_spd(n, rng);

        const Ellipsoid current(Vec::Zero(n), p);
        const SystemModel model = identity_state_model(n, q);
        const RemainderBound rem = remainder_from_shape(Vec::Zero(n), pf);
        const SizeObjective obj = SizeObjective::trace();

        const PredictResult closed = predict(current, model, rem, obj);
        const double closed_value = closed.ellipsoid.shape().trace();

        const PredictionTauProblem prob = prediction_tau_problem(current, model, rem, obj);
        const OracleResult oracle =
            grid_oracle(prob.problem, opt.prediction_resolution, Vec(), 1e-9, true);

        worst = std::max(worst,
                         std::abs(closed_value - oracle.value) / std::abs(closed_value));
    }
    CheckResult res;
    res.name = "prediction closed form vs grid oracle";
    res.passed = worst <= 1e-3;
    res.detail = std::to_string(opt.prediction_instances) +
                 " instances, worst relative gap " + fmt_rel(worst);
    res.seconds = seconds_since(t0);
    return res;
}

CheckResult check_update_oracle(const ValidationOptions& opt) {
    const auto t0 = Clock::now();
    Rng rng(mix_seed(opt.seed, 2));
    double worst_gap = 0.0;
    double worst_identity = 0.0;
    for (int i = 0; i < opt.update_instances; ++i) {
        const int big = std::max(1, opt.update_instances / 2);
        const int L = (i % big == 0) ? 2 : 1;
        const Eigen::Index n = 1 + (i % 2);

        Vec center(n);
        for (Eigen::Index k = 0; k < n; ++k) center(k) = 2.0 * rng.normal();
        const Ellipsoid pred(center, random_spd(n, rng));

        std::vector<Mat> jacs;
        std::vector<Mat> noise;
        std::vector<RemainderBound> rems;
        std::vector<Vec> measurements;
        for (int s = 0; s < L; ++s) {
            jacs.push_back(random_row_jacobian(n, rng));
            noise.push_back(Mat::Constant(1, 1, 0.6 + 1.4 * rng.uniform01()));
            rems.push_back(remainder_from_shape(
                Vec::Zero(1), Mat::Constant(1, 1, 0.6 + 1.4 * rng.uniform01())));
        }
        const SystemModel model = linear_measurement_model(n, jacs, noise);
        for (int s = 0; s < L; ++s) measurements.push_back(model.h[s](pred.center()));

        auto blocks = std::make_shared<const CentralizedBlocks>(
            build_blocks(pred, model, measurements, rems));
        const TauProblem problem = centralized_tau_problem(blocks, SizeObjective::trace());

        const auto start = make_interior(
            problem, TauAssignment::from_vector(Vec::Constant(problem.dim, 0.5)));
        if (!start) {
            worst_gap = std::numeric_limits<double>::infinity();
            continue;
        }
        const SolveResult sol = solve(problem, *start, 4000 * problem.dim);
        const OracleResult oracle =
            grid_oracle(problem, opt.update_resolution, Vec(), 1e-9, true);
        worst_gap = std::max(worst_gap,
                             std::abs(sol.value - oracle.value) / std::abs(oracle.value));

        // Decoupled-shape identity at random feasible multipliers.
        for (int j = 0; j < 20; ++j) {
            Vec u(problem.dim);
            for (int k = 0; k < problem.dim; ++k) u(k) = 0.05 + 0.95 * rng.uniform01();
            const double scale = (0.05 + 0.9 * rng.uniform01()) / u.sum();
            TauAssignment t = TauAssignment::from_vector(u * scale);
            if (!is_feasible(problem, t, 1e-9)) continue;
            const TauAssignment full = blocks->expand(t);
            const Mat via_blocks = centralized_decoupled_shape(*blocks, full);
            const Mat via_information = centralized_shape_from_tau(*blocks, full);
            const double rel = (via_blocks - via_information).norm() / via_information.norm();
            worst_identity = std::max(worst_identity, rel);
        }
    }
    CheckResult res;
    res.name = "centralized update vs grid oracle";
    res.passed = worst_gap <= 1e-3 && worst_identity <= 1e-8;
    res.detail = std::to_string(opt.update_instances) + " instances, worst gap " +
                 fmt_rel(worst_gap) + ", worst decoupling residual " + fmt_rel(worst_identity);
    res.seconds = seconds_since(t0);
    return res;
}

CheckResult check_distributed_oracle(const ValidationOptions& opt) {
    const auto t0 = Clock::now();
    Rng rng(mix_seed(opt.seed, 3));
    double worst_gap = 0.0;
    double worst_fixed = 0.0;
    for (int i = 0; i < opt.distributed_instances; ++i) {
        const Eigen::Index n = 1 + (i % 2);
        const int L = 1 + (i % 3 == 0 ? 1 : 0);

        Vec center(n);
        for (Eigen::Index k = 0; k < n; ++k) center(k) = 2.0 * rng.normal();
        const Ellipsoid pred(center, random_spd(n, rng));
        std::vector<Ellipsoid> locals;
        for (int s = 0; s < L; ++s) locals.emplace_back(center, random_spd(n, rng));

        const TauProblem problem =
            distributed_tau_problem(pred, locals, SizeObjective::trace());
        const auto start = make_interior(
            problem, TauAssignment::from_vector(Vec::Constant(problem.dim, 0.5)));
        if (!start) {
            worst_gap = std::numeric_limits<double>::infinity();
            continue;
        }
        const SolveResult sol = solve(problem, *start, 4000 * problem.dim);
        const OracleResult oracle =
            grid_oracle(problem, opt.distributed_resolution, Vec(), 1e-9, true);
        worst_gap = std::max(worst_gap,
                             std::abs(sol.value - oracle.value) / std::abs(oracle.value));

        // Identical-ellipsoid fixed point.
        const std::vector<Ellipsoid> copies(L, pred);
        const FusionResult fused = fuse_distributed(pred, copies, SizeObjective::trace());
        const double shape_rel =
            (fused.ellipsoid.shape() - pred.shape()).norm() / pred.shape().norm();
        const double center_err = (fused.ellipsoid.center() - pred.center()).norm() /
                                  (1.0 + pred.center().norm());
        worst_fixed = std::max({worst_fixed, shape_rel, center_err});
    }
    CheckResult res;
    res.name = "distributed update vs grid oracle";
    res.passed = worst_gap <= 1e-3 && worst_fixed <= 1e-9;
    res.detail = std::to_string(opt.distributed_instances) + " instances, worst gap " +
                 fmt_rel(worst_gap) + ", worst fixed-point residual " + fmt_rel(worst_fixed);
    res.seconds = seconds_since(t0);
    return res;
}

ReferenceUpdate schweppe_reference_update(const Vec& center, const Mat& shape, const Mat& jac,
                                          const Mat& noise_shape, const Vec& measurement,
                                          double tau_u, double tau_v) {
    const Mat p_inv = shape.inverse();
    const Mat r_inv = noise_shape.inverse();
    const Mat info = tau_u * p_inv + tau_v * jac.transpose() * r_inv * jac;
    ReferenceUpdate out;
    out.shape = info.inverse();
    out.center = center + tau_v * out.shape * jac.transpose() * r_inv * (measurement - jac * center);
    return out;
}

CheckResult check_schweppe_reductions(const ValidationOptions& opt) {
    const auto t0 = Clock::now();
    Rng rng(mix_seed(opt.seed, 4));
    double worst_pred = 0.0;
    double worst_update = 0.0;

    // Scalar linear prediction: shape must equal (sqrt(P) + sqrt(Q))^2.
    for (int i = 0; i < 10; ++i) {
        const double p = 0.2 + 3.0 * rng.uniform01();
        const double q = 0.2 + 3.0 * rng.uniform01();
        const Ellipsoid current(Vec::Zero(1), Mat::Constant(1, 1, p));
        const SystemModel model = identity_state_model(1, Mat::Constant(1, 1, q));
        const RemainderBound rem = remainder_from_shape(Vec::Zero(1), Mat::Zero(1, 1));
        const PredictResult out = predict(current, model, rem, SizeObjective::trace());
        const double expected = std::pow(std::sqrt(p) + std::sqrt(q), 2);
        worst_pred = std::max(worst_pred,
                              std::abs(out.ellipsoid.shape()(0, 0) - expected) / expected);
    }

    // Linear single-sensor update at the optimizer's multipliers against
    // the reference update.
    for (int i = 0; i < 10; ++i) {
        const Eigen::Index n = 2;
        Vec center(n);
        center << rng.normal(), rng.normal();
        const Ellipsoid pred(center, random_spd(n, rng));
        const Mat jac = random_row_jacobian(n, rng);
        const Mat r = Mat::Constant(1, 1, 0.5 + 1.5 * rng.uniform01());
        const SystemModel model = linear_measurement_model(n, {jac}, {r});
        const RemainderBound rem = remainder_from_shape(Vec::Zero(1), Mat::Zero(1, 1));
        Vec y = model.h[0](center);
        y(0) += 0.4 * rng.normal();  // nonzero innovation

        const FusionResult fused =
            fuse_update(pred, model, {y}, {rem}, SizeObjective::trace());
        const ReferenceUpdate ref = schweppe_reference_update(
            center, pred.shape(), jac, r, y, fused.tau.tau_u, fused.tau.extras(0));
        const double shape_rel =
            (fused.ellipsoid.shape() - ref.shape).norm() / ref.shape.norm();
        const double center_rel = (fused.ellipsoid.center() - ref.center).norm() /
                                  (1.0 + ref.center.norm());
        worst_update = std::max({worst_update, shape_rel, center_rel});
    }

    CheckResult res;
    res.name = "classical bounding-ellipsoid reductions";
    res.passed = worst_pred <= 1e-9 && worst_update <= 1e-6;
    res.detail = "prediction identity residual " + fmt_rel(worst_pred) +
                 ", linear update residual " + fmt_rel(worst_update);
    res.seconds = seconds_since(t0);
    return res;
}

std::vector<CheckResult> run_validation_suite(const ValidationOptions& opt) {
    std::vector<CheckResult> out;
    out.push_back(check_prediction_optimality(opt));
    out.push_back(check_update_oracle(opt));
    out.push_back(check_distributed_oracle(opt));
    out.push_back(check_schweppe_reductions(opt));
    return out;
}

} // namespace smf
