#include "smfusion/prediction.hpp"

#include <cmath>

namespace smf {

namespace {

struct PredictionTerms {
    Mat propagated;  // J P J^T
    double a_u = 0.0;
    double a_w = 0.0;
    double a_f = 0.0;
    bool keep_w = false;
    bool keep_f = false;
};

PredictionTerms prediction_terms(const Ellipsoid& current, const SystemModel& model,
                                 const RemainderBound& rem_f, const SizeObjective& obj) {
    PredictionTerms terms;
    const Mat jac = model.jac_f(current.center());
    terms.propagated = detail::symmetrize(jac * current.shape() * jac.transpose());
    terms.a_u = weighted_trace(obj, terms.propagated);
    terms.a_w = weighted_trace(obj, model.Q);
    terms.a_f = weighted_trace(obj, rem_f.P);

    const double top = std::max({terms.a_u, terms.a_w, terms.a_f});
    if (top <= 0.0) {
        throw DegenerateInput("predict: all size terms vanish");
    }
    // Terms far below the dominant one would force tiny multipliers and
    // blow up the 1/tau division; drop them instead.
    const double cutoff = 1e-12 * top;
    terms.keep_w = terms.a_w >= cutoff;
    terms.keep_f = terms.a_f >= cutoff;
    if (terms.a_u < cutoff) {
        throw DegenerateInput("predict: propagated state term vanishes");
    }
    return terms;
}

} // namespace

PredictResult predict(const Ellipsoid& current, const SystemModel& model,
                      const RemainderBound& rem_f, const SizeObjective& obj) {
    const PredictionTerms terms = prediction_terms(current, model, rem_f, obj);

    const double s_u = std::sqrt(terms.a_u);
    const double s_w = terms.keep_w ? std::sqrt(terms.a_w) : 0.0;
    const double s_f = terms.keep_f ? std::sqrt(terms.a_f) : 0.0;
    const double total = s_u + s_w + s_f;

    const double tau_u = s_u / total;
    const double tau_w = s_w / total;
    const double tau_f = s_f / total;

    Mat shape = terms.propagated / tau_u;
    if (terms.keep_w) shape += model.Q / tau_w;
    if (terms.keep_f) shape += rem_f.P / tau_f;

    Vec center = model.f(current.center()) + rem_f.e;

    TauAssignment tau;
    tau.tau_u = tau_u;
    tau.extras = Vec(2);
    tau.extras << tau_w, tau_f;
    return PredictResult{Ellipsoid(std::move(center), detail::symmetrize(shape)), tau};
}

PredictionTauProblem prediction_tau_problem(const Ellipsoid& current,
                                            const SystemModel& model,
                                            const RemainderBound& rem_f,
                                            const SizeObjective& obj) {
    const PredictionTerms terms = prediction_terms(current, model, rem_f, obj);

    PredictionTauProblem out;
    out.remainder_kept = terms.keep_f;
    const double a_u = terms.a_u;
    const double a_w = terms.a_w;
    const double a_f = terms.a_f;
    const bool keep_f = terms.keep_f;

    out.problem.dim = keep_f ? 3 : 2;
    out.problem.objective = [a_u, a_w, a_f, keep_f](const TauAssignment& t) {
        double v = a_u / t.tau_u + a_w / t.extras(0);
        if (keep_f) v += a_f / t.extras(1);
        return v;
    };
    out.problem.feasibility = [](const TauAssignment& t, Mat& f) {
        f.resize(1, 1);
        f(0, 0) = 1.0 - t.tau_u - t.extras.sum();
    };
    return out;
}

Mat prediction_containment_matrix(const Ellipsoid& current, const SystemModel& model,
                                  const RemainderBound& rem_f, const Ellipsoid& candidate,
                                  const TauAssignment& t) {
    const Eigen::Index n = current.dim();
    if (candidate.dim() != n || rem_f.e.size() != n || t.extras.size() != 2) {
        throw DimensionMismatch("prediction_containment_matrix: dimension mismatch");
    }
    const double tau_u = t.tau_u;
    const double tau_w = t.extras(0);
    const double tau_f = t.extras(1);

    const Mat jac = model.jac_f(current.center());

    // Phi = [f(c) + e_f - c_cand, J E, I, B_f], one column block per
    // constraint source.
    const Eigen::Index cols = 1 + 3 * n;
    Mat phi(n, cols);
    phi.col(0) = model.f(current.center()) + rem_f.e - candidate.center();
    phi.block(0, 1, n, n) = jac * current.factor();
    phi.block(0, 1 + n, n, n) = Mat::Identity(n, n);
    phi.block(0, 1 + 2 * n, n, n) = rem_f.B;

    Mat xi = Mat::Zero(cols, cols);
    xi(0, 0) = 1.0 - tau_u - tau_w - tau_f;
    xi.block(1, 1, n, n) = tau_u * Mat::Identity(n, n);
    if (tau_w != 0.0) {
        Eigen::LLT<Mat> llt(model.Q);
        if (llt.info() != Eigen::Success) {
            throw NotPositiveDefinite("prediction_containment_matrix: Q not positive definite");
        }
        xi.block(1 + n, 1 + n, n, n) =
            tau_w * llt.solve(Mat::Identity(n, n));
    }
    xi.block(1 + 2 * n, 1 + 2 * n, n, n) = tau_f * Mat::Identity(n, n);

    Mat big(n + cols, n + cols);
    big.topLeftCorner(n, n) = candidate.shape();
    big.topRightCorner(n, cols) = phi;
    big.bottomLeftCorner(cols, n) = phi.transpose();
    big.bottomRightCorner(cols, cols) = xi;
    return detail::symmetrize(big);
}

} // namespace smf
