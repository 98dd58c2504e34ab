#include "smfusion/distributed.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

namespace smf {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

struct DistributedData {
    Vec pred_center;
    Mat pred_factor;       // E
    Mat pred_shape_inv;
    std::vector<Mat> p_inv;          // P_i^{-1}
    std::vector<Vec> diff;           // c_pred - c_i
    // constant pieces: u22(tau) = tau_u I + sum tau_i * g[i],
    // u12(tau) = sum tau_i * w[i], quad(tau) = sum tau_i * q[i]
    std::vector<Mat> g;
    std::vector<Vec> w;
    std::vector<double> q;
    Eigen::Index n = 0;
    int L = 0;
};

DistributedData make_data(const Ellipsoid& pred, const std::vector<Ellipsoid>& locals) {
    if (locals.empty()) {
        throw InvalidParameter("distributed fusion: need at least one local ellipsoid");
    }
    DistributedData d;
    d.n = pred.dim();
    d.L = static_cast<int>(locals.size());
    d.pred_center = pred.center();
    d.pred_factor = pred.factor();
    const Mat factor_inv =
        pred.factor().triangularView<Eigen::Lower>().solve(Mat::Identity(d.n, d.n));
    d.pred_shape_inv = detail::symmetrize(factor_inv.transpose() * factor_inv);

    for (const auto& local : locals) {
        if (local.dim() != d.n) {
            throw DimensionMismatch("distributed fusion: local dimension mismatch");
        }
        const Mat local_inv =
            local.factor().triangularView<Eigen::Lower>().solve(Mat::Identity(d.n, d.n));
        const Mat p_inv = detail::symmetrize(local_inv.transpose() * local_inv);
        const Vec diff = pred.center() - local.center();
        d.p_inv.push_back(p_inv);
        d.diff.push_back(diff);
        d.g.push_back(detail::symmetrize(d.pred_factor.transpose() * p_inv * d.pred_factor));
        d.w.push_back(d.pred_factor.transpose() * (p_inv * diff));
        d.q.push_back(diff.dot(p_inv * diff));
    }
    return d;
}

void fill_upsilon(const DistributedData& d, const TauAssignment& t, double& u11,
                  Vec& u12, Mat& u22) {
    u11 = 1.0 - t.tau_u - t.extras.sum();
    u12.setZero(d.n);
    u22 = t.tau_u * Mat::Identity(d.n, d.n);
    for (int i = 0; i < d.L; ++i) {
        const double ty = t.extras(i);
        u11 += ty * d.q[i];
        u12.noalias() += ty * d.w[i];
        u22.noalias() += ty * d.g[i];
    }
}

struct DistributedWorkspace {
    Vec u12;
    Mat u22;
    Mat rhs;
    Eigen::LLT<Mat> llt;
};

TauProblem make_problem(std::shared_ptr<const DistributedData> data,
                        const SizeObjective& obj) {
    auto workspace = std::make_shared<DistributedWorkspace>();
    TauProblem p;
    p.dim = 1 + data->L;
    p.objective = [data, workspace, obj](const TauAssignment& t) {
        auto& w = *workspace;
        double u11 = 0.0;
        fill_upsilon(*data, t, u11, w.u12, w.u22);
        w.llt.compute(w.u22);
        if (w.llt.info() != Eigen::Success) return kInf;
        // E u22^{-1} E^T
        w.rhs = data->pred_factor.transpose();
        w.llt.solveInPlace(w.rhs);
        const Mat shape = data->pred_factor * w.rhs;
        if (obj.kind() == SizeObjective::Kind::Trace) return shape.trace();
        return obj.weights().dot(shape.diagonal());
    };
    p.feasibility = [data, workspace](const TauAssignment& t, Mat& out) {
        auto& w = *workspace;
        double u11 = 0.0;
        fill_upsilon(*data, t, u11, w.u12, w.u22);
        const Eigen::Index n = data->n;
        out.resize(1 + n, 1 + n);
        out(0, 0) = u11;
        out.block(0, 1, 1, n) = w.u12.transpose();
        out.block(1, 0, n, 1) = w.u12;
        out.bottomRightCorner(n, n) = w.u22;
    };
    return p;
}

} // namespace

UpsilonBlocks build_upsilon(const Ellipsoid& pred, const std::vector<Ellipsoid>& locals,
                            const TauAssignment& t) {
    if (t.dim() != static_cast<Eigen::Index>(locals.size()) + 1) {
        throw DimensionMismatch("build_upsilon: assignment needs 1 + L entries");
    }
    const DistributedData data = make_data(pred, locals);
    UpsilonBlocks u;
    fill_upsilon(data, t, u.u11, u.u12, u.u22);
    return u;
}

TauProblem distributed_tau_problem(const Ellipsoid& pred,
                                   const std::vector<Ellipsoid>& locals,
                                   const SizeObjective& obj) {
    auto data = std::make_shared<const DistributedData>(make_data(pred, locals));
    return make_problem(std::move(data), obj);
}

FusionResult fuse_distributed(const Ellipsoid& pred, const std::vector<Ellipsoid>& locals,
                              const SizeObjective& obj, int budget) {
    const int L = static_cast<int>(locals.size());

    // Canonical processing order: sort locals by center then shape bytes,
    // so permuting the input order cannot change the arithmetic.
    std::vector<int> order(L);
    std::iota(order.begin(), order.end(), 0);
    auto lex_key = [&](int i, int j) {
        const auto& a = locals[i];
        const auto& b = locals[j];
        for (Eigen::Index k = 0; k < a.center().size(); ++k) {
            if (a.center()(k) != b.center()(k)) return a.center()(k) < b.center()(k);
        }
        for (Eigen::Index r = 0; r < a.shape().rows(); ++r) {
            for (Eigen::Index c = 0; c < a.shape().cols(); ++c) {
                if (a.shape()(r, c) != b.shape()(r, c)) return a.shape()(r, c) < b.shape()(r, c);
            }
        }
        return i < j;
    };
    std::sort(order.begin(), order.end(), lex_key);

    std::vector<Ellipsoid> sorted;
    sorted.reserve(L);
    for (int i : order) sorted.push_back(locals[i]);

    auto data = std::make_shared<const DistributedData>(make_data(pred, sorted));
    const TauProblem problem = make_problem(data, obj);
    if (budget <= 0) budget = 500 * problem.dim;

    auto start = make_interior(
        problem, TauAssignment::from_vector(Vec::Constant(problem.dim, 0.5)));
    if (!start) {
        start = make_interior(
            problem,
            TauAssignment::from_vector(Vec::Constant(problem.dim, 1.0 / (problem.dim + 1))));
    }
    if (!start || start->tau_u <= 0.0 || (start->extras.array() <= 0.0).any()) {
        return FusionResult{pred, TauAssignment::from_vector(Vec::Zero(1 + L)), false,
                            objective_value(obj, pred.shape())};
    }

    const SolveResult sol = solve(problem, *start, budget);

    // Shape first (information form), then the center through it.
    Mat info = sol.tau.tau_u * data->pred_shape_inv;
    for (int i = 0; i < L; ++i) {
        info.noalias() += sol.tau.extras(i) * data->p_inv[i];
    }
    Eigen::LLT<Mat> llt(detail::symmetrize(info));
    if (llt.info() != Eigen::Success) {
        return FusionResult{pred, TauAssignment::from_vector(Vec::Zero(1 + L)), false,
                            objective_value(obj, pred.shape())};
    }
    const Mat shape = detail::symmetrize(llt.solve(Mat::Identity(data->n, data->n)));

    Vec center = pred.center();
    for (int i = 0; i < L; ++i) {
        center.noalias() += sol.tau.extras(i) * (shape * (data->p_inv[i] * (-data->diff[i])));
    }

    // Report multipliers in the caller's original sensor order.
    TauAssignment tau;
    tau.tau_u = sol.tau.tau_u;
    tau.extras = Vec(L);
    for (int k = 0; k < L; ++k) tau.extras(order[k]) = sol.tau.extras(k);

    return FusionResult{Ellipsoid(std::move(center), shape), tau, true, sol.value};
}

Mat distributed_containment_matrix(const Ellipsoid& pred, const std::vector<Ellipsoid>& locals,
                                   const Ellipsoid& candidate, const TauAssignment& t) {
    if (candidate.dim() != pred.dim()) {
        throw DimensionMismatch("distributed_containment_matrix: candidate dimension mismatch");
    }
    const UpsilonBlocks u = build_upsilon(pred, locals, t);
    const Eigen::Index n = pred.dim();
    Mat big = Mat::Zero(2 * n + 1, 2 * n + 1);
    big.topLeftCorner(n, n) = candidate.shape();
    big.block(0, n, n, 1) = pred.center() - candidate.center();
    big.block(n, 0, 1, n) = (pred.center() - candidate.center()).transpose();
    big.block(0, n + 1, n, n) = pred.factor();
    big.block(n + 1, 0, n, n) = pred.factor().transpose();
    big(n, n) = u.u11;
    big.block(n, n + 1, 1, n) = u.u12.transpose();
    big.block(n + 1, n, n, 1) = u.u12;
    big.bottomRightCorner(n, n) = u.u22;
    return detail::symmetrize(big);
}

} // namespace smf
