#include "smfusion/centralized.hpp"

#include <cmath>
#include <limits>

namespace smf {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

Mat spd_inverse(const Mat& m, const char* what) {
    Eigen::LLT<Mat> llt(detail::symmetrize(m));
    if (llt.info() != Eigen::Success) {
        throw NotPositiveDefinite(std::string(what) + ": matrix not positive definite");
    }
    return llt.solve(Mat::Identity(m.rows(), m.cols()));
}
} // namespace

int CentralizedBlocks::num_nondegenerate() const {
    int d = 0;
    for (bool flag : degenerate) {
        if (!flag) ++d;
    }
    return d;
}

TauAssignment CentralizedBlocks::reduce(const TauAssignment& full) const {
    if (full.dim() != full_dim()) {
        throw DimensionMismatch("CentralizedBlocks::reduce: assignment dimension mismatch");
    }
    TauAssignment out;
    out.tau_u = full.tau_u;
    out.extras = Vec(L + num_nondegenerate());
    for (int i = 0; i < L; ++i) out.extras(i) = full.extras(i);
    for (int i = 0; i < L; ++i) {
        if (h_extra_index[i] >= 0) out.extras(h_extra_index[i]) = full.extras(L + i);
    }
    return out;
}

TauAssignment CentralizedBlocks::expand(const TauAssignment& reduced) const {
    if (reduced.dim() != reduced_dim()) {
        throw DimensionMismatch("CentralizedBlocks::expand: assignment dimension mismatch");
    }
    TauAssignment out;
    out.tau_u = reduced.tau_u;
    out.extras = Vec::Zero(2 * L);
    for (int i = 0; i < L; ++i) out.extras(i) = reduced.extras(i);
    for (int i = 0; i < L; ++i) {
        if (h_extra_index[i] >= 0) out.extras(L + i) = reduced.extras(h_extra_index[i]);
    }
    return out;
}

Mat CentralizedBlocks::xi22(const TauAssignment& full) const {
    const int rows = static_cast<int>(psi22.rows());
    Mat xi = Mat::Zero(rows, rows);
    xi.topLeftCorner(n, n) = full.tau_u * Mat::Identity(n, n);
    for (int i = 0; i < L; ++i) {
        xi.block(n + i * m, n + i * m, m, m) = full.extras(i) * r_inv[i];
    }
    int row = n + L * m;
    for (int i = 0; i < L; ++i) {
        if (degenerate[i]) continue;
        xi.block(row, row, m, m) = full.extras(L + i) * Mat::Identity(m, m);
        row += m;
    }
    return xi;
}

CentralizedBlocks build_blocks(const Ellipsoid& pred, const SystemModel& model,
                               const std::vector<Vec>& measurements,
                               const std::vector<RemainderBound>& rems) {
    const int n = static_cast<int>(pred.dim());
    const int m = model.meas_dim;
    const int L = model.sensor_count;
    if (static_cast<int>(measurements.size()) != L ||
        static_cast<int>(rems.size()) != L) {
        throw DimensionMismatch("build_blocks: need one measurement and remainder per sensor");
    }

    CentralizedBlocks b;
    b.n = n;
    b.m = m;
    b.L = L;
    b.pred_center = pred.center();
    b.pred_shape = pred.shape();

    const Mat& factor = pred.factor();
    if ((factor.diagonal().array().abs() < 1e-300).any()) {
        throw SingularFactor("build_blocks: prediction factor is singular");
    }
    const Mat factor_inv =
        factor.triangularView<Eigen::Lower>().solve(Mat::Identity(n, n));
    b.pred_shape_inv = detail::symmetrize(factor_inv.transpose() * factor_inv);

    b.degenerate.resize(L);
    b.h_extra_index.assign(L, -1);
    int num_nondeg = 0;
    for (int i = 0; i < L; ++i) {
        b.degenerate[i] = rems[i].is_degenerate();
        if (!b.degenerate[i]) b.h_extra_index[i] = L + num_nondeg++;
    }

    const int rows = n + m * L + m * num_nondeg;
    const int cols = n + m * L;
    b.psi22 = Mat::Zero(rows, cols);
    b.psi21 = Vec::Zero(rows);
    b.psi22.topLeftCorner(n, n) = factor_inv;

    for (int i = 0; i < L; ++i) {
        const Vec predicted = model.h[i](pred.center());
        if (static_cast<Eigen::Index>(m) != measurements[i].size() ||
            predicted.size() != measurements[i].size()) {
            throw DimensionMismatch("build_blocks: measurement dimension mismatch");
        }
        Vec innov = model.canonical_measurement_diff(predicted - measurements[i]);
        if (b.degenerate[i]) innov += rems[i].e;

        b.jac.push_back(model.jac_h[i](pred.center()));
        b.r.push_back(model.R[i]);
        b.r_inv.push_back(spd_inverse(model.R[i], "build_blocks: R"));
        b.innovation.push_back(innov);
        b.rem_center.push_back(rems[i].e);
        b.rem_shape.push_back(rems[i].P);

        b.psi22.block(n + i * m, 0, m, n) = -b.jac[i];
        b.psi22.block(n + i * m, n + i * m, m, m) = Mat::Identity(m, m);
        b.psi21.segment(n + i * m, m) = innov;
    }

    int row = n + m * L;
    for (int i = 0; i < L; ++i) {
        if (b.degenerate[i]) {
            b.rem_shape_inv.push_back(Mat::Zero(m, m));
            continue;
        }
        const Mat b_inv = rems[i].B.triangularView<Eigen::Lower>().solve(Mat::Identity(m, m));
        b.psi22.block(row, n + i * m, m, m) = -b_inv;
        b.psi21.segment(row, m) = b_inv * rems[i].e;
        b.rem_shape_inv.push_back(detail::symmetrize(b_inv.transpose() * b_inv));
        row += m;
    }

    // Constant pieces of the affine tau maps.
    b.m_u = Mat::Zero(cols, cols);
    b.m_u.topLeftCorner(n, n) = b.pred_shape_inv;
    row = n + m * L;
    for (int i = 0; i < L; ++i) {
        const Mat v_block = b.psi22.block(n + i * m, 0, m, cols);
        const Mat rv = b.r_inv[i] * v_block;
        b.m_v.push_back(detail::symmetrize(v_block.transpose() * rv));
        b.c_v.push_back(v_block.transpose() * (b.r_inv[i] * b.innovation[i]));
        b.q_v.push_back(b.innovation[i].dot(b.r_inv[i] * b.innovation[i]));
        if (!b.degenerate[i]) {
            const Mat h_block = b.psi22.block(row, 0, m, cols);
            const Vec p21 = b.psi21.segment(row, m);
            b.m_h.push_back(detail::symmetrize(h_block.transpose() * h_block));
            b.c_h.push_back(h_block.transpose() * p21);
            b.q_h.push_back(p21.squaredNorm());
            row += m;
        }
    }
    return b;
}

namespace {

// Reusable buffers for the tau-program functors; the solver and the grid
// oracle sweep millions of assignments, so these paths avoid allocating.
struct UpdateWorkspace {
    Mat gram;      // Psi22^T Xi22 Psi22
    Vec cross;     // Psi22^T Xi22 Psi21
    Mat feas;      // bordered feasibility matrix
    Mat rhs;       // selector columns for the objective solve
    Eigen::LLT<Mat> llt;
};

void accumulate_gram(const CentralizedBlocks& b, const TauAssignment& t, Mat& gram,
                     Vec& cross, double& quad) {
    gram = t.tau_u * b.m_u;
    cross.setZero(b.m_u.rows());
    quad = 0.0;
    int h = 0;
    for (int i = 0; i < b.L; ++i) {
        const double tv = t.extras(i);
        gram
            .noalias() += tv * b.m_v[i];
        cross.noalias() += tv * b.c_v[i];
        quad += tv * b.q_v[i];
        if (!b.degenerate[i]) {
            const double th = t.extras(b.h_extra_index[i]);
            gram.noalias() += th * b.m_h[h];
            cross.noalias() += th * b.c_h[h];
            quad += th * b.q_h[h];
            ++h;
        }
    }
}

double update_objective(const CentralizedBlocks& b, const SizeObjective& obj,
                        const TauAssignment& t, UpdateWorkspace& w) {
    double quad = 0.0;
    accumulate_gram(b, t, w.gram, w.cross, quad);
    w.llt.compute(w.gram);
    if (w.llt.info() != Eigen::Success) return kInf;
    const int cols = static_cast<int>(w.gram.rows());
    w.rhs.setZero(cols, b.n);
    w.rhs.topLeftCorner(b.n, b.n).setIdentity();
    w.llt.solveInPlace(w.rhs);
    // B M^{-1} B^T is the leading n x n block of the solve result.
    if (obj.kind() == SizeObjective::Kind::Trace) {
        return w.rhs.topLeftCorner(b.n, b.n).trace();
    }
    return obj.weights().dot(w.rhs.topLeftCorner(b.n, b.n).diagonal());
}

void update_feasibility(const CentralizedBlocks& b, const TauAssignment& t,
                        UpdateWorkspace& w, Mat& out) {
    double quad = 0.0;
    accumulate_gram(b, t, w.gram, w.cross, quad);
    const int cols = static_cast<int>(w.gram.rows());
    double slack = 1.0 - t.tau_u - t.extras.sum();
    out.resize(1 + cols, 1 + cols);
    out(0, 0) = slack + quad;
    out.block(0, 1, 1, cols) = w.cross.transpose();
    out.block(1, 0, cols, 1) = w.cross;
    out.bottomRightCorner(cols, cols) = w.gram;
}

} // namespace

TauProblem centralized_tau_problem(std::shared_ptr<const CentralizedBlocks> blocks,
                                   const SizeObjective& obj) {
    auto workspace = std::make_shared<UpdateWorkspace>();
    TauProblem p;
    p.dim = blocks->reduced_dim();
    p.objective = [blocks, workspace, obj](const TauAssignment& t) {
        return update_objective(*blocks, obj, t, *workspace);
    };
    p.feasibility = [blocks, workspace](const TauAssignment& t, Mat& out) {
        update_feasibility(*blocks, t, *workspace, out);
    };
    return p;
}

Mat centralized_shape_from_tau(const CentralizedBlocks& b, const TauAssignment& full) {
    Mat info = full.tau_u * b.pred_shape_inv;
    for (int i = 0; i < b.L; ++i) {
        const double tv = full.extras(i);
        if (tv <= 0.0) continue;  // (R/tau_v + ...)^{-1} -> 0
        if (b.degenerate[i]) {
            info.noalias() += tv * b.jac[i].transpose() * b.r_inv[i] * b.jac[i];
            continue;
        }
        const double th = full.extras(b.L + i);
        if (th <= 0.0) continue;
        const Mat mix = spd_inverse(Mat(b.r[i] / tv + b.rem_shape[i] / th),
                                    "centralized_shape_from_tau: sensor mix");
        info.noalias() += b.jac[i].transpose() * mix * b.jac[i];
    }
    return spd_inverse(info, "centralized_shape_from_tau: information matrix");
}

Mat centralized_decoupled_shape(const CentralizedBlocks& b, const TauAssignment& full) {
    const TauAssignment t = b.reduce(full);
    Mat gram;
    Vec cross;
    double quad = 0.0;
    {
        Mat g;
        Vec c;
        accumulate_gram(b, t, g, c, quad);
        gram = std::move(g);
        cross = std::move(c);
    }
    Eigen::LLT<Mat> llt(gram);
    if (llt.info() != Eigen::Success) {
        throw NotPositiveDefinite("centralized_decoupled_shape: Gram matrix singular");
    }
    Mat rhs = Mat::Zero(gram.rows(), b.n);
    rhs.topLeftCorner(b.n, b.n).setIdentity();
    llt.solveInPlace(rhs);
    return detail::symmetrize(rhs.topLeftCorner(b.n, b.n));
}

Vec centralized_decoupled_center(const CentralizedBlocks& b, const TauAssignment& full) {
    const TauAssignment t = b.reduce(full);
    Mat gram;
    Vec cross;
    double quad = 0.0;
    accumulate_gram(b, t, gram, cross, quad);
    Eigen::LLT<Mat> llt(gram);
    if (llt.info() != Eigen::Success) {
        throw NotPositiveDefinite("centralized_decoupled_center: Gram matrix singular");
    }
    const Vec sol = llt.solve(cross);
    return b.pred_center + sol.head(b.n);
}

Vec centralized_center_from_tau(const CentralizedBlocks& b, const Mat& fused_shape,
                                const TauAssignment& full) {
    const int n = b.n;
    const int m = b.m;

    Mat m1_inv = full.tau_u * b.pred_shape_inv;
    for (int i = 0; i < b.L; ++i) {
        m1_inv.noalias() += full.extras(i) * b.jac[i].transpose() * b.r_inv[i] * b.jac[i];
    }
    const Mat m1 = spd_inverse(m1_inv, "centralized_center_from_tau: M1");

    // Per sensor: a = (tau_v R^{-1} + tau_h P_h^{-1})^{-1}; for degenerate
    // remainders the limit P_h -> 0 gives a = 0 and a*tau_h*P_h^{-1} = I.
    std::vector<Mat> a(b.L);
    for (int i = 0; i < b.L; ++i) {
        if (b.degenerate[i]) {
            a[i] = Mat::Zero(m, m);
            continue;
        }
        const double tv = full.extras(i);
        const double th = full.extras(b.L + i);
        a[i] = spd_inverse(Mat(tv * b.r_inv[i] + th * b.rem_shape_inv[i]),
                           "centralized_center_from_tau: mix");
    }

    Mat m2 = Mat::Identity(n, n);
    for (int i = 0; i < b.L; ++i) {
        if (b.degenerate[i]) continue;
        const double tv = full.extras(i);
        m2.noalias() += tv * b.jac[i].transpose() * b.r_inv[i] * a[i] * tv * b.r_inv[i] *
                        b.jac[i] * fused_shape;
    }
    const Mat m1m2 = m1 * m2;

    Vec correction = Vec::Zero(n);
    for (int i = 0; i < b.L; ++i) {
        const double tv = full.extras(i);
        if (b.degenerate[i]) {
            correction.noalias() += tv * b.jac[i].transpose() * (b.r_inv[i] * b.rem_center[i]);
        } else {
            const double th = full.extras(b.L + i);
            correction.noalias() += tv * b.jac[i].transpose() *
                                    (b.r_inv[i] * (a[i] * (th * b.rem_shape_inv[i] * b.rem_center[i])));
        }
    }
    correction = m1m2 * correction;

    Vec center = b.pred_center - correction;
    for (int i = 0; i < b.L; ++i) {
        const double tv = full.extras(i);
        Mat gain = fused_shape * b.jac[i].transpose() * b.r_inv[i];
        if (!b.degenerate[i]) {
            gain.noalias() -= m1m2 * b.jac[i].transpose() * b.r_inv[i] * a[i] * tv * b.r_inv[i];
        }
        center.noalias() += tv * gain * (-b.innovation[i]);
    }
    return center;
}

FusionResult fuse_update(const Ellipsoid& pred, const SystemModel& model,
                         const std::vector<Vec>& measurements,
                         const std::vector<RemainderBound>& rems,
                         const SizeObjective& obj, int budget) {
    auto blocks = std::make_shared<CentralizedBlocks>(
        build_blocks(pred, model, measurements, rems));
    const TauProblem problem = centralized_tau_problem(blocks, obj);
    if (budget <= 0) budget = 500 * problem.dim;

    auto start = make_interior(
        problem, TauAssignment::from_vector(Vec::Constant(problem.dim, 0.5)));
    if (!start) {
        start = make_interior(
            problem,
            TauAssignment::from_vector(Vec::Constant(problem.dim, 1.0 / (problem.dim + 1))));
    }
    if (!start || start->tau_u <= 0.0 || (start->extras.array() <= 0.0).any()) {
        return FusionResult{pred, TauAssignment::from_vector(Vec::Zero(blocks->full_dim())),
                            false, objective_value(obj, pred.shape())};
    }

    const SolveResult sol = solve(problem, *start, budget);
    const TauAssignment full = blocks->expand(sol.tau);

    Mat shape = centralized_shape_from_tau(*blocks, full);
    Vec center = centralized_center_from_tau(*blocks, detail::symmetrize(shape), full);
    Ellipsoid fused(std::move(center), detail::symmetrize(shape));
    return FusionResult{std::move(fused), full, true, sol.value};
}

Mat update_containment_matrix(const CentralizedBlocks& b, const Ellipsoid& candidate,
                              const TauAssignment& full) {
    if (candidate.dim() != b.n) {
        throw DimensionMismatch("update_containment_matrix: candidate dimension mismatch");
    }
    const TauAssignment t = b.reduce(full);
    Mat gram;
    Vec cross;
    double quad = 0.0;
    accumulate_gram(b, t, gram, cross, quad);

    const int n = b.n;
    const int cols = static_cast<int>(gram.rows());
    const Vec z = candidate.center() - b.pred_center;
    const double slack = 1.0 - t.tau_u - t.extras.sum();

    Mat big = Mat::Zero(n + 1 + cols, n + 1 + cols);
    big.topLeftCorner(n, n) = candidate.shape();
    big.block(0, n, n, 1) = z;
    big.block(n, 0, 1, n) = z.transpose();
    big.block(0, n + 1, n, cols).topLeftCorner(n, n).setIdentity();  // selector B
    big.block(n + 1, 0, cols, n).topLeftCorner(n, n).setIdentity();
    big(n, n) = slack + quad;
    big.block(n, n + 1, 1, cols) = cross.transpose();
    big.block(n + 1, n, cols, 1) = cross;
    big.bottomRightCorner(cols, cols) = gram;
    return detail::symmetrize(big);
}

} // namespace smf
