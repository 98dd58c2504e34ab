#include "smfusion/ellipsoid.hpp"

#include <cmath>
#include <utility>

namespace smf {

namespace detail {

double asymmetry(const Mat& m) {
    const double scale = m.cwiseAbs().maxCoeff();
    if (scale == 0.0) return 0.0;
    return (m - m.transpose()).cwiseAbs().maxCoeff() / scale;
}

Mat symmetrize(const Mat& m) {
    return 0.5 * (m + m.transpose());
}

} // namespace detail

Mat cholesky_factor(const Mat& shape) {
    if (shape.rows() != shape.cols()) {
        throw DimensionMismatch("cholesky_factor: matrix is not square");
    }
    if (detail::asymmetry(shape) > 1e-10) {
        throw NotSymmetric("cholesky_factor: matrix is not symmetric");
    }
    Eigen::LLT<Mat> llt(detail::symmetrize(shape));
    if (llt.info() != Eigen::Success) {
        throw NotPositiveDefinite("cholesky_factor: matrix is not positive definite");
    }
    return llt.matrixL();
}

double min_eigenvalue(const Mat& m) {
    if (m.rows() != m.cols()) {
        throw DimensionMismatch("min_eigenvalue: matrix is not square");
    }
    if (detail::asymmetry(m) > 1e-10) {
        throw NotSymmetric("min_eigenvalue: matrix is not symmetric");
    }
    if (m.rows() == 1) return m(0, 0);
    Eigen::SelfAdjointEigenSolver<Mat> es(detail::symmetrize(m), Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

Ellipsoid::Ellipsoid(Vec center, const Mat& shape) : center_(std::move(center)) {
    if (shape.rows() != shape.cols() || shape.rows() != center_.size()) {
        throw DimensionMismatch("Ellipsoid: center/shape dimensions disagree");
    }
    if (detail::asymmetry(shape) > 1e-10) {
        throw NotSymmetric("Ellipsoid: shape matrix is not symmetric");
    }
    shape_ = detail::symmetrize(shape);

    Eigen::LLT<Mat> llt(shape_);
    if (llt.info() != Eigen::Success) {
        // Degenerate (e.g. all-zero) shapes are regularized once; genuinely
        // indefinite input still fails.
        const double eps = 1e-12 * std::max(1.0, shape_.trace());
        shape_ += eps * Mat::Identity(shape_.rows(), shape_.cols());
        llt.compute(shape_);
        if (llt.info() != Eigen::Success) {
            throw NotPositiveDefinite("Ellipsoid: shape matrix is not positive definite");
        }
    }
    factor_ = llt.matrixL();
}

double Ellipsoid::membership_value(const Vec& x) const {
    if (x.size() != center_.size()) {
        throw DimensionMismatch("Ellipsoid::membership_value: point dimension mismatch");
    }
    // ||E^{-1}(x - c)||^2 via one triangular solve
    const Vec d = x - center_;
    const Vec y = factor_.triangularView<Eigen::Lower>().solve(d);
    return y.squaredNorm();
}

bool Ellipsoid::contains(const Vec& x, double tol) const {
    return membership_value(x) <= 1.0 + tol;
}

double Ellipsoid::axis_error_bound(Eigen::Index axis) const {
    if (axis < 0 || axis >= shape_.rows()) {
        throw IndexOutOfRange("Ellipsoid::axis_error_bound: axis out of range");
    }
    return std::sqrt(shape_(axis, axis));
}

SizeObjective SizeObjective::trace() {
    return SizeObjective(Kind::Trace, Vec());
}

SizeObjective SizeObjective::weighted_diag(Vec weights) {
    if (weights.size() == 0) {
        throw InvalidParameter("SizeObjective: empty weight vector");
    }
    if ((weights.array() <= 0.0).any()) {
        throw InvalidParameter("SizeObjective: weights must be strictly positive");
    }
    if (std::abs(weights.sum() - 1.0) > 1e-12) {
        throw InvalidParameter("SizeObjective: weights must sum to one");
    }
    return SizeObjective(Kind::WeightedDiag, std::move(weights));
}

double objective_value(const SizeObjective& obj, const Mat& shape) {
    if (shape.rows() != shape.cols()) {
        throw DimensionMismatch("objective_value: matrix is not square");
    }
    if (obj.kind() == SizeObjective::Kind::Trace) {
        return shape.trace();
    }
    if (obj.weights().size() != shape.rows()) {
        throw DimensionMismatch("objective_value: weight/shape dimension mismatch");
    }
    return obj.weights().dot(shape.diagonal());
}

double weighted_trace(const SizeObjective& obj, const Mat& m) {
    if (obj.kind() == SizeObjective::Kind::Trace) {
        return m.trace();
    }
    if (obj.weights().size() != m.rows()) {
        throw DimensionMismatch("weighted_trace: weight/shape dimension mismatch");
    }
    return obj.weights().dot(m.diagonal());
}

} // namespace smf
