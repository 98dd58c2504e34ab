#pragma once

#include <Eigen/Dense>

#include "smfusion/errors.hpp"

namespace smf {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Lower-triangular Cholesky factor E of a symmetric positive-definite
/// matrix, with shape = E * E^T. Throws NotPositiveDefinite if a pivot
/// fails.
Mat cholesky_factor(const Mat& shape);

/// Smallest eigenvalue of a symmetric matrix, via Eigen's symmetric
/// (tridiagonalization-based) solver. Throws NotSymmetric if the input is
/// asymmetric beyond 1e-10 relative to its largest entry.
double min_eigenvalue(const Mat& m);

/// Bounding ellipsoid {x : (x - center)^T shape^{-1} (x - center) <= 1}.
///
/// The shape matrix is symmetrized on construction and, if it is not
/// positive definite (e.g. an exactly zero matrix from a linear-map
/// remainder), regularized by adding eps*I with
/// eps = 1e-12 * max(1, trace). The Cholesky factor is computed once and
/// cached; instances are immutable afterwards.
class Ellipsoid {
public:
    Ellipsoid(Vec center, const Mat& shape);

    const Vec& center() const { return center_; }
    const Mat& shape() const { return shape_; }

    /// Lower-triangular factor E with shape = E * E^T.
    const Mat& factor() const { return factor_; }

    Eigen::Index dim() const { return center_.size(); }

    /// Membership test: (x - c)^T P^{-1} (x - c) <= 1 + tol.
    bool contains(const Vec& x, double tol) const;

    /// Value of the membership quadratic form at x.
    double membership_value(const Vec& x) const;

    /// Half-length of the ellipsoid's projection onto a coordinate axis,
    /// sqrt(P_ii).
    double axis_error_bound(Eigen::Index axis) const;

private:
    Vec center_;
    Mat shape_;
    Mat factor_;
};

/// Size measure of a shape matrix: plain trace or a weighted sum of
/// diagonal entries with strictly positive weights summing to one.
class SizeObjective {
public:
    enum class Kind { Trace, WeightedDiag };

    static SizeObjective trace();
    static SizeObjective weighted_diag(Vec weights);

    Kind kind() const { return kind_; }
    const Vec& weights() const { return weights_; }

private:
    SizeObjective(Kind kind, Vec weights) : kind_(kind), weights_(std::move(weights)) {}
    Kind kind_;
    Vec weights_;
};

/// Evaluates a SizeObjective on a (square) shape matrix.
double objective_value(const SizeObjective& obj, const Mat& shape);

/// Weighted trace tr(diag(w) * m) where w comes from the objective
/// (all-ones for the trace kind). The prediction closed form only ever
/// needs these weighted traces.
double weighted_trace(const SizeObjective& obj, const Mat& m);

namespace detail {
/// Symmetry residual relative to the largest absolute entry.
double asymmetry(const Mat& m);
/// (m + m^T) / 2
Mat symmetrize(const Mat& m);
} // namespace detail

} // namespace smf
