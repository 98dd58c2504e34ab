#pragma once

#include <cstdint>
#include <functional>

#include "smfusion/ellipsoid.hpp"
#include "smfusion/system_model.hpp"

namespace smf {

/// Ellipsoid covering the linearization remainders of a nonlinear map over
/// the current state ellipsoid: every sampled remainder r satisfies
/// (r - e)^T P^{-1} (r - e) <= 1, with P = B * B^T.
struct RemainderBound {
    Vec e;  // center
    Mat P;  // shape (diagonal by construction, floored away from zero)
    Mat B;  // factor, P = B * B^T

    /// A bound is degenerate when its shape carries no real extent
    /// (e.g. the remainder of a linear map). Such bounds take the exact
    /// linear branch in the fusion formulas.
    bool is_degenerate() const { return P.trace() < 1e-12; }
};

/// Options for remainder sampling.
struct RemainderOptions {
    int samples = 500;
    double inflate = 1.05;
    /// Optional wrap applied to map-output differences (angle components).
    std::function<Vec(Vec)> residual_wrap;
};

/// Covers the remainders r(u) = map(center + E u) - map(center) - jac * E * u
/// over the unit ball ||u|| <= 1 by an axis-aligned box ellipsoid.
///
/// Draws `samples` points uniformly from the ball and always adds the
/// origin and the 2n axis unit vectors. Per output axis the box is
/// [min r, max r]; half-widths are inflated by `inflate` and floored at
/// 1e-12 * (1 + ||e||); the box (corners included) is enclosed by the
/// ellipsoid P = dim * diag(hw^2). Identical seeds give bit-identical
/// results.
RemainderBound bound_remainder(const VectorMap& map, const Vec& center,
                               const Mat& factor, const Mat& jac,
                               int samples, std::uint64_t seed,
                               double inflate = 1.05,
                               const std::function<Vec(Vec)>& residual_wrap = {});

} // namespace smf
