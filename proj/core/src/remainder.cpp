#include "smfusion/remainder.hpp"

#include <cmath>

#include "smfusion/rng.hpp"

namespace smf {

RemainderBound bound_remainder(const VectorMap& map, const Vec& center,
                               const Mat& factor, const Mat& jac,
                               int samples, std::uint64_t seed,
                               double inflate,
                               const std::function<Vec(Vec)>& residual_wrap) {
    if (samples < 100) {
        throw InvalidSampleCount("bound_remainder: need at least 100 samples");
    }
    const Eigen::Index n = center.size();
    if (factor.rows() != n || factor.cols() != n) {
        throw DimensionMismatch("bound_remainder: factor dimension mismatch");
    }

    const Vec f0 = map(center);
    if (!f0.allFinite()) {
        throw EvaluationFailure("bound_remainder: map not finite at center");
    }
    const Eigen::Index dim = f0.size();
    if (jac.rows() != dim || jac.cols() != n) {
        throw DimensionMismatch("bound_remainder: jacobian dimension mismatch");
    }

    Vec lo = Vec::Zero(dim);  // origin has zero remainder, so the box
    Vec hi = Vec::Zero(dim);  // always starts at 0
    const Mat jac_factor = jac * factor;

    auto absorb = [&](const Vec& u) {
        const Vec shift = factor * u;
        Vec diff = map(center + shift) - f0;
        if (!diff.allFinite()) {
            throw EvaluationFailure("bound_remainder: map not finite at sample point");
        }
        if (residual_wrap) diff = residual_wrap(std::move(diff));
        const Vec r = diff - jac_factor * u;
        lo = lo.cwiseMin(r);
        hi = hi.cwiseMax(r);
    };

    for (Eigen::Index i = 0; i < n; ++i) {
        Vec u = Vec::Zero(n);
        u(i) = 1.0;
        absorb(u);
        u(i) = -1.0;
        absorb(u);
    }
    Rng rng(seed);
    for (int s = 0; s < samples; ++s) {
        absorb(rng.unit_ball(n));
    }

    RemainderBound bound;
    bound.e = 0.5 * (lo + hi);
    const double floor = 1e-12 * (1.0 + bound.e.norm());
    Vec hw = (0.5 * inflate * (hi - lo)).cwiseMax(floor);
    // sqrt(dim)-scaled box enclosure keeps the corners inside
    bound.B = std::sqrt(static_cast<double>(dim)) * Mat(hw.asDiagonal());
    bound.P = static_cast<double>(dim) * Mat(hw.cwiseProduct(hw).asDiagonal());
    return bound;
}

} // namespace smf
