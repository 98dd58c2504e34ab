#include "smfusion/multi_fusion.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace smf {

void WeightBank::validate() const {
    if (weights.empty()) {
        throw InvalidParameter("WeightBank: empty bank");
    }
    for (const auto& w : weights) {
        (void)SizeObjective::weighted_diag(w);
    }
}

Vec AxisIntervalSet::half_widths() const {
    Vec hw(intersection.size());
    for (std::size_t i = 0; i < intersection.size(); ++i) {
        hw(static_cast<Eigen::Index>(i)) = intersection[i].half_width();
    }
    return hw;
}

bool AxisIntervalSet::contains(const Vec& x, double tol) const {
    if (static_cast<std::size_t>(x.size()) != intersection.size()) {
        throw DimensionMismatch("AxisIntervalSet::contains: dimension mismatch");
    }
    for (std::size_t i = 0; i < intersection.size(); ++i) {
        const double v = x(static_cast<Eigen::Index>(i));
        if (v < intersection[i].lo - tol || v > intersection[i].hi + tol) return false;
    }
    return true;
}

std::vector<Ellipsoid> run_parallel(const FusionStepFn& step, const WeightBank& bank,
                                    const std::vector<Ellipsoid>& states) {
    bank.validate();
    if (states.size() != bank.weights.size()) {
        throw DimensionMismatch("run_parallel: one state per weight vector required");
    }
    std::vector<Ellipsoid> out;
    out.reserve(states.size());
    for (int i = 0; i < bank.size(); ++i) {
        out.push_back(step(states[i], SizeObjective::weighted_diag(bank.weights[i]), i));
    }
    return out;
}

AxisIntervalSet intersect_axis_bounds(const std::vector<Ellipsoid>& ellipsoids) {
    if (ellipsoids.empty()) {
        throw InvalidParameter("intersect_axis_bounds: empty input");
    }
    const Eigen::Index n = ellipsoids.front().dim();
    AxisIntervalSet set;
    set.per_member.resize(ellipsoids.size());
    set.intersection.assign(n, AxisInterval{-std::numeric_limits<double>::infinity(),
                                            std::numeric_limits<double>::infinity()});
    for (std::size_t j = 0; j < ellipsoids.size(); ++j) {
        const auto& e = ellipsoids[j];
        if (e.dim() != n) {
            throw DimensionMismatch("intersect_axis_bounds: dimension mismatch");
        }
        set.per_member[j].resize(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            const double r = e.axis_error_bound(i);
            const AxisInterval iv{e.center()(i) - r, e.center()(i) + r};
            set.per_member[j][i] = iv;
            auto& x = set.intersection[i];
            x.lo = std::max(x.lo, iv.lo);
            x.hi = std::min(x.hi, iv.hi);
        }
    }
    for (Eigen::Index i = 0; i < n; ++i) {
        if (set.intersection[i].lo > set.intersection[i].hi) {
            throw EmptyIntersection("intersect_axis_bounds: empty intersection on axis " +
                                    std::to_string(i));
        }
    }
    return set;
}

FusionResult intersection_outer_ellipsoid(const std::vector<Ellipsoid>& members,
                                          const SizeObjective& obj) {
    if (members.empty()) {
        throw InvalidParameter("intersection_outer_ellipsoid: empty input");
    }
    return fuse_distributed(members.front(), members, obj);
}

} // namespace smf
