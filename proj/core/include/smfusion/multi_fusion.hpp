#pragma once

#include <functional>
#include <vector>

#include "smfusion/distributed.hpp"
#include "smfusion/ellipsoid.hpp"

namespace smf {

/// Collection of diagonal weight vectors; each drives one parallel fusion
/// pipeline that squashes the bounding ellipsoid along its emphasized
/// axes.
struct WeightBank {
    std::vector<Vec> weights;

    /// Validates every vector as a SizeObjective weight vector.
    void validate() const;
    int size() const { return static_cast<int>(weights.size()); }
};

struct AxisInterval {
    double lo = 0.0;
    double hi = 0.0;
    double half_width() const { return 0.5 * (hi - lo); }
};

/// Per-axis projection intervals of a set of ellipsoids and their
/// intersection.
struct AxisIntervalSet {
    std::vector<std::vector<AxisInterval>> per_member;  // [member][axis]
    std::vector<AxisInterval> intersection;             // [axis]

    Vec half_widths() const;
    bool contains(const Vec& x, double tol = 0.0) const;
};

/// Advances each weighted pipeline by one fusion step. The step function
/// receives the pipeline's current ellipsoid, its weighted size objective
/// and its member index (for deriving per-pipeline seeds); pipelines never
/// share intermediate ellipsoids.
using FusionStepFn =
    std::function<Ellipsoid(const Ellipsoid& state, const SizeObjective& obj, int member)>;

std::vector<Ellipsoid> run_parallel(const FusionStepFn& step, const WeightBank& bank,
                                    const std::vector<Ellipsoid>& states);

/// Intersects the per-axis projection intervals [c_i - sqrt(P_ii),
/// c_i + sqrt(P_ii)] of the given ellipsoids. Throws EmptyIntersection if
/// some axis intersection is empty.
AxisIntervalSet intersect_axis_bounds(const std::vector<Ellipsoid>& ellipsoids);

/// Outer ellipsoid of the members' intersection, computed by the
/// distributed fusion step with the first member in the prediction slot.
FusionResult intersection_outer_ellipsoid(const std::vector<Ellipsoid>& members,
                                          const SizeObjective& obj);

} // namespace smf
