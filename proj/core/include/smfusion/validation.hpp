#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "smfusion/ellipsoid.hpp"

namespace smf {

/// Result of one oracle-equivalence check.
struct CheckResult {
    std::string name;
    bool passed = false;
    std::string detail;
    double seconds = 0.0;
};

/// Instance counts and grid resolutions of the oracle-equivalence suite.
/// The defaults match the acceptance thresholds; `quick` shrinks the
/// instance counts for an interactive run.
struct ValidationOptions {
    int prediction_instances = 200;
    int prediction_resolution = 200;
    int update_instances = 50;
    int update_resolution = 60;
    int distributed_instances = 50;
    int distributed_resolution = 60;
    std::uint64_t seed = 20257;

    static ValidationOptions quick();
};

/// Closed-form time update versus the grid oracle on random instances.
CheckResult check_prediction_optimality(const ValidationOptions& opt);

/// Centralized update objective versus the grid oracle, plus the
/// decoupled-shape identity at random feasible multipliers.
CheckResult check_update_oracle(const ValidationOptions& opt);

/// Distributed update objective versus the grid oracle, plus the
/// identical-ellipsoid fixed point.
CheckResult check_distributed_oracle(const ValidationOptions& opt);

/// Classical bounding-ellipsoid reductions: scalar sum-of-square-roots
/// prediction identity and the linear-measurement update against an
/// independently coded reference update.
CheckResult check_schweppe_reductions(const ValidationOptions& opt);

std::vector<CheckResult> run_validation_suite(const ValidationOptions& opt);

/// Reference bounding-ellipsoid measurement update for a linear
/// measurement y = J x + v with v in the R ellipsoid, at fixed
/// multipliers. Kept as straight-line code independent of the fusion
/// modules; used only for cross-checks.
struct ReferenceUpdate {
    Mat shape;
    Vec center;
};
ReferenceUpdate schweppe_reference_update(const Vec& center, const Mat& shape, const Mat& jac,
                                          const Mat& noise_shape, const Vec& measurement,
                                          double tau_u, double tau_v);

} // namespace smf
