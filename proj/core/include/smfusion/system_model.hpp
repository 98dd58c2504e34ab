#pragma once

#include <functional>
#include <vector>

#include "smfusion/ellipsoid.hpp"

namespace smf {

using VectorMap = std::function<Vec(const Vec&)>;
using JacobianMap = std::function<Mat(const Vec&)>;

/// Wraps an angle difference into (-pi, pi].
double wrap_angle(double a);

/// Nonlinear multisensor dynamic system:
///   x_{k+1}   = f(x_k) + w_k,             w bounded by the Q ellipsoid
///   y_k^i     = h_i(x_k) + v_k^i,         v^i bounded by the R_i ellipsoid
/// with one measurement map per sensor, all of common dimension m.
struct SystemModel {
    int state_dim = 0;
    int meas_dim = 0;
    int sensor_count = 0;

    VectorMap f;
    JacobianMap jac_f;
    std::vector<VectorMap> h;
    std::vector<JacobianMap> jac_h;

    Mat Q;               // process-noise shape matrix, state_dim x state_dim
    std::vector<Mat> R;  // per-sensor measurement-noise shape matrices

    /// Marks measurement components that are angles.
    std::vector<bool> angle_components;

    /// Full turn of the angle components (2*pi for radians, 360 for
    /// degrees).
    double angle_period = 2.0 * M_PI;

    /// True when the sensor reports angle components reduced modulo 2*pi.
    /// Only then do innovation and remainder differences need wrapping;
    /// for raw (unreduced) angle readings the raw difference is the
    /// correct one, and modular reduction would discard information
    /// whenever the legitimate innovation exceeds pi (the bearing noise
    /// bound in the bundled scenario is larger than pi, so its sensors
    /// are modeled as raw).
    bool measurements_mod2pi = false;

    /// Wraps the angle components of a measurement-space difference.
    Vec wrap_measurement_diff(Vec d) const;

    /// Applies wrap_measurement_diff only when the sensor is modular.
    Vec canonical_measurement_diff(Vec d) const;
};

/// Central-difference Jacobian of `map` at x, column step 1e-6 * (1 + |x_j|).
/// Throws EvaluationFailure if the map is not finite at a probe point.
Mat numeric_jacobian(const VectorMap& map, const Vec& x);

/// Constant-velocity planar tracking model with range/bearing sensors.
///
/// State (px, py, vx, vy); transition matrix
///   [1 0 T 0; 0 1 0 T; 0 0 1 1; 0 0 0 1]
/// (set cv_standard to replace the (3,4) entry by 0). Each sensor at
/// position z measures range and bearing to the target with noise shape
/// diag(0.01, 25). Process noise shape is the usual sigma2-scaled
/// integrated white-noise matrix.
///
/// With bearing_degrees the bearing channel is reported in degrees, which
/// reads the 25 of the noise shape as squared degrees (a 5-degree bound);
/// as squared radians the bearing bound would exceed pi and the channel
/// would carry no information.
SystemModel tracking_model(double T, double sigma2,
                           const std::vector<Eigen::Vector2d>& sensors,
                           bool cv_standard = false, bool bearing_degrees = false);

} // namespace smf
