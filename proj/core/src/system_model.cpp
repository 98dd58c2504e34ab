#include "smfusion/system_model.hpp"

#include <cmath>

namespace smf {

double wrap_angle(double a) {
    // Reduce into (-pi, pi]
    a = std::remainder(a, 2.0 * M_PI);
    if (a <= -M_PI) a += 2.0 * M_PI;
    return a;
}

Vec SystemModel::wrap_measurement_diff(Vec d) const {
    const double scale = angle_period / (2.0 * M_PI);
    for (int j = 0; j < meas_dim && j < static_cast<int>(angle_components.size()); ++j) {
        if (angle_components[j]) d(j) = scale * wrap_angle(d(j) / scale);
    }
    return d;
}

Vec SystemModel::canonical_measurement_diff(Vec d) const {
    if (!measurements_mod2pi) return d;
    return wrap_measurement_diff(std::move(d));
}

Mat numeric_jacobian(const VectorMap& map, const Vec& x) {
    const Vec f0 = map(x);
    if (!f0.allFinite()) {
        throw EvaluationFailure("numeric_jacobian: map not finite at base point");
    }
    Mat jac(f0.size(), x.size());
    Vec probe = x;
    for (Eigen::Index j = 0; j < x.size(); ++j) {
        const double step = 1e-6 * (1.0 + std::abs(x(j)));
        probe(j) = x(j) + step;
        const Vec fp = map(probe);
        probe(j) = x(j) - step;
        const Vec fm = map(probe);
        probe(j) = x(j);
        if (!fp.allFinite() || !fm.allFinite()) {
            throw EvaluationFailure("numeric_jacobian: map not finite at probe point");
        }
        jac.col(j) = (fp - fm) / (2.0 * step);
    }
    return jac;
}

SystemModel tracking_model(double T, double sigma2,
                           const std::vector<Eigen::Vector2d>& sensors,
                           bool cv_standard, bool bearing_degrees) {
    if (T <= 0.0) throw InvalidParameter("tracking_model: T must be positive");
    if (sigma2 <= 0.0) throw InvalidParameter("tracking_model: sigma2 must be positive");
    if (sensors.empty()) throw InvalidParameter("tracking_model: need at least one sensor");

    SystemModel model;
    model.state_dim = 4;
    model.meas_dim = 2;
    model.sensor_count = static_cast<int>(sensors.size());

    Mat F(4, 4);
    F << 1, 0, T, 0,
         0, 1, 0, T,
         0, 0, 1, (cv_standard ? 0.0 : 1.0),
         0, 0, 0, 1;

    model.f = [F](const Vec& x) -> Vec { return F * x; };
    model.jac_f = [F](const Vec&) -> Mat { return F; };

    const double T2 = T * T;
    const double T3 = T2 * T;
    Mat Q(4, 4);
    Q << T3 / 3, 0,      T2 / 2, 0,
         0,      T3 / 3, 0,      T2 / 2,
         T2 / 2, 0,      T,      0,
         0,      T2 / 2, 0,      T;
    model.Q = sigma2 * Q;

    Mat R(2, 2);
    R << 0.01, 0,
         0,    25;

    const double bearing_scale = bearing_degrees ? 180.0 / M_PI : 1.0;
    for (const auto& z : sensors) {
        model.h.push_back([z, bearing_scale](const Vec& x) -> Vec {
            const double dx = x(0) - z(0);
            const double dy = x(1) - z(1);
            Vec y(2);
            y(0) = std::sqrt(dx * dx + dy * dy);
            y(1) = bearing_scale * std::atan2(dy, dx);
            return y;
        });
        model.jac_h.push_back([z, bearing_scale](const Vec& x) -> Mat {
            const double dx = x(0) - z(0);
            const double dy = x(1) - z(1);
            const double r2 = dx * dx + dy * dy;
            const double r = std::sqrt(r2);
            Mat jac = Mat::Zero(2, 4);
            jac(0, 0) = dx / r;
            jac(0, 1) = dy / r;
            jac(1, 0) = -bearing_scale * dy / r2;
            jac(1, 1) = bearing_scale * dx / r2;
            return jac;
        });
        model.R.push_back(R);
    }
    model.angle_components = {false, true};
    model.angle_period = bearing_degrees ? 360.0 : 2.0 * M_PI;
    return model;
}

} // namespace smf
