#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include <Eigen/Dense>

namespace smf {

/// Mixes two 64-bit values into a fresh seed (splitmix64 finalizer).
/// Used to derive independent, reproducible substreams from a master seed.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Deterministic random stream. Wraps mt19937_64 but produces doubles
/// through fixed arithmetic (no std::*_distribution) so that a given seed
/// yields the same sequence on every platform and standard library.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform in [0, 1).
    double uniform01() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    /// Standard normal via Box-Muller; caches the second value.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = uniform01();
        double u2 = uniform01();
        while (u1 <= 0.0) u1 = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * M_PI * u2;
        spare_ = r * std::sin(a);
        has_spare_ = true;
        return r * std::cos(a);
    }

    Eigen::VectorXd normal_vector(Eigen::Index n) {
        Eigen::VectorXd v(n);
        for (Eigen::Index i = 0; i < n; ++i) v(i) = normal();
        return v;
    }

    /// Uniform draw from the closed unit ball in R^n
    /// (normalized Gaussian direction scaled by U^(1/n)).
    Eigen::VectorXd unit_ball(Eigen::Index n) {
        Eigen::VectorXd dir = normal_vector(n);
        double norm = dir.norm();
        while (norm == 0.0) {
            dir = normal_vector(n);
            norm = dir.norm();
        }
        const double radius = std::pow(uniform01(), 1.0 / static_cast<double>(n));
        return dir * (radius / norm);
    }

    /// Uniform draw from the unit sphere surface in R^n.
    Eigen::VectorXd unit_sphere(Eigen::Index n) {
        Eigen::VectorXd dir = normal_vector(n);
        double norm = dir.norm();
        while (norm == 0.0) {
            dir = normal_vector(n);
            norm = dir.norm();
        }
        return dir / norm;
    }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

} // namespace smf
