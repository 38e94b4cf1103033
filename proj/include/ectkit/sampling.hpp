#pragma once

#include "ectkit/complex.hpp"
#include "ectkit/errors.hpp"
#include "ectkit/filtration.hpp"

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

namespace ectkit {

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

}  // namespace detail

/// Deterministic seeded generator. The stream is part of the external
/// contract: std::mt19937_64 (whose output sequence the C++ standard pins
/// down exactly) drives a 53-bit uniform in [0, 1) via
/// (x >> 11) * 2^-53, and normals come from the Box-Muller transform with
/// the second variate cached. Same seed, same stream, on every platform.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

    /// Independent sub-stream for a distinct purpose, derived via splitmix64
    /// so that sub-streams never depend on draw order.
    Rng fork(std::uint64_t stream) const {
        return Rng(detail::splitmix64(seed_ ^ detail::splitmix64(stream + 1)));
    }

    std::uint64_t seed() const { return seed_; }

    std::uint64_t next_raw() { return engine_(); }

    /// Uniform in [0, 1).
    double uniform() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Standard normal via Box-Muller on (0, 1] x [0, 1) uniforms.
    double normal() {
        if (has_cached_) {
            has_cached_ = false;
            return cached_;
        }
        const double u1 = 1.0 - uniform();  // (0, 1], keeps log finite
        const double u2 = uniform();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * std::numbers::pi * u2;
        cached_ = radius * std::sin(angle);
        has_cached_ = true;
        return radius * std::cos(angle);
    }

private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
    double cached_ = 0.0;
    bool has_cached_ = false;
};

/// k i.i.d. uniform directions on S^{d-1}, drawn as normalized standard
/// Gaussian vectors. For d = 2 the result carries its angle parameterization.
inline DirectionSet sample_directions_uniform(int k, int d, std::uint64_t seed) {
    if (k < 1 || d < 2) {
        throw validation_error("direction sampling needs k >= 1 and d >= 2");
    }
    Rng rng(seed);
    Matrix vectors(k, d);
    std::vector<double> angles;
    if (d == 2) angles.reserve(k);

    for (int j = 0; j < k; ++j) {
        Vector g(d);
        double norm = 0.0;
        do {
            for (int c = 0; c < d; ++c) g[c] = rng.normal();
            norm = g.norm();
        } while (norm < 1e-12);  // zero-norm draw: measure zero, redrawn
        g /= norm;
        if (d == 2) {
            angles.push_back(std::atan2(g[1], g[0]));
        } else {
            vectors.row(j) = g.transpose();
        }
    }
    if (d == 2) {
        return DirectionSet::from_angles(std::move(angles));
    }
    return DirectionSet::from_vectors(std::move(vectors));
}

/// k i.i.d. draws from Normal(0, 1); the angle initialization used when
/// learning directions.
inline std::vector<double> sample_angles_normal(int k, std::uint64_t seed) {
    if (k < 1) throw validation_error("angle sampling needs k >= 1");
    Rng rng(seed);
    std::vector<double> angles(k);
    for (int j = 0; j < k; ++j) angles[j] = rng.normal();
    return angles;
}

/// Geometry of the synthetic double annulus: two rings with centers on the
/// x-axis, sampled uniformly by area.
struct DoubleAnnulusGeometry {
    static constexpr double center_offset = 1.1;  ///< centers at (+-1.1, 0)
    static constexpr double inner_radius = 0.5;
    static constexpr double outer_radius = 1.0;
};

/// Raw double-annulus sample before unit-ball normalization. The first
/// ceil(n/2) points land in the left ring, the rest in the right one.
inline Matrix generate_double_annulus_raw(int n, std::uint64_t seed) {
    if (n < 1) throw validation_error("double annulus needs n >= 1");
    Rng rng(seed);
    Matrix points(n, 2);
    const int left = (n + 1) / 2;
    const double r_in2 = DoubleAnnulusGeometry::inner_radius * DoubleAnnulusGeometry::inner_radius;
    const double r_out2 = DoubleAnnulusGeometry::outer_radius * DoubleAnnulusGeometry::outer_radius;
    for (int i = 0; i < n; ++i) {
        const double center_x =
            (i < left) ? -DoubleAnnulusGeometry::center_offset : DoubleAnnulusGeometry::center_offset;
        const double radius = std::sqrt(r_in2 + (r_out2 - r_in2) * rng.uniform());
        const double angle = rng.uniform(0.0, 2.0 * std::numbers::pi);
        points(i, 0) = center_x + radius * std::cos(angle);
        points(i, 1) = radius * std::sin(angle);
    }
    return points;
}

/// Double annulus scaled into the unit ball (ready for the [-1, 1] grid).
inline Matrix generate_double_annulus(int n, std::uint64_t seed) {
    return normalize_points_to_unit_ball(generate_double_annulus_raw(n, seed)).first;
}

/// Raw noisy circle: uniform angles, radius 1 + Normal(0, noise_sigma).
inline Matrix generate_noisy_circle_raw(int n, std::uint64_t seed, double noise_sigma) {
    if (n < 1) throw validation_error("noisy circle needs n >= 1");
    if (noise_sigma < 0.0) throw validation_error("noise_sigma must be >= 0");
    Rng rng(seed);
    Matrix points(n, 2);
    for (int i = 0; i < n; ++i) {
        const double angle = rng.uniform(0.0, 2.0 * std::numbers::pi);
        const double radius = 1.0 + noise_sigma * rng.normal();
        points(i, 0) = radius * std::cos(angle);
        points(i, 1) = radius * std::sin(angle);
    }
    return points;
}

/// Noisy circle scaled into the unit ball.
inline Matrix generate_noisy_circle(int n, std::uint64_t seed, double noise_sigma) {
    return normalize_points_to_unit_ball(generate_noisy_circle_raw(n, seed, noise_sigma)).first;
}

}  // namespace ectkit
