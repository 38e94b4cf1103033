#pragma once

#include "ectkit/complex.hpp"
#include "ectkit/errors.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

namespace ectkit {

/// Directions must be unit vectors within this tolerance; inputs inside the
/// tolerance are renormalized silently, anything further off is rejected.
inline constexpr double kUnitNormTolerance = 1e-9;

/// Returns the renormalized direction, or throws if it is not a unit vector.
inline Vector unit_direction(const Vector& w) {
    const double norm = w.norm();
    if (std::abs(norm - 1.0) > kUnitNormTolerance) {
        throw validation_error("direction must be a unit vector (norm " + std::to_string(norm) + ")");
    }
    return w / norm;
}

/// A set of k unit directions in R^d. For d = 2 the set may carry the angle
/// parameterization theta_j with w_j = (cos theta_j, sin theta_j); the
/// learning code requires that form.
class DirectionSet {
public:
    /// Rows must be unit vectors within kUnitNormTolerance. They are stored
    /// untouched (evaluation renormalizes), so serialized sets reload with
    /// identical bits.
    static DirectionSet from_vectors(Matrix vectors) {
        if (vectors.rows() < 1 || vectors.cols() < 2) {
            throw validation_error("direction set needs k >= 1 vectors in d >= 2");
        }
        for (int j = 0; j < vectors.rows(); ++j) {
            const double norm = vectors.row(j).norm();
            if (std::abs(norm - 1.0) > kUnitNormTolerance) {
                throw validation_error("direction " + std::to_string(j) +
                                       " is not a unit vector (norm " + std::to_string(norm) + ")");
            }
        }
        return DirectionSet(std::move(vectors), {});
    }

    static DirectionSet from_angles(std::vector<double> angles) {
        if (angles.empty()) {
            throw validation_error("direction set needs k >= 1 angles");
        }
        Matrix vectors(static_cast<int>(angles.size()), 2);
        for (std::size_t j = 0; j < angles.size(); ++j) {
            vectors(static_cast<int>(j), 0) = std::cos(angles[j]);
            vectors(static_cast<int>(j), 1) = std::sin(angles[j]);
        }
        return DirectionSet(std::move(vectors), std::move(angles));
    }

    int count() const { return static_cast<int>(vectors_.rows()); }
    int dimension() const { return static_cast<int>(vectors_.cols()); }
    const Matrix& vectors() const { return vectors_; }
    Vector direction(int j) const { return vectors_.row(j).transpose(); }

    bool has_angles() const { return !angles_.empty(); }
    const std::vector<double>& angles() const {
        if (!has_angles()) {
            throw validation_error("direction set carries no angle parameterization");
        }
        return angles_;
    }

private:
    DirectionSet(Matrix vectors, std::vector<double> angles)
        : vectors_(std::move(vectors)), angles_(std::move(angles)) {}

    Matrix vectors_;
    std::vector<double> angles_;
};

/// Filtration values f_w(sigma) bucketed like simplices_by_dim.
struct FiltrationValues {
    std::vector<std::vector<double>> by_dim;
};

namespace detail {

/// Inner products <x_v, w> for all vertices; the building block everything
/// else maxes over.
inline Vector vertex_projections(const GeometricSimplicialComplex& K, const Vector& w) {
    return K.coordinates() * w;
}

inline double simplex_value(const Simplex& s, const Vector& projections) {
    double value = projections[s.vertices().front()];
    for (std::size_t i = 1; i < s.vertices().size(); ++i) {
        value = std::max(value, projections[s.vertices()[i]]);
    }
    return value;
}

}  // namespace detail

/// f_w(sigma) = max over vertices of <x_v, w>, for every simplex. Face
/// monotone by construction (a face maxes over a subset).
inline FiltrationValues filtration_values(const GeometricSimplicialComplex& K, const Vector& w) {
    K.ensure_valid();
    const Vector dir = unit_direction(w);
    if (dir.size() != K.ambient_dimension()) {
        throw validation_error("direction dimension does not match complex");
    }
    const Vector proj = detail::vertex_projections(K, dir);

    FiltrationValues out;
    out.by_dim.resize(K.simplices_by_dim().size());
    for (std::size_t i = 0; i < K.simplices_by_dim().size(); ++i) {
        const auto& bucket = K.simplices_by_dim()[i];
        out.by_dim[i].reserve(bucket.size());
        for (const auto& s : bucket) {
            out.by_dim[i].push_back(detail::simplex_value(s, proj));
        }
    }
    return out;
}

/// The subcomplex of simplices with f_w(sigma) <= t. Ties are included.
/// Face-closed because f is face monotone. Coordinates are carried over.
inline GeometricSimplicialComplex sublevel_complex(const GeometricSimplicialComplex& K,
                                                   const Vector& w, double t) {
    const FiltrationValues values = filtration_values(K, w);
    std::vector<std::vector<Simplex>> kept(K.simplices_by_dim().size());
    for (std::size_t i = 0; i < kept.size(); ++i) {
        const auto& bucket = K.simplices_by_dim()[i];
        for (std::size_t s = 0; s < bucket.size(); ++s) {
            if (values.by_dim[i][s] <= t) {
                kept[i].push_back(bucket[s]);
            }
        }
    }
    auto sub = GeometricSimplicialComplex::from_parts(K.coordinates(), std::move(kept));
    sub.ensure_valid();
    return sub;
}

/// Filtration values sorted ascending within each dimension, so that
/// |K_{t,w}^(i)| is one binary search away.
struct SortedFiltrationValues {
    std::vector<std::vector<double>> by_dim;

    /// Number of i-simplices with value <= t.
    std::int64_t count_at(int dim, double t) const {
        const auto& v = by_dim[dim];
        return static_cast<std::int64_t>(std::upper_bound(v.begin(), v.end(), t) - v.begin());
    }
};

inline SortedFiltrationValues sorted_dimension_values(const GeometricSimplicialComplex& K,
                                                      const Vector& w) {
    FiltrationValues values = filtration_values(K, w);
    SortedFiltrationValues out;
    out.by_dim = std::move(values.by_dim);
    for (auto& v : out.by_dim) {
        std::sort(v.begin(), v.end());
    }
    return out;
}

}  // namespace ectkit
