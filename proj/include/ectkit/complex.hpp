#pragma once

#include "ectkit/errors.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <atomic>
#include <cstdint>
#include <sstream>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

namespace ectkit {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// A simplex stored canonically as a strictly increasing list of vertex
/// indices. Dimension is (number of vertices - 1).
class Simplex {
public:
    explicit Simplex(std::vector<int> vertices) : vertices_(std::move(vertices)) {
        if (vertices_.empty()) {
            throw validation_error("simplex must have at least one vertex");
        }
        std::sort(vertices_.begin(), vertices_.end());
        if (std::adjacent_find(vertices_.begin(), vertices_.end()) != vertices_.end()) {
            throw validation_error("degenerate simplex: repeated vertex in " + render(vertices_));
        }
    }

    Simplex(std::initializer_list<int> vertices) : Simplex(std::vector<int>(vertices)) {}

    int dimension() const { return static_cast<int>(vertices_.size()) - 1; }
    const std::vector<int>& vertices() const { return vertices_; }

    bool operator==(const Simplex& other) const = default;

    std::string to_string() const { return render(vertices_); }

    static std::string render(const std::vector<int>& vs) {
        std::ostringstream out;
        out << '{';
        for (std::size_t i = 0; i < vs.size(); ++i) {
            if (i > 0) out << ',';
            out << vs[i];
        }
        out << '}';
        return out.str();
    }

private:
    std::vector<int> vertices_;
};

namespace detail {

struct VertexListHash {
    std::size_t operator()(const std::vector<int>& vs) const {
        std::uint64_t h = 1469598103934665603ull;  // FNV-1a
        for (int v : vs) {
            h ^= static_cast<std::uint64_t>(static_cast<std::uint32_t>(v));
            h *= 1099511628211ull;
        }
        return static_cast<std::size_t>(h);
    }
};

using VertexListSet = std::unordered_set<std::vector<int>, VertexListHash>;

}  // namespace detail

/// Simplex counts per dimension plus the basic shape parameters.
struct ComplexStats {
    std::vector<std::int64_t> counts_by_dim;  ///< |K^(i)| for i = 0..p
    int vertex_count = 0;                     ///< n
    int top_dimension = -1;                   ///< p (-1 for the empty complex)
    int ambient_dimension = 0;                ///< d
};

/// One invariant violation found by validate().
struct Violation {
    enum class Kind {
        index_out_of_range,
        missing_face,
        duplicate_simplex,
        dimension_mismatch,
        bad_coordinates,
    };

    Kind kind;
    std::string message;
};

/// A finite simplicial complex with vertex coordinates in R^d.
///
/// Vertex identity is positional: row v of the coordinate matrix is vertex v,
/// and duplicate coordinate rows are permitted. Simplices are bucketed by
/// dimension, each stored in canonical (sorted) form. Instances are immutable
/// after construction; the factories produce face-closed complexes, while
/// from_parts() accepts raw data so that validate() has something to reject.
class GeometricSimplicialComplex {
public:
    /// All n coordinate rows become vertices; edges are derived from the
    /// triangles and deduplicated. Out-of-range indices and degenerate
    /// (repeated-vertex) triangles are rejected.
    static GeometricSimplicialComplex from_triangle_mesh(
        Matrix coordinates, const std::vector<std::array<int, 3>>& triangles) {
        const int n = static_cast<int>(coordinates.rows());
        if (n < 1 || coordinates.cols() < 1) {
            throw validation_error("mesh needs at least one vertex and d >= 1");
        }

        std::vector<std::vector<Simplex>> by_dim(1);
        by_dim[0].reserve(n);
        for (int v = 0; v < n; ++v) {
            by_dim[0].push_back(Simplex({v}));
        }
        if (!triangles.empty()) {
            by_dim.resize(3);
            detail::VertexListSet seen_edges;
            detail::VertexListSet seen_triangles;
            for (const auto& t : triangles) {
                for (int v : t) {
                    if (v < 0 || v >= n) {
                        throw validation_error(
                            "triangle vertex index " + std::to_string(v) +
                            " out of range [0," + std::to_string(n) + ")");
                    }
                }
                Simplex tri({t[0], t[1], t[2]});  // rejects repeated vertices
                if (!seen_triangles.insert(tri.vertices()).second) {
                    continue;
                }
                const auto& vs = tri.vertices();
                const std::array<std::vector<int>, 3> edges = {
                    std::vector<int>{vs[0], vs[1]},
                    std::vector<int>{vs[0], vs[2]},
                    std::vector<int>{vs[1], vs[2]},
                };
                for (const auto& e : edges) {
                    if (seen_edges.insert(e).second) {
                        by_dim[1].push_back(Simplex(e));
                    }
                }
                by_dim[2].push_back(std::move(tri));
            }
        }
        return GeometricSimplicialComplex(std::move(coordinates), std::move(by_dim), true);
    }

    /// A 0-dimensional complex: every point is a vertex, nothing else.
    static GeometricSimplicialComplex from_point_cloud(Matrix points) {
        const int n = static_cast<int>(points.rows());
        if (n < 1 || points.cols() < 1) {
            throw validation_error("point cloud must be a nonempty n x d matrix");
        }
        std::vector<std::vector<Simplex>> by_dim(1);
        by_dim[0].reserve(n);
        for (int v = 0; v < n; ++v) {
            by_dim[0].push_back(Simplex({v}));
        }
        return GeometricSimplicialComplex(std::move(points), std::move(by_dim), true);
    }

    /// Wraps raw data without checking any invariant. Pair with validate().
    static GeometricSimplicialComplex from_parts(
        Matrix coordinates, std::vector<std::vector<Simplex>> simplices_by_dim) {
        return GeometricSimplicialComplex(std::move(coordinates), std::move(simplices_by_dim), false);
    }

    const Matrix& coordinates() const { return coordinates_; }
    const std::vector<std::vector<Simplex>>& simplices_by_dim() const { return simplices_by_dim_; }

    int vertex_count() const { return static_cast<int>(coordinates_.rows()); }
    int ambient_dimension() const { return static_cast<int>(coordinates_.cols()); }

    /// Top dimension p, inferred from the highest nonempty bucket (-1 if the
    /// complex has no simplices at all).
    int top_dimension() const {
        for (int i = static_cast<int>(simplices_by_dim_.size()) - 1; i >= 0; --i) {
            if (!simplices_by_dim_[i].empty()) return i;
        }
        return -1;
    }

    std::int64_t simplex_count() const {
        std::int64_t total = 0;
        for (const auto& bucket : simplices_by_dim_) {
            total += static_cast<std::int64_t>(bucket.size());
        }
        return total;
    }

    ComplexStats stats() const {
        ComplexStats s;
        s.vertex_count = vertex_count();
        s.ambient_dimension = ambient_dimension();
        s.top_dimension = top_dimension();
        s.counts_by_dim.resize(static_cast<std::size_t>(s.top_dimension) + 1, 0);
        for (int i = 0; i <= s.top_dimension; ++i) {
            s.counts_by_dim[i] = static_cast<std::int64_t>(simplices_by_dim_[i].size());
        }
        return s;
    }

    /// Throws validation_error on the first call if any invariant is broken;
    /// the (immutable) result is cached afterwards.
    void ensure_valid() const;

    bool known_valid() const { return valid_.load(std::memory_order_relaxed); }

    // The cached validity flag is atomic, so the special members are spelled
    // out.
    GeometricSimplicialComplex(const GeometricSimplicialComplex& other)
        : coordinates_(other.coordinates_),
          simplices_by_dim_(other.simplices_by_dim_),
          valid_(other.valid_.load(std::memory_order_relaxed)) {}

    GeometricSimplicialComplex(GeometricSimplicialComplex&& other) noexcept
        : coordinates_(std::move(other.coordinates_)),
          simplices_by_dim_(std::move(other.simplices_by_dim_)),
          valid_(other.valid_.load(std::memory_order_relaxed)) {}

    GeometricSimplicialComplex& operator=(const GeometricSimplicialComplex& other) {
        if (this != &other) {
            coordinates_ = other.coordinates_;
            simplices_by_dim_ = other.simplices_by_dim_;
            valid_.store(other.valid_.load(std::memory_order_relaxed), std::memory_order_relaxed);
        }
        return *this;
    }

    GeometricSimplicialComplex& operator=(GeometricSimplicialComplex&& other) noexcept {
        coordinates_ = std::move(other.coordinates_);
        simplices_by_dim_ = std::move(other.simplices_by_dim_);
        valid_.store(other.valid_.load(std::memory_order_relaxed), std::memory_order_relaxed);
        return *this;
    }

private:
    GeometricSimplicialComplex(Matrix coordinates,
                               std::vector<std::vector<Simplex>> simplices_by_dim,
                               bool valid)
        : coordinates_(std::move(coordinates)),
          simplices_by_dim_(std::move(simplices_by_dim)),
          valid_(valid) {
        // Drop empty trailing buckets so top_dimension() reflects the data.
        while (!simplices_by_dim_.empty() && simplices_by_dim_.back().empty()) {
            simplices_by_dim_.pop_back();
        }
    }

    Matrix coordinates_;
    std::vector<std::vector<Simplex>> simplices_by_dim_;
    mutable std::atomic<bool> valid_;
};

/// Checks every complex invariant and reports all violations found (an empty
/// result means the complex is valid). Violations are data, not failures.
inline std::vector<Violation> validate(const GeometricSimplicialComplex& K) {
    std::vector<Violation> out;
    const int n = K.vertex_count();
    if (n < 1 || K.ambient_dimension() < 1) {
        out.push_back({Violation::Kind::bad_coordinates,
                       "coordinates must form a nonempty n x d matrix"});
    }
    if (!K.coordinates().allFinite()) {
        out.push_back({Violation::Kind::bad_coordinates, "coordinates contain non-finite values"});
    }

    const auto& by_dim = K.simplices_by_dim();
    std::vector<detail::VertexListSet> present(by_dim.size());
    for (std::size_t i = 0; i < by_dim.size(); ++i) {
        for (const auto& s : by_dim[i]) {
            if (s.dimension() != static_cast<int>(i)) {
                out.push_back({Violation::Kind::dimension_mismatch,
                               "simplex " + s.to_string() + " stored under dimension " +
                                   std::to_string(i)});
                continue;
            }
            for (int v : s.vertices()) {
                if (v < 0 || v >= n) {
                    out.push_back({Violation::Kind::index_out_of_range,
                                   "simplex " + s.to_string() + " references vertex " +
                                       std::to_string(v) + " outside [0," + std::to_string(n) + ")"});
                }
            }
            if (!present[i].insert(s.vertices()).second) {
                out.push_back({Violation::Kind::duplicate_simplex,
                               "duplicate simplex " + s.to_string()});
            }
        }
    }

    // Face closure: every codimension-1 face must be stored one bucket down
    // (induction covers deeper subsets). One violation per offending simplex.
    for (std::size_t i = 1; i < by_dim.size(); ++i) {
        for (const auto& s : by_dim[i]) {
            const auto& vs = s.vertices();
            std::vector<int> face(vs.size() - 1);
            std::string missing;
            for (std::size_t drop = 0; drop < vs.size(); ++drop) {
                std::size_t w = 0;
                for (std::size_t r = 0; r < vs.size(); ++r) {
                    if (r != drop) face[w++] = vs[r];
                }
                if (!present[i - 1].count(face)) {
                    if (!missing.empty()) missing += ", ";
                    missing += Simplex::render(face);
                }
            }
            if (!missing.empty()) {
                out.push_back({Violation::Kind::missing_face,
                               "simplex " + s.to_string() + " is missing face(s) " + missing});
            }
        }
    }
    return out;
}

inline void GeometricSimplicialComplex::ensure_valid() const {
    if (valid_.load(std::memory_order_relaxed)) return;
    auto violations = validate(*this);
    if (!violations.empty()) {
        std::string msg = "invalid complex: " + violations.front().message;
        if (violations.size() > 1) {
            msg += " (+" + std::to_string(violations.size() - 1) + " more)";
        }
        throw validation_error(msg);
    }
    valid_.store(true, std::memory_order_relaxed);
}

/// Alternating sum of simplex counts over dimensions.
inline std::int64_t euler_characteristic(const GeometricSimplicialComplex& K) {
    K.ensure_valid();
    std::int64_t chi = 0;
    std::int64_t sign = 1;
    for (const auto& bucket : K.simplices_by_dim()) {
        chi += sign * static_cast<std::int64_t>(bucket.size());
        sign = -sign;
    }
    return chi;
}

/// Affine transform that centers a point set and scales it into the unit ball.
struct UnitBallTransform {
    Vector center;          ///< centroid of the input rows
    double scale = 1.0;     ///< max distance from the centroid (1 if degenerate)
    bool degenerate = false;///< all points coincident; scale left at 1
};

/// Maps rows to (x - center) / scale with max norm exactly 1. If all points
/// coincide the transform is flagged degenerate and scale stays 1.
inline std::pair<Matrix, UnitBallTransform> normalize_points_to_unit_ball(const Matrix& points) {
    if (points.rows() < 1 || points.cols() < 1) {
        throw validation_error("normalization needs a nonempty n x d matrix");
    }
    UnitBallTransform t;
    t.center = points.colwise().mean();
    Matrix centered = points.rowwise() - t.center.transpose();
    const double max_norm = centered.rowwise().norm().maxCoeff();
    if (max_norm <= 0.0) {
        t.scale = 1.0;
        t.degenerate = true;
        return {std::move(centered), std::move(t)};
    }
    t.scale = max_norm;
    centered /= max_norm;
    return {std::move(centered), std::move(t)};
}

struct NormalizedComplex {
    GeometricSimplicialComplex complex;
    UnitBallTransform transform;
};

/// See normalize_points_to_unit_ball; the simplices are carried over as-is.
inline NormalizedComplex normalize_to_unit_ball(const GeometricSimplicialComplex& K) {
    K.ensure_valid();
    auto [points, transform] = normalize_points_to_unit_ball(K.coordinates());
    auto normalized = GeometricSimplicialComplex::from_parts(std::move(points), K.simplices_by_dim());
    normalized.ensure_valid();
    return {std::move(normalized), std::move(transform)};
}

}  // namespace ectkit
