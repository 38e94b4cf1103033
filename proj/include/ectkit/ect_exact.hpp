#pragma once

#include "ectkit/complex.hpp"
#include "ectkit/errors.hpp"
#include "ectkit/filtration.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

namespace ectkit {

using EctValues = Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>;

enum class GridStrategy { global, per_direction };

/// The threshold axis of a discretized ECT: either one grid shared by all
/// directions (row i means the same t in every column) or one grid per
/// direction (row i means a direction-specific t).
///
/// Grids are strictly increasing with l >= 2. The only exception is a
/// per-direction grid marked degenerate: a direction along which all vertices
/// project to a single value collapses its grid to l copies of that value.
class ThresholdGrid {
public:
    static ThresholdGrid global(std::vector<double> thresholds) {
        require_increasing(thresholds, "global grid");
        ThresholdGrid g;
        g.strategy_ = GridStrategy::global;
        g.grids_.push_back(std::move(thresholds));
        g.degenerate_.push_back(false);
        return g;
    }

    /// l evenly spaced thresholds covering [lo, hi]; defaults to the unit-ball
    /// range [-1, 1].
    static ThresholdGrid global_uniform(int l, double lo = -1.0, double hi = 1.0) {
        if (l < 2) throw validation_error("threshold grid needs l >= 2");
        if (!(lo < hi)) throw validation_error("grid range must satisfy lo < hi");
        std::vector<double> t(l);
        for (int j = 0; j < l; ++j) {
            t[j] = lo + (hi - lo) * static_cast<double>(j) / static_cast<double>(l - 1);
        }
        // Pin the endpoints: the affine form can land one ulp off, and the
        // last threshold must reach hi so a full sweep really covers K.
        t.front() = lo;
        t.back() = hi;
        return global(std::move(t));
    }

    static ThresholdGrid per_direction(std::vector<std::vector<double>> grids,
                                       std::vector<bool> degenerate = {}) {
        if (grids.empty()) throw validation_error("per-direction grid needs k >= 1 grids");
        if (degenerate.empty()) degenerate.assign(grids.size(), false);
        if (degenerate.size() != grids.size()) {
            throw validation_error("degenerate flags must match grid count");
        }
        const std::size_t l = grids.front().size();
        for (std::size_t j = 0; j < grids.size(); ++j) {
            if (grids[j].size() != l) {
                throw validation_error("per-direction grids must share one length l");
            }
            if (!degenerate[j]) {
                require_increasing(grids[j], "grid for direction " + std::to_string(j));
            }
        }
        if (l < 2) throw validation_error("threshold grid needs l >= 2");
        ThresholdGrid g;
        g.strategy_ = GridStrategy::per_direction;
        g.grids_ = std::move(grids);
        g.degenerate_.assign(degenerate.begin(), degenerate.end());
        return g;
    }

    GridStrategy strategy() const { return strategy_; }
    int size() const { return static_cast<int>(grids_.front().size()); }  ///< l
    int grid_count() const { return static_cast<int>(grids_.size()); }    ///< 1 or k

    const std::vector<double>& for_direction(int j) const {
        return grids_[strategy_ == GridStrategy::global ? 0 : j];
    }
    bool degenerate(int j) const {
        return degenerate_[strategy_ == GridStrategy::global ? 0 : j] != 0;
    }

    /// A global grid pairs with any direction count; per-direction grids need
    /// exactly one grid per direction.
    void require_compatible(int direction_count) const {
        if (strategy_ == GridStrategy::per_direction && grid_count() != direction_count) {
            throw validation_error("per-direction grid count " + std::to_string(grid_count()) +
                                   " does not match " + std::to_string(direction_count) +
                                   " directions");
        }
    }

    bool operator==(const ThresholdGrid& other) const {
        return strategy_ == other.strategy_ && grids_ == other.grids_ &&
               degenerate_ == other.degenerate_;
    }

private:
    static void require_increasing(const std::vector<double>& t, const std::string& what) {
        if (t.size() < 2) throw validation_error(what + " needs l >= 2");
        for (std::size_t j = 1; j < t.size(); ++j) {
            if (!(t[j] > t[j - 1])) {
                throw validation_error(what + " must be strictly increasing");
            }
        }
    }

    GridStrategy strategy_ = GridStrategy::global;
    std::vector<std::vector<double>> grids_;
    std::vector<std::uint8_t> degenerate_;
};

/// Discretized exact ECT: integer matrix with rows indexed by threshold
/// (lowest first) and columns by direction.
struct EctMatrix {
    EctValues values;
    DirectionSet directions;
    ThresholdGrid thresholds;
};

/// Euler Characteristic Curve of one direction, evaluated at each grid value
/// via per-dimension sorted filtration values and binary search.
inline std::vector<std::int64_t> ecc(const GeometricSimplicialComplex& K, const Vector& w,
                                     const std::vector<double>& grid) {
    if (grid.empty()) throw validation_error("ecc needs at least one threshold");
    for (std::size_t j = 1; j < grid.size(); ++j) {
        if (grid[j] < grid[j - 1]) {
            throw validation_error("ecc thresholds must be non-decreasing");
        }
    }
    const SortedFiltrationValues sorted = sorted_dimension_values(K, w);
    const int dims = static_cast<int>(sorted.by_dim.size());

    std::vector<std::int64_t> curve(grid.size(), 0);
    for (std::size_t j = 0; j < grid.size(); ++j) {
        std::int64_t chi = 0;
        std::int64_t sign = 1;
        for (int i = 0; i < dims; ++i) {
            chi += sign * sorted.count_at(i, grid[j]);
            sign = -sign;
        }
        curve[j] = chi;
    }
    return curve;
}

/// Column-stacks the ECC of every direction into the l x k matrix form.
inline EctMatrix ect(const GeometricSimplicialComplex& K, const DirectionSet& directions,
                     const ThresholdGrid& grid) {
    K.ensure_valid();
    grid.require_compatible(directions.count());
    if (directions.dimension() != K.ambient_dimension()) {
        throw validation_error("direction dimension does not match complex");
    }

    EctValues values(grid.size(), directions.count());
    for (int j = 0; j < directions.count(); ++j) {
        const std::vector<std::int64_t> column = ecc(K, directions.direction(j), grid.for_direction(j));
        for (int r = 0; r < grid.size(); ++r) {
            values(r, j) = column[r];
        }
    }
    return {std::move(values), directions, grid};
}

enum class GridRange {
    per_direction,  ///< each grid spans that direction's own min/max vertex value
    shared,         ///< every direction gets the global min/max across all filtrations
};

/// Builds a data-driven threshold grid: l evenly spaced values per direction,
/// spanning the vertex filtration range. With GridRange::shared the range is
/// pooled over all directions and a single (row-aligned) global grid results.
/// A direction whose vertices all project to one value yields a degenerate
/// constant grid, flagged as such.
inline ThresholdGrid per_direction_grid(const GeometricSimplicialComplex& K,
                                        const DirectionSet& directions, int l,
                                        GridRange range = GridRange::per_direction) {
    K.ensure_valid();
    if (l < 2) throw validation_error("per-direction grid needs l >= 2");
    if (K.vertex_count() < 1) throw validation_error("complex has no vertices");

    std::vector<std::pair<double, double>> ranges(directions.count());
    for (int j = 0; j < directions.count(); ++j) {
        // Renormalize exactly like the curve evaluation does, so the grid's
        // top threshold equals the largest filtration value bit for bit.
        const Vector proj =
            detail::vertex_projections(K, unit_direction(directions.direction(j)));
        ranges[j] = {proj.minCoeff(), proj.maxCoeff()};
    }

    if (range == GridRange::shared) {
        double lo = ranges.front().first;
        double hi = ranges.front().second;
        for (const auto& r : ranges) {
            lo = std::min(lo, r.first);
            hi = std::max(hi, r.second);
        }
        if (!(lo < hi)) {
            throw validation_error("all filtration values coincide; no shared range exists");
        }
        return ThresholdGrid::global_uniform(l, lo, hi);
    }

    std::vector<std::vector<double>> grids(ranges.size());
    std::vector<bool> degenerate(ranges.size(), false);
    for (std::size_t j = 0; j < ranges.size(); ++j) {
        const auto [lo, hi] = ranges[j];
        grids[j].resize(l);
        if (lo == hi) {
            std::fill(grids[j].begin(), grids[j].end(), lo);
            degenerate[j] = true;
            continue;
        }
        for (int r = 0; r < l; ++r) {
            grids[j][r] = lo + (hi - lo) * static_cast<double>(r) / static_cast<double>(l - 1);
        }
        grids[j].front() = lo;
        grids[j].back() = hi;  // exact: the top threshold must include max f
    }
    return ThresholdGrid::per_direction(std::move(grids), std::move(degenerate));
}

namespace detail {

inline void require_comparable(const DirectionSet& a_dirs, const ThresholdGrid& a_grid,
                               const DirectionSet& b_dirs, const ThresholdGrid& b_grid) {
    if (a_dirs.count() != b_dirs.count() || a_dirs.dimension() != b_dirs.dimension() ||
        a_dirs.vectors() != b_dirs.vectors()) {
        throw validation_error("ECT matrices were built from different directions");
    }
    if (!(a_grid == b_grid)) {
        throw validation_error("ECT matrices were built from different threshold grids");
    }
}

}  // namespace detail

/// Mean squared entrywise difference between two ECT matrices sharing the
/// same directions and thresholds.
inline double ect_distance(const EctMatrix& a, const EctMatrix& b) {
    detail::require_comparable(a.directions, a.thresholds, b.directions, b.thresholds);
    if (a.values.rows() != b.values.rows() || a.values.cols() != b.values.cols()) {
        throw validation_error("ECT matrices have different shapes");
    }
    const Eigen::Index total = a.values.size();
    double sum = 0.0;
    for (Eigen::Index c = 0; c < a.values.cols(); ++c) {
        for (Eigen::Index r = 0; r < a.values.rows(); ++r) {
            const double d = static_cast<double>(a.values(r, c) - b.values(r, c));
            sum += d * d;
        }
    }
    return sum / static_cast<double>(total);
}

}  // namespace ectkit
