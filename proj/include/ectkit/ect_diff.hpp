#pragma once

#include "ectkit/complex.hpp"
#include "ectkit/ect_exact.hpp"
#include "ectkit/errors.hpp"
#include "ectkit/filtration.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

namespace ectkit {

/// Logistic function 1 / (1 + e^-x), evaluated in the branch that never
/// overflows. Saturates smoothly; finite input never yields NaN.
inline double sigmoid(double x) {
    if (x >= 0.0) {
        return 1.0 / (1.0 + std::exp(-x));
    }
    const double e = std::exp(x);
    return e / (1.0 + e);
}

/// d/dx sigmoid(x) = S(x) (1 - S(x)).
inline double sigmoid_derivative(double x) {
    const double s = sigmoid(x);
    return s * (1.0 - s);
}

/// Sigmoid-smoothed ECT matrix. Each entry is a signed sum of sigmoids, one
/// per simplex, so entries lie in [-M_odd, M_even] where M_even / M_odd count
/// the even- / odd-dimensional simplices.
struct SmoothEctMatrix {
    Matrix values;  ///< l x k, rows by threshold (lowest first), columns by direction
    double lambda = 1.0;
    DirectionSet directions;
    ThresholdGrid thresholds;
};

/// Gradients of a scalar loss routed back through a smoothed ECT.
struct GradientBundle {
    /// d loss / d theta_j; filled only when the direction set carries angles.
    std::vector<double> angle_gradients;
    /// d loss / d w_j, projected onto the tangent space of the sphere (k x d).
    Matrix direction_gradients;
    /// d loss / d x_v (n x d).
    Matrix coordinate_gradients;
    /// d loss / d t_{j,m}, one entry per matrix cell (l x k). For a global
    /// grid the gradient with respect to the shared threshold t_j is the row
    /// sum.
    Matrix threshold_gradients;
    /// d loss / d lambda.
    double lambda_gradient = 0.0;
};

namespace detail {

/// Past this argument the double-precision sigmoid is exactly 1 (and below
/// its negative, smaller than 4e-17), so the threshold loop only has to touch
/// grid entries inside the transition band.
inline constexpr double kSigmoidBand = 38.0;

struct Band {
    int lo;  ///< first grid index inside the transition band
    int hi;  ///< first grid index at or past saturation (sigmoid == 1)
};

inline Band sigmoid_band(const std::vector<double>& grid, double f, double lambda) {
    const double half_width = kSigmoidBand / lambda;
    const auto begin = grid.begin();
    const auto lo = std::lower_bound(begin, grid.end(), f - half_width);
    const auto hi = std::lower_bound(lo, grid.end(), f + half_width);
    return {static_cast<int>(lo - begin), static_cast<int>(hi - begin)};
}

inline void require_forward_inputs(const GeometricSimplicialComplex& K,
                                   const std::vector<double>& grid, double lambda) {
    K.ensure_valid();
    if (lambda <= 0.0) throw validation_error("lambda must be positive");
    if (grid.size() < 1) throw validation_error("soft ECC needs at least one threshold");
    for (std::size_t j = 1; j < grid.size(); ++j) {
        if (grid[j] < grid[j - 1]) {
            throw validation_error("soft ECC thresholds must be non-decreasing");
        }
    }
}

/// One direction's smoothed curve, accumulated from precomputed vertex
/// projections. Deterministic: dimensions ascending, simplices in storage
/// order, thresholds ascending.
inline void soft_ecc_column(const GeometricSimplicialComplex& K, const Vector& projections,
                            const std::vector<double>& grid, double lambda,
                            double* column_out) {
    const int l = static_cast<int>(grid.size());
    std::vector<double> acc(2 * l, 0.0);
    std::vector<std::int64_t> saturated_diff(2 * (l + 1), 0);

    const auto& by_dim = K.simplices_by_dim();
    for (std::size_t i = 0; i < by_dim.size(); ++i) {
        const int parity = static_cast<int>(i % 2);
        double* acc_p = acc.data() + parity * l;
        std::int64_t* sat_p = saturated_diff.data() + parity * (l + 1);
        for (const auto& s : by_dim[i]) {
            const double f = simplex_value(s, projections);
            const Band band = sigmoid_band(grid, f, lambda);
            for (int j = band.lo; j < band.hi; ++j) {
                acc_p[j] += sigmoid(lambda * (grid[j] - f));
            }
            sat_p[band.hi] += 1;
        }
    }

    std::int64_t even_sat = 0;
    std::int64_t odd_sat = 0;
    for (int j = 0; j < l; ++j) {
        even_sat += saturated_diff[j];
        odd_sat += saturated_diff[(l + 1) + j];
        column_out[j] = (acc[j] + static_cast<double>(even_sat)) -
                        (acc[l + j] + static_cast<double>(odd_sat));
    }
}

}  // namespace detail

/// Smoothed Euler Characteristic Curve: entry j is
/// sum_i (-1)^i sum_{sigma in K^(i)} sigmoid(lambda (t_j - f_w(sigma))).
/// The sum runs over every simplex of the complex (far-from-threshold
/// simplices contribute ~0 or ~1), so the curve stays differentiable in all
/// of w, t, and the coordinates. Pointwise it approaches the exact ECC as
/// lambda grows (at thresholds that do not tie a filtration value).
inline std::vector<double> soft_ecc(const GeometricSimplicialComplex& K, const Vector& w,
                                    const std::vector<double>& grid, double lambda) {
    detail::require_forward_inputs(K, grid, lambda);
    const Vector dir = unit_direction(w);
    if (dir.size() != K.ambient_dimension()) {
        throw validation_error("direction dimension does not match complex");
    }
    const Vector proj = detail::vertex_projections(K, dir);
    std::vector<double> column(grid.size());
    detail::soft_ecc_column(K, proj, grid, lambda, column.data());
    return column;
}

/// Column-stacked smoothed ECC over all directions (the l x k layer output).
inline SmoothEctMatrix soft_ect(const GeometricSimplicialComplex& K,
                                const DirectionSet& directions, const ThresholdGrid& grid,
                                double lambda) {
    K.ensure_valid();
    if (lambda <= 0.0) throw validation_error("lambda must be positive");
    grid.require_compatible(directions.count());
    if (directions.dimension() != K.ambient_dimension()) {
        throw validation_error("direction dimension does not match complex");
    }

    Matrix values(grid.size(), directions.count());
    for (int m = 0; m < directions.count(); ++m) {
        const Vector proj =
            detail::vertex_projections(K, unit_direction(directions.direction(m)));
        const auto& column_grid = grid.for_direction(m);
        detail::require_forward_inputs(K, column_grid, lambda);
        std::vector<double> column(column_grid.size());
        detail::soft_ecc_column(K, proj, column_grid, lambda, column.data());
        for (int j = 0; j < grid.size(); ++j) {
            values(j, m) = column[j];
        }
    }
    return {std::move(values), lambda, directions, grid};
}

/// Analytic gradients of L = sum_{j,m} upstream(j,m) * softECT(j,m).
///
/// Per sigmoid term S(lambda (t - f)): dL/dt = lambda S', dL/df = -lambda S',
/// dL/dlambda = (t - f) S'. The filtration value routes onward with
/// df/dw = x_{v*} and df/dx_v = w [v == v*], where v* is the max-attaining
/// vertex of the simplex (lowest index on ties). Angle gradients compose with
/// dw/dtheta = (-sin theta, cos theta).
///
/// Coordinate gradients accumulate in a fixed order (direction, then
/// dimension, then simplex, then threshold), so repeated runs are bit-stable.
inline GradientBundle soft_ect_backward(const GeometricSimplicialComplex& K,
                                        const DirectionSet& directions, const ThresholdGrid& grid,
                                        double lambda, const Matrix& upstream) {
    K.ensure_valid();
    if (lambda <= 0.0) throw validation_error("lambda must be positive");
    grid.require_compatible(directions.count());
    if (directions.dimension() != K.ambient_dimension()) {
        throw validation_error("direction dimension does not match complex");
    }
    if (upstream.rows() != grid.size() || upstream.cols() != directions.count()) {
        throw validation_error("upstream gradient must be an l x k matrix");
    }
    if (!upstream.allFinite()) {
        throw validation_error("upstream gradient contains non-finite values");
    }

    const int k = directions.count();
    const int d = directions.dimension();
    const int n = K.vertex_count();
    const int l = grid.size();

    GradientBundle out;
    out.direction_gradients = Matrix::Zero(k, d);
    out.coordinate_gradients = Matrix::Zero(n, d);
    out.threshold_gradients = Matrix::Zero(l, k);
    out.lambda_gradient = 0.0;

    const auto& by_dim = K.simplices_by_dim();

    for (int m = 0; m < k; ++m) {
        const Vector w = unit_direction(directions.direction(m));
        const Vector proj = detail::vertex_projections(K, w);
        const auto& column_grid = grid.for_direction(m);
        Eigen::RowVectorXd raw_w_grad = Eigen::RowVectorXd::Zero(d);

        for (std::size_t i = 0; i < by_dim.size(); ++i) {
            const double sign = (i % 2 == 0) ? 1.0 : -1.0;
            for (const auto& s : by_dim[i]) {
                // Max-attaining vertex; the subgradient goes to the lowest
                // index when several vertices tie.
                const auto& vs = s.vertices();
                int attaining = vs.front();
                double f = proj[attaining];
                for (std::size_t v = 1; v < vs.size(); ++v) {
                    if (proj[vs[v]] > f) {
                        f = proj[vs[v]];
                        attaining = vs[v];
                    }
                }

                const detail::Band band = detail::sigmoid_band(column_grid, f, lambda);
                double g = 0.0;  // sum_j upstream * S'
                for (int j = band.lo; j < band.hi; ++j) {
                    const double u = column_grid[j] - f;
                    const double sp = sigmoid_derivative(lambda * u);
                    const double up = upstream(j, m);
                    out.threshold_gradients(j, m) += sign * lambda * sp * up;
                    out.lambda_gradient += sign * u * sp * up;
                    g += sp * up;
                }
                const double f_grad = -sign * lambda * g;  // dL/df for this simplex
                out.coordinate_gradients.row(attaining) += f_grad * w.transpose();
                raw_w_grad += f_grad * K.coordinates().row(attaining);
            }
        }

        if (directions.has_angles()) {
            const double theta = directions.angles()[m];
            out.angle_gradients.push_back(-std::sin(theta) * raw_w_grad[0] +
                                          std::cos(theta) * raw_w_grad[1]);
        }
        // Tangent projection keeps the direction update on the sphere.
        out.direction_gradients.row(m) = raw_w_grad - (raw_w_grad * w) * w.transpose();
    }

    return out;
}

}  // namespace ectkit
