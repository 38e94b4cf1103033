#include "ectkit/ect_diff.hpp"

#include "ectkit/platonic.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

namespace {

using namespace ectkit;
using namespace ectkit::testing;

// Loss used by every finite-difference check: L = sum upstream .* soft_ect.
double weighted_sum(const GeometricSimplicialComplex& K, const DirectionSet& W,
                    const ThresholdGrid& grid, double lambda, const Matrix& upstream) {
    return (soft_ect(K, W, grid, lambda).values.array() * upstream.array()).sum();
}

Matrix random_upstream(int rows, int cols, std::uint64_t seed) {
    Rng rng(seed);
    Matrix u(rows, cols);
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) u(r, c) = rng.normal();
    }
    return u;
}

void expect_close(double analytic, double numeric, const std::string& label) {
    const double error = std::abs(analytic - numeric);
    if (error < 1e-8) return;  // absolute floor for near-zero components
    const double scale = std::max(std::abs(analytic), std::abs(numeric));
    EXPECT_LT(error / scale, 1e-4) << label << ": analytic " << analytic << " vs numeric "
                                   << numeric;
}

TEST(Sigmoid, MidpointSaturationSymmetry) {
    EXPECT_DOUBLE_EQ(sigmoid(0.0), 0.5);
    EXPECT_NEAR(sigmoid(25.0), 1.0, 1e-10);
    EXPECT_NEAR(sigmoid(-25.0), 0.0, 1e-10);
    EXPECT_FALSE(std::isnan(sigmoid(1e6)));
    EXPECT_FALSE(std::isnan(sigmoid(-1e6)));

    Rng rng(5);
    for (int i = 0; i < 100; ++i) {
        const double x = rng.uniform(-40.0, 40.0);
        EXPECT_NEAR(sigmoid(x) + sigmoid(-x), 1.0, 1e-15);
    }
}

TEST(Sigmoid, DerivativeIdentity) {
    Rng rng(6);
    for (int i = 0; i < 50; ++i) {
        const double x = rng.uniform(-10.0, 10.0);
        const double s = sigmoid(x);
        EXPECT_NEAR(sigmoid_derivative(x), s * (1 - s), 1e-15);
        const double fd = (sigmoid(x + 1e-6) - sigmoid(x - 1e-6)) / 2e-6;
        EXPECT_NEAR(sigmoid_derivative(x), fd, 1e-9);
    }
}

TEST(SoftEcc, SingleVertexAtThresholdIsHalf) {
    Matrix coords(1, 2);
    coords << 0, 0;
    const auto K = GeometricSimplicialComplex::from_point_cloud(coords);
    const Vector w = (Vector(2) << 1, 0).finished();
    for (double lambda : {1.0, 10.0, 1e4}) {
        const auto curve = soft_ecc(K, w, {-1.0, 0.0, 1.0}, lambda);
        EXPECT_DOUBLE_EQ(curve[1], 0.5);
    }
}

TEST(SoftEcc, LambdaRejected) {
    Matrix coords(1, 2);
    coords << 0, 0;
    const auto K = GeometricSimplicialComplex::from_point_cloud(coords);
    const Vector w = (Vector(2) << 1, 0).finished();
    EXPECT_THROW(soft_ecc(K, w, {0.0, 1.0}, 0.0), validation_error);
    EXPECT_THROW(soft_ecc(K, w, {0.0, 1.0}, -2.0), validation_error);
}

TEST(SoftEcc, LargeLambdaMatchesExactAwayFromTies) {
    for (const auto& K : {tetrahedron_mesh(), cube_mesh(), icosahedron_mesh()}) {
        const auto W = sample_directions_uniform(4, 3, 7);
        for (int j = 0; j < W.count(); ++j) {
            const Vector w = W.direction(j);
            const auto grid = nudge_away_from(
                ThresholdGrid::global_uniform(32, -2.5, 2.5).for_direction(0),
                all_filtration_values(K, W), 1e-3);
            const auto exact = ecc(K, w, grid);
            const auto soft = soft_ecc(K, w, grid, 1e4);
            for (std::size_t r = 0; r < grid.size(); ++r) {
                EXPECT_LT(std::abs(soft[r] - static_cast<double>(exact[r])), 0.01);
            }
        }
    }
}

TEST(SoftEcc, TighterLambdaTightensTheStep) {
    // One direction sweep: the max deviation from the exact curve shrinks
    // when lambda grows from 1 to 5.
    const auto K = tetrahedron_mesh();
    const Vector w = (Vector(3) << 0, 0, 1).finished();
    const auto grid = nudge_away_from(
        ThresholdGrid::global_uniform(64, -2.0, 2.0).for_direction(0),
        all_filtration_values(K, DirectionSet::from_vectors(w.transpose())), 1e-3);
    const auto exact = ecc(K, w, grid);
    double previous = std::numeric_limits<double>::infinity();
    for (double lambda : {1.0, 2.0, 3.0, 4.0, 5.0}) {
        const auto soft = soft_ecc(K, w, grid, lambda);
        double max_deviation = 0.0;
        for (std::size_t r = 0; r < grid.size(); ++r) {
            max_deviation = std::max(max_deviation,
                                     std::abs(soft[r] - static_cast<double>(exact[r])));
        }
        EXPECT_LT(max_deviation, previous) << "lambda " << lambda;
        previous = max_deviation;
    }
}

TEST(SoftEct, SingleDirectionReducesToSoftEcc) {
    const auto K = random_mesh_complex(6, 3, 2, 8);
    const auto W = sample_directions_uniform(1, 2, 9);
    const auto grid = ThresholdGrid::global_uniform(8, -3.0, 3.0);
    const auto matrix = soft_ect(K, W, grid, 10.0);
    const auto curve = soft_ecc(K, W.direction(0), grid.for_direction(0), 10.0);
    for (int r = 0; r < grid.size(); ++r) {
        EXPECT_DOUBLE_EQ(matrix.values(r, 0), curve[r]);
    }
}

TEST(SoftEct, EntriesBoundedByParityCounts) {
    const auto K = random_mesh_complex(8, 5, 2, 10);
    double even = 0, odd = 0;
    const auto stats = K.stats();
    for (int dim = 0; dim <= stats.top_dimension; ++dim) {
        (dim % 2 == 0 ? even : odd) += static_cast<double>(stats.counts_by_dim[dim]);
    }
    const auto W = sample_directions_uniform(6, 2, 11);
    const auto matrix = soft_ect(K, W, ThresholdGrid::global_uniform(24, -3.0, 3.0), 2.0);
    EXPECT_LE(matrix.values.maxCoeff(), even);
    EXPECT_GE(matrix.values.minCoeff(), -odd);
}

TEST(SoftEct, LargeLambdaRoundsToExactMatrix) {
    const auto K = random_mesh_complex(8, 5, 2, 12);
    const auto W = sample_directions_uniform(5, 2, 13);
    const auto grid = ThresholdGrid::global(nudge_away_from(
        ThresholdGrid::global_uniform(24, -3.0, 3.0).for_direction(0),
        all_filtration_values(K, W), 1e-3));
    const auto exact = ect(K, W, grid);
    const auto soft = soft_ect(K, W, grid, 1e4);
    for (int r = 0; r < grid.size(); ++r) {
        for (int j = 0; j < W.count(); ++j) {
            EXPECT_EQ(std::llround(soft.values(r, j)), exact.values(r, j));
        }
    }
}

TEST(SoftEct, MonotoneConvergenceInLambda) {
    const auto K = octahedron_mesh();
    const auto W = sample_directions_uniform(4, 3, 14);
    const auto grid = ThresholdGrid::global(nudge_away_from(
        ThresholdGrid::global_uniform(16, -2.0, 2.0).for_direction(0),
        all_filtration_values(K, W), 1e-3));
    const auto exact = ect(K, W, grid);
    double previous = std::numeric_limits<double>::infinity();
    for (double lambda = 1.0; lambda <= 16384.0; lambda *= 2.0) {
        const auto soft = soft_ect(K, W, grid, lambda);
        const double error =
            (soft.values - exact.values.cast<double>()).cwiseAbs().maxCoeff();
        EXPECT_LE(error, previous + 1e-12) << "lambda " << lambda;
        previous = error;
    }
}

TEST(SoftEct, PointCloudColumnsAreNonDecreasing) {
    const auto K = GeometricSimplicialComplex::from_point_cloud(random_cloud(20, 2, 15));
    const auto W = sample_directions_uniform(4, 2, 16);
    const auto matrix = soft_ect(K, W, ThresholdGrid::global_uniform(32, -4.0, 4.0), 3.0);
    for (int j = 0; j < matrix.values.cols(); ++j) {
        for (int r = 1; r < matrix.values.rows(); ++r) {
            EXPECT_GE(matrix.values(r, j), matrix.values(r - 1, j));
        }
    }
}

TEST(SoftEct, ContinuousInTheDirection) {
    const auto K = random_mesh_complex(8, 5, 2, 17);
    const double lambda = 50.0;
    const double eps = 1e-7;
    const double max_norm = K.coordinates().rowwise().norm().maxCoeff();
    const auto grid = ThresholdGrid::global_uniform(16, -3.0, 3.0);
    const double angle = 0.83;
    const auto a = soft_ect(K, DirectionSet::from_angles({angle}), grid, lambda);
    const auto b = soft_ect(K, DirectionSet::from_angles({angle + eps}), grid, lambda);
    // Each sigmoid is lambda/4-Lipschitz in f and |df| <= max_norm * |dw|.
    const double bound =
        static_cast<double>(K.simplex_count()) * (lambda / 4.0) * max_norm * eps * 2.0;
    EXPECT_LT((a.values - b.values).cwiseAbs().maxCoeff(), bound);
}

TEST(Backward, ZeroUpstreamGivesZeroGradients) {
    const auto K = random_mesh_complex(6, 3, 2, 18);
    const auto W = sample_directions_uniform(3, 2, 19);
    const auto grid = ThresholdGrid::global_uniform(8, -3.0, 3.0);
    const auto bundle = soft_ect_backward(K, W, grid, 4.0, Matrix::Zero(8, 3));
    EXPECT_EQ(bundle.coordinate_gradients, Matrix::Zero(K.vertex_count(), 2));
    EXPECT_EQ(bundle.threshold_gradients, Matrix::Zero(8, 3));
    EXPECT_EQ(bundle.direction_gradients, Matrix::Zero(3, 2));
    for (double g : bundle.angle_gradients) EXPECT_EQ(g, 0.0);
    EXPECT_EQ(bundle.lambda_gradient, 0.0);
}

TEST(Backward, RejectsBadUpstream) {
    const auto K = random_mesh_complex(6, 3, 2, 18);
    const auto W = sample_directions_uniform(3, 2, 19);
    const auto grid = ThresholdGrid::global_uniform(8, -3.0, 3.0);
    EXPECT_THROW(soft_ect_backward(K, W, grid, 4.0, Matrix::Zero(7, 3)), validation_error);
    Matrix bad = Matrix::Zero(8, 3);
    bad(2, 1) = std::numeric_limits<double>::quiet_NaN();
    EXPECT_THROW(soft_ect_backward(K, W, grid, 4.0, bad), validation_error);
}

// Central finite differences against the analytic backward pass on small
// instances: n <= 10 points, d = 2, k = 4, l = 8, lambda = 4.
TEST(Backward, FiniteDifferenceCheckAnglesAndCoordinates) {
    const double h = 1e-5;
    const double lambda = 4.0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        // Mix point clouds and small meshes.
        const auto K = (seed % 3 == 0)
                           ? random_mesh_complex(6, 3, 2, seed + 500)
                           : GeometricSimplicialComplex::from_point_cloud(
                                 random_cloud(4 + static_cast<int>(seed % 7), 2, seed + 500));
        std::vector<double> angles = sample_angles_normal(4, seed + 600);
        const auto W = DirectionSet::from_angles(angles);
        const auto grid = ThresholdGrid::global_uniform(8, -3.0, 3.0);
        const Matrix upstream = random_upstream(8, 4, seed + 700);

        const auto bundle = soft_ect_backward(K, W, grid, lambda, upstream);

        for (int j = 0; j < 4; ++j) {
            auto plus = angles, minus = angles;
            plus[j] += h;
            minus[j] -= h;
            const double fd = (weighted_sum(K, DirectionSet::from_angles(plus), grid, lambda,
                                            upstream) -
                               weighted_sum(K, DirectionSet::from_angles(minus), grid, lambda,
                                            upstream)) /
                              (2 * h);
            expect_close(bundle.angle_gradients[j], fd,
                         "seed " + std::to_string(seed) + " angle " + std::to_string(j));
        }

        for (int v = 0; v < K.vertex_count(); ++v) {
            for (int c = 0; c < 2; ++c) {
                Matrix plus = K.coordinates(), minus = K.coordinates();
                plus(v, c) += h;
                minus(v, c) -= h;
                auto k_plus = GeometricSimplicialComplex::from_parts(plus, K.simplices_by_dim());
                auto k_minus = GeometricSimplicialComplex::from_parts(minus, K.simplices_by_dim());
                const double fd = (weighted_sum(k_plus, W, grid, lambda, upstream) -
                                   weighted_sum(k_minus, W, grid, lambda, upstream)) /
                                  (2 * h);
                expect_close(bundle.coordinate_gradients(v, c), fd,
                             "seed " + std::to_string(seed) + " coord (" + std::to_string(v) +
                                 "," + std::to_string(c) + ")");
            }
        }
    }
}

TEST(Backward, FiniteDifferenceCheckThresholdsAndLambda) {
    const double h = 1e-5;
    const double lambda = 4.0;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const auto K = GeometricSimplicialComplex::from_point_cloud(random_cloud(8, 2, seed + 800));
        const auto W = sample_directions_uniform(3, 2, seed + 810);
        // Per-direction grids keep each matrix cell's threshold independent.
        const auto grid = per_direction_grid(K, W, 8);
        const Matrix upstream = random_upstream(8, 3, seed + 820);
        const auto bundle = soft_ect_backward(K, W, grid, lambda, upstream);

        for (int m = 0; m < 3; ++m) {
            for (int j = 0; j < 8; ++j) {
                auto grids_plus = std::vector<std::vector<double>>{};
                auto grids_minus = std::vector<std::vector<double>>{};
                for (int g = 0; g < 3; ++g) {
                    grids_plus.push_back(grid.for_direction(g));
                    grids_minus.push_back(grid.for_direction(g));
                }
                grids_plus[m][j] += h;
                grids_minus[m][j] -= h;
                const double fd =
                    (weighted_sum(K, W, ThresholdGrid::per_direction(grids_plus), lambda,
                                  upstream) -
                     weighted_sum(K, W, ThresholdGrid::per_direction(grids_minus), lambda,
                                  upstream)) /
                    (2 * h);
                expect_close(bundle.threshold_gradients(j, m),
                             fd, "seed " + std::to_string(seed) + " t(" + std::to_string(j) +
                                     "," + std::to_string(m) + ")");
            }
        }

        const double fd_lambda = (weighted_sum(K, W, grid, lambda + h, upstream) -
                                  weighted_sum(K, W, grid, lambda - h, upstream)) /
                                 (2 * h);
        expect_close(bundle.lambda_gradient, fd_lambda, "seed " + std::to_string(seed) + " lambda");
    }
}

TEST(Backward, TangentProjectedDirectionGradientsIn3D) {
    const double h = 1e-6;
    const double lambda = 4.0;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const auto K = GeometricSimplicialComplex::from_point_cloud(random_cloud(6, 3, seed + 900));
        const auto W = sample_directions_uniform(3, 3, seed + 910);
        const auto grid = ThresholdGrid::global_uniform(8, -3.0, 3.0);
        const Matrix upstream = random_upstream(8, 3, seed + 920);
        const auto bundle = soft_ect_backward(K, W, grid, lambda, upstream);

        Rng rng(seed + 930);
        for (int m = 0; m < 3; ++m) {
            const Vector w = W.direction(m);
            Vector tangent(3);
            for (int c = 0; c < 3; ++c) tangent[c] = rng.normal();
            tangent -= w * w.dot(tangent);
            tangent.normalize();

            auto moved = [&](double step) {
                Matrix vectors = W.vectors();
                Vector perturbed = (w + step * tangent).normalized();
                vectors.row(m) = perturbed.transpose();
                return DirectionSet::from_vectors(vectors);
            };
            const double fd = (weighted_sum(K, moved(h), grid, lambda, upstream) -
                               weighted_sum(K, moved(-h), grid, lambda, upstream)) /
                              (2 * h);
            expect_close(bundle.direction_gradients.row(m).dot(tangent.transpose()), fd,
                         "seed " + std::to_string(seed) + " direction " + std::to_string(m));
        }
    }
}

TEST(Backward, MaxTieRoutesGradientToTheLowestVertexIndex) {
    // Both endpoints of the edge project to the same value; the edge's
    // gradient must flow to vertex 0 only.
    Matrix coords(2, 2);
    coords << 0.3, 0.4, 0.3, 0.4;
    const auto vertices_only =
        GeometricSimplicialComplex::from_parts(coords, {{Simplex({0}), Simplex({1})}});
    const auto with_edge = GeometricSimplicialComplex::from_parts(
        coords, {{Simplex({0}), Simplex({1})}, {Simplex({0, 1})}});

    const auto W = sample_directions_uniform(3, 2, 60);
    const auto grid = ThresholdGrid::global_uniform(8, -2.0, 2.0);
    const Matrix upstream = random_upstream(8, 3, 61);
    const auto base = soft_ect_backward(vertices_only, W, grid, 4.0, upstream);
    const auto tied = soft_ect_backward(with_edge, W, grid, 4.0, upstream);

    const Matrix edge_part = tied.coordinate_gradients - base.coordinate_gradients;
    EXPECT_GT(edge_part.row(0).norm(), 0.0);
    EXPECT_EQ(edge_part.row(1).norm(), 0.0);
}

TEST(Backward, CoordinateShiftMatchesThresholdShift) {
    // Moving every point by delta along w slides that column in t: the total
    // coordinate gradient along w is minus the column's threshold gradient.
    const auto K = GeometricSimplicialComplex::from_point_cloud(random_cloud(10, 2, 40));
    const auto W = sample_directions_uniform(4, 2, 41);
    const auto grid = ThresholdGrid::global_uniform(12, -3.0, 3.0);
    for (int column = 0; column < W.count(); ++column) {
        Matrix upstream = Matrix::Zero(12, 4);
        upstream.col(column) = random_upstream(12, 1, 42 + column);
        const auto bundle = soft_ect_backward(K, W, grid, 4.0, upstream);

        const double along_w =
            (bundle.coordinate_gradients * W.direction(column)).sum();
        const double threshold_total = -bundle.threshold_gradients.col(column).sum();
        EXPECT_NEAR(along_w, threshold_total, 1e-9 * std::max(1.0, std::abs(along_w)));
    }
}

}  // namespace
