#include "ectkit/filtration.hpp"

#include "test_util.hpp"

#include <gtest/gtest.h>

namespace {

using namespace ectkit;
using namespace ectkit::testing;

GeometricSimplicialComplex segment_complex() {
    Matrix coords(2, 2);
    coords << -1, 0, 1, 0;
    return GeometricSimplicialComplex::from_parts(
        coords, {{Simplex({0}), Simplex({1})}, {Simplex({0, 1})}});
}

Vector dir2(double x, double y) {
    Vector w(2);
    w << x, y;
    return w;
}

TEST(DirectionSet, AnglesProduceUnitVectors) {
    const auto W = DirectionSet::from_angles({0.0, std::numbers::pi / 2});
    EXPECT_EQ(W.count(), 2);
    EXPECT_TRUE(W.has_angles());
    EXPECT_NEAR(W.vectors()(0, 0), 1.0, 1e-15);
    EXPECT_NEAR(W.vectors()(1, 1), 1.0, 1e-15);
}

TEST(DirectionSet, RejectsNonUnitRows) {
    Matrix bad(1, 2);
    bad << 1.0, 1.0;
    EXPECT_THROW(DirectionSet::from_vectors(bad), validation_error);

    // Inside tolerance: accepted, and evaluation renormalizes silently.
    Matrix nearly(1, 2);
    nearly << 1.0 + 5e-10, 0.0;
    const auto W = DirectionSet::from_vectors(nearly);
    const auto K = segment_complex();
    const auto f_nearly = filtration_values(K, W.direction(0));
    const auto f_unit = filtration_values(K, dir2(1, 0));
    EXPECT_DOUBLE_EQ(f_nearly.by_dim[0][0], f_unit.by_dim[0][0]);
    EXPECT_DOUBLE_EQ(f_nearly.by_dim[0][1], f_unit.by_dim[0][1]);
}

TEST(FiltrationValues, SingleVertexAtOriginIsZero) {
    Matrix coords(1, 2);
    coords << 0, 0;
    const auto K = GeometricSimplicialComplex::from_point_cloud(coords);
    for (double angle : {0.0, 0.7, 2.9}) {
        const auto f = filtration_values(K, dir2(std::cos(angle), std::sin(angle)));
        EXPECT_EQ(f.by_dim[0], std::vector<double>{0.0});
    }
}

TEST(FiltrationValues, EdgeTakesMaxOfEndpoints) {
    const auto f = filtration_values(segment_complex(), dir2(1, 0));
    EXPECT_EQ(f.by_dim[0], (std::vector<double>{-1.0, 1.0}));
    EXPECT_EQ(f.by_dim[1], std::vector<double>{1.0});
}

TEST(FiltrationValues, UnitSquareCornersUnderVerticalDirection) {
    Matrix coords(4, 2);
    coords << 0, 0, 1, 0, 0, 1, 1, 1;
    const auto K = GeometricSimplicialComplex::from_point_cloud(coords);
    const auto f = filtration_values(K, dir2(0, 1));
    EXPECT_EQ(f.by_dim[0], (std::vector<double>{0.0, 0.0, 1.0, 1.0}));
}

TEST(FiltrationValues, NonUnitDirectionRejected) {
    EXPECT_THROW(filtration_values(segment_complex(), dir2(0.5, 0)), validation_error);
}

TEST(FiltrationValues, FaceMonotoneExactly) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const auto K = random_mesh_complex(8, 5, 3, seed);
        const auto W = sample_directions_uniform(3, 3, seed + 100);
        for (int j = 0; j < W.count(); ++j) {
            const auto f = filtration_values(K, W.direction(j));
            // Compare each simplex against every stored face one dimension down.
            for (std::size_t dim = 1; dim < K.simplices_by_dim().size(); ++dim) {
                for (std::size_t s = 0; s < K.simplices_by_dim()[dim].size(); ++s) {
                    const auto& simplex = K.simplices_by_dim()[dim][s];
                    for (std::size_t lo = 0; lo < K.simplices_by_dim()[dim - 1].size(); ++lo) {
                        const auto& face = K.simplices_by_dim()[dim - 1][lo];
                        const bool is_face = std::includes(
                            simplex.vertices().begin(), simplex.vertices().end(),
                            face.vertices().begin(), face.vertices().end());
                        if (is_face) {
                            EXPECT_LE(f.by_dim[dim - 1][lo], f.by_dim[dim][s]);
                        }
                    }
                }
            }
        }
    }
}

TEST(FiltrationValues, RotationEquivariant) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const auto K = random_mesh_complex(7, 4, 3, seed);
        const Matrix R = random_rotation(3, seed + 7);
        const auto W = sample_directions_uniform(2, 3, seed + 17);
        for (int j = 0; j < W.count(); ++j) {
            const Vector w = W.direction(j);
            const auto base = filtration_values(K, w);
            const auto rotated = filtration_values(rotate_complex(K, R), (R * w).eval());
            for (std::size_t dim = 0; dim < base.by_dim.size(); ++dim) {
                for (std::size_t s = 0; s < base.by_dim[dim].size(); ++s) {
                    EXPECT_NEAR(base.by_dim[dim][s], rotated.by_dim[dim][s], 1e-9);
                }
            }
        }
    }
}

TEST(FiltrationValues, ScalesLinearlyWithCoordinates) {
    const double c = 3.25;
    const auto K = random_mesh_complex(6, 3, 2, 4);
    auto scaled = GeometricSimplicialComplex::from_parts((K.coordinates() * c).eval(),
                                                         K.simplices_by_dim());
    const Vector w = dir2(std::cos(0.3), std::sin(0.3));
    const auto base = filtration_values(K, w);
    const auto big = filtration_values(scaled, w);
    for (std::size_t dim = 0; dim < base.by_dim.size(); ++dim) {
        for (std::size_t s = 0; s < base.by_dim[dim].size(); ++s) {
            EXPECT_NEAR(big.by_dim[dim][s], c * base.by_dim[dim][s], 1e-12);
        }
    }
}

TEST(SublevelComplex, EndpointsAndNesting) {
    const auto K = random_mesh_complex(8, 4, 2, 12);
    const Vector w = dir2(0, 1);
    const auto f = filtration_values(K, w);
    double lo = f.by_dim[0].front(), hi = f.by_dim[0].front();
    for (const auto& bucket : f.by_dim) {
        for (double v : bucket) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    }

    const auto everything = sublevel_complex(K, w, hi + 1.0);
    EXPECT_EQ(everything.simplex_count(), K.simplex_count());

    const auto nothing = sublevel_complex(K, w, lo - 1.0);
    EXPECT_EQ(nothing.simplex_count(), 0);
    EXPECT_EQ(euler_characteristic(nothing), 0);

    // t1 <= t2 implies containment.
    Rng rng(77);
    for (int trial = 0; trial < 20; ++trial) {
        double t1 = rng.uniform(lo - 0.2, hi + 0.2);
        double t2 = rng.uniform(lo - 0.2, hi + 0.2);
        if (t1 > t2) std::swap(t1, t2);
        const auto small = sublevel_complex(K, w, t1);
        const auto large = sublevel_complex(K, w, t2);
        for (std::size_t dim = 0; dim < small.simplices_by_dim().size(); ++dim) {
            for (const auto& s : small.simplices_by_dim()[dim]) {
                const auto& bucket = large.simplices_by_dim()[dim];
                EXPECT_NE(std::find(bucket.begin(), bucket.end(), s), bucket.end());
            }
        }
    }
}

TEST(SublevelComplex, SweepIsNestedIncreasingFamily) {
    // Sweeping t upward only ever adds simplices.
    const auto K = random_mesh_complex(10, 6, 3, 3);
    const Vector w = (Vector(3) << 0, 1, 0).finished();
    std::int64_t previous = -1;
    for (double t = -4.0; t <= 4.0; t += 0.25) {
        const auto sub = sublevel_complex(K, w, t);
        EXPECT_GE(sub.simplex_count(), previous);
        previous = sub.simplex_count();
    }
    EXPECT_EQ(previous, K.simplex_count());
}

TEST(SortedDimensionValues, CountsEverythingAtInfinity) {
    const auto K = random_mesh_complex(9, 5, 2, 8);
    const auto sorted = sorted_dimension_values(K, dir2(1, 0));
    const auto stats = K.stats();
    for (int dim = 0; dim <= stats.top_dimension; ++dim) {
        EXPECT_EQ(sorted.count_at(dim, std::numeric_limits<double>::infinity()),
                  stats.counts_by_dim[dim]);
    }
}

TEST(SortedDimensionValues, SegmentVertexValuesSorted) {
    const auto sorted = sorted_dimension_values(segment_complex(), dir2(1, 0));
    EXPECT_EQ(sorted.by_dim[0], (std::vector<double>{-1.0, 1.0}));
}

TEST(SortedDimensionValues, BinarySearchMatchesExplicitSubcomplexOracle) {
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
        const auto K = random_mesh_complex(8, 5, 2, seed + 30);
        const auto W = sample_directions_uniform(2, 2, seed + 60);
        for (int j = 0; j < W.count(); ++j) {
            const Vector w = W.direction(j);
            const auto sorted = sorted_dimension_values(K, w);
            Rng rng(seed + 90);
            for (int trial = 0; trial < 100; ++trial) {
                const double t = rng.uniform(-3.0, 3.0);
                const auto sub = sublevel_complex(K, w, t);
                const auto stats = K.stats();
                for (int dim = 0; dim <= stats.top_dimension; ++dim) {
                    const std::int64_t oracle =
                        dim < static_cast<int>(sub.simplices_by_dim().size())
                            ? static_cast<std::int64_t>(sub.simplices_by_dim()[dim].size())
                            : 0;
                    EXPECT_EQ(sorted.count_at(dim, t), oracle);
                }
            }
        }
    }
}

}  // namespace
