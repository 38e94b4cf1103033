#pragma once

#include "ectkit/complex.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <vector>

namespace ectkit {

/// Classical cell counts of the five platonic solids with polygonal
/// (untriangulated) faces. The geometric factories below triangulate, so
/// their edge/face counts differ; this table keeps the textbook numbers.
struct PlatonicCellCounts {
    const char* name;
    int euler_characteristic;
    int vertices;
    int edges;
    int faces;
};

inline constexpr std::array<PlatonicCellCounts, 5> platonic_cell_counts = {{
    {"tetrahedron", 2, 4, 6, 4},
    {"cube", 2, 8, 12, 6},
    {"octahedron", 2, 6, 12, 8},
    {"dodecahedron", 2, 20, 30, 12},
    {"icosahedron", 2, 12, 30, 20},
}};

inline GeometricSimplicialComplex tetrahedron_mesh() {
    Matrix coords(4, 3);
    coords << 1, 1, 1,
              1, -1, -1,
              -1, 1, -1,
              -1, -1, 1;
    const std::vector<std::array<int, 3>> faces = {
        {0, 1, 2}, {0, 1, 3}, {0, 2, 3}, {1, 2, 3}};
    return GeometricSimplicialComplex::from_triangle_mesh(std::move(coords), faces);
}

/// Cube surface with each square face split into two triangles
/// (8 vertices, 18 edges, 12 triangles).
inline GeometricSimplicialComplex cube_mesh() {
    Matrix coords(8, 3);
    coords << -1, -1, -1,
              1, -1, -1,
              1, 1, -1,
              -1, 1, -1,
              -1, -1, 1,
              1, -1, 1,
              1, 1, 1,
              -1, 1, 1;
    const std::vector<std::array<int, 3>> faces = {
        {0, 1, 2}, {0, 2, 3},  // bottom
        {4, 5, 6}, {4, 6, 7},  // top
        {0, 1, 5}, {0, 5, 4},  // front
        {3, 2, 6}, {3, 6, 7},  // back
        {0, 3, 7}, {0, 7, 4},  // left
        {1, 2, 6}, {1, 6, 5},  // right
    };
    return GeometricSimplicialComplex::from_triangle_mesh(std::move(coords), faces);
}

inline GeometricSimplicialComplex octahedron_mesh() {
    Matrix coords(6, 3);
    coords << 1, 0, 0,
              -1, 0, 0,
              0, 1, 0,
              0, -1, 0,
              0, 0, 1,
              0, 0, -1;
    const std::vector<std::array<int, 3>> faces = {
        {0, 2, 4}, {1, 2, 4}, {1, 3, 4}, {0, 3, 4},
        {0, 2, 5}, {1, 2, 5}, {1, 3, 5}, {0, 3, 5}};
    return GeometricSimplicialComplex::from_triangle_mesh(std::move(coords), faces);
}

namespace detail {

inline Matrix icosahedron_coordinates() {
    const double p = std::numbers::phi;
    Matrix coords(12, 3);
    coords << -1, p, 0,
              1, p, 0,
              -1, -p, 0,
              1, -p, 0,
              0, -1, p,
              0, 1, p,
              0, -1, -p,
              0, 1, -p,
              p, 0, -1,
              p, 0, 1,
              -p, 0, -1,
              -p, 0, 1;
    return coords;
}

inline const std::vector<std::array<int, 3>>& icosahedron_faces() {
    static const std::vector<std::array<int, 3>> faces = {
        {0, 11, 5}, {0, 5, 1}, {0, 1, 7}, {0, 7, 10}, {0, 10, 11},
        {1, 5, 9}, {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
        {3, 9, 4}, {3, 4, 2}, {3, 2, 6}, {3, 6, 8}, {3, 8, 9},
        {4, 9, 5}, {2, 4, 11}, {6, 2, 10}, {8, 6, 7}, {9, 8, 1}};
    return faces;
}

}  // namespace detail

inline GeometricSimplicialComplex icosahedron_mesh() {
    return GeometricSimplicialComplex::from_triangle_mesh(
        detail::icosahedron_coordinates(), detail::icosahedron_faces());
}

/// Dodecahedron surface built as the dual of the icosahedron: one vertex per
/// icosahedral face centroid, one pentagon per icosahedral vertex, each
/// pentagon fan-triangulated (20 vertices, 54 edges, 36 triangles).
inline GeometricSimplicialComplex dodecahedron_mesh() {
    const Matrix ico = detail::icosahedron_coordinates();
    const auto& ico_faces = detail::icosahedron_faces();

    Matrix centers(static_cast<int>(ico_faces.size()), 3);
    for (std::size_t f = 0; f < ico_faces.size(); ++f) {
        centers.row(static_cast<int>(f)) =
            (ico.row(ico_faces[f][0]) + ico.row(ico_faces[f][1]) + ico.row(ico_faces[f][2])) / 3.0;
    }

    std::vector<std::array<int, 3>> triangles;
    triangles.reserve(36);
    for (int v = 0; v < 12; ++v) {
        // The pentagon around icosahedral vertex v: its five incident faces.
        std::vector<int> ring;
        for (std::size_t f = 0; f < ico_faces.size(); ++f) {
            for (int corner : ico_faces[f]) {
                if (corner == v) ring.push_back(static_cast<int>(f));
            }
        }
        // Order the five centroids by angle in the plane normal to the vertex.
        const Eigen::Vector3d axis = ico.row(v).normalized();
        Eigen::Vector3d ref = centers.row(ring[0]).transpose();
        ref -= axis * axis.dot(ref);
        ref.normalize();
        const Eigen::Vector3d ortho = axis.cross(ref);
        std::sort(ring.begin(), ring.end(), [&](int a, int b) {
            const Eigen::Vector3d pa = centers.row(a).transpose();
            const Eigen::Vector3d pb = centers.row(b).transpose();
            return std::atan2(ortho.dot(pa), ref.dot(pa)) < std::atan2(ortho.dot(pb), ref.dot(pb));
        });
        for (int i = 1; i + 1 < static_cast<int>(ring.size()); ++i) {
            triangles.push_back({ring[0], ring[i], ring[i + 1]});
        }
    }
    return GeometricSimplicialComplex::from_triangle_mesh(centers, triangles);
}

}  // namespace ectkit
