#pragma once

#include "ectkit/complex.hpp"
#include "ectkit/ect_diff.hpp"
#include "ectkit/ect_exact.hpp"
#include "ectkit/errors.hpp"
#include "ectkit/filtration.hpp"

#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace ectkit {

namespace detail {

inline std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline std::uint64_t fnv1a64(const std::string& data) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

/// Line source that skips blanks and '#' comments and remembers line numbers
/// for error messages.
class LineReader {
public:
    LineReader(std::istream& in, std::string path) : in_(in), path_(std::move(path)) {}

    std::optional<std::string> next() {
        std::string line;
        while (std::getline(in_, line)) {
            ++line_number_;
            const auto hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
            return line;
        }
        return std::nullopt;
    }

    [[noreturn]] void fail(const std::string& message) const {
        throw io_error(path_ + ":" + std::to_string(line_number_) + ": " + message);
    }

    [[noreturn]] void fail_eof(const std::string& expected) const {
        throw io_error(path_ + ": unexpected end of file, expected " + expected);
    }

    int line_number() const { return line_number_; }
    const std::string& path() const { return path_; }

private:
    std::istream& in_;
    std::string path_;
    int line_number_ = 0;
};

inline std::vector<std::string> split_tokens(const std::string& line) {
    std::vector<std::string> tokens;
    std::istringstream in(line);
    std::string token;
    while (in >> token) tokens.push_back(std::move(token));
    return tokens;
}

inline double parse_double(const std::string& token, const LineReader& reader) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(token, &pos);
        if (pos != token.size()) reader.fail("trailing characters in number '" + token + "'");
        return v;
    } catch (const io_error&) {
        throw;
    } catch (const std::exception&) {
        reader.fail("expected a number, got '" + token + "'");
    }
}

inline long long parse_int(const std::string& token, const LineReader& reader) {
    try {
        std::size_t pos = 0;
        const long long v = std::stoll(token, &pos);
        if (pos != token.size()) reader.fail("trailing characters in integer '" + token + "'");
        return v;
    } catch (const io_error&) {
        throw;
    } catch (const std::exception&) {
        reader.fail("expected an integer, got '" + token + "'");
    }
}

}  // namespace detail

/// Hex digest used to stamp archives with the producing configuration.
inline std::string config_digest(const std::string& canonical_config) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(detail::fnv1a64(canonical_config)));
    return buf;
}

/// Writes content to path via a temp file + rename, so an interrupted run
/// never leaves a partial file behind.
inline void atomic_write_file(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw io_error("cannot open '" + tmp + "' for writing");
        out << content;
        out.flush();
        if (!out) throw io_error("write to '" + tmp + "' failed");
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw io_error("cannot move temp file into place at '" + path + "'");
    }
}

// ---------------------------------------------------------------------------
// Meshes and point clouds
// ---------------------------------------------------------------------------

struct OffMesh {
    Matrix coordinates;                         ///< n x 3
    std::vector<std::array<int, 3>> triangles;
    int fan_split_faces = 0;  ///< count of non-triangle faces that were fan-triangulated
};

/// Parses the triangle-mesh subset of the OFF format: an `OFF` header line,
/// a `nV nF nE` counts line, nV vertex rows of three reals, then nF face
/// rows `m i0 ... i{m-1}`. Faces with more than three vertices are
/// fan-triangulated (counted in the result). `#` comments and blank lines
/// are ignored. nF = 0 yields a point cloud.
inline OffMesh read_off_mesh(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open '" + path + "'");
    detail::LineReader reader(in, path);

    auto header = reader.next();
    if (!header) reader.fail_eof("OFF header");
    {
        const auto tokens = detail::split_tokens(*header);
        if (tokens.size() != 1 || tokens[0] != "OFF") {
            reader.fail("expected OFF header, got '" + tokens[0] + "'");
        }
    }

    auto counts_line = reader.next();
    if (!counts_line) reader.fail_eof("counts line 'nV nF nE'");
    const auto counts = detail::split_tokens(*counts_line);
    if (counts.size() != 3) reader.fail("counts line must hold exactly 'nV nF nE'");
    const long long n_vertices = detail::parse_int(counts[0], reader);
    const long long n_faces = detail::parse_int(counts[1], reader);
    if (n_vertices < 1) reader.fail("OFF file must declare at least one vertex");
    if (n_faces < 0) reader.fail("face count cannot be negative");

    OffMesh mesh;
    mesh.coordinates.resize(n_vertices, 3);
    for (long long v = 0; v < n_vertices; ++v) {
        auto line = reader.next();
        if (!line) reader.fail_eof("vertex row " + std::to_string(v));
        const auto tokens = detail::split_tokens(*line);
        if (tokens.size() != 3) reader.fail("vertex row must hold exactly 3 coordinates");
        for (int c = 0; c < 3; ++c) {
            mesh.coordinates(v, c) = detail::parse_double(tokens[c], reader);
        }
    }

    for (long long f = 0; f < n_faces; ++f) {
        auto line = reader.next();
        if (!line) reader.fail_eof("face row " + std::to_string(f));
        const auto tokens = detail::split_tokens(*line);
        if (tokens.empty()) reader.fail("empty face row");
        const long long m = detail::parse_int(tokens[0], reader);
        if (m < 3) reader.fail("face needs at least 3 vertices");
        if (static_cast<long long>(tokens.size()) != m + 1) {
            reader.fail("face row declares " + std::to_string(m) + " vertices but holds " +
                        std::to_string(tokens.size() - 1));
        }
        std::vector<int> face(m);
        for (long long i = 0; i < m; ++i) {
            const long long idx = detail::parse_int(tokens[i + 1], reader);
            if (idx < 0 || idx >= n_vertices) {
                reader.fail("vertex index " + std::to_string(idx) + " out of range [0," +
                            std::to_string(n_vertices) + ")");
            }
            face[i] = static_cast<int>(idx);
        }
        if (m > 3) ++mesh.fan_split_faces;
        for (long long i = 1; i + 1 < m; ++i) {
            mesh.triangles.push_back({face[0], face[i], face[i + 1]});
        }
    }
    return mesh;
}

inline void write_off_mesh(const Matrix& coordinates,
                           const std::vector<std::array<int, 3>>& triangles,
                           const std::string& path) {
    if (coordinates.cols() != 3) throw validation_error("OFF output requires d = 3");
    std::ostringstream out;
    out << "OFF\n" << coordinates.rows() << ' ' << triangles.size() << " 0\n";
    for (Eigen::Index v = 0; v < coordinates.rows(); ++v) {
        out << detail::format_double(coordinates(v, 0)) << ' '
            << detail::format_double(coordinates(v, 1)) << ' '
            << detail::format_double(coordinates(v, 2)) << '\n';
    }
    for (const auto& t : triangles) {
        out << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
    }
    atomic_write_file(path, out.str());
}

/// Whitespace-separated coordinate table: one point per nonblank line,
/// consistent column count, `#` comments skipped.
inline Matrix read_point_cloud_text(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open '" + path + "'");
    detail::LineReader reader(in, path);

    std::vector<std::vector<double>> rows;
    while (auto line = reader.next()) {
        const auto tokens = detail::split_tokens(*line);
        std::vector<double> row;
        row.reserve(tokens.size());
        for (const auto& t : tokens) row.push_back(detail::parse_double(t, reader));
        if (!rows.empty() && row.size() != rows.front().size()) {
            reader.fail("row has " + std::to_string(row.size()) + " columns, expected " +
                        std::to_string(rows.front().size()));
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw io_error(path + ": no points found");

    Matrix points(static_cast<int>(rows.size()), static_cast<int>(rows.front().size()));
    for (std::size_t r = 0; r < rows.size(); ++r) {
        for (std::size_t c = 0; c < rows.front().size(); ++c) {
            points(static_cast<int>(r), static_cast<int>(c)) = rows[r][c];
        }
    }
    return points;
}

inline void write_point_cloud_text(const Matrix& points, const std::string& path) {
    std::ostringstream out;
    for (Eigen::Index r = 0; r < points.rows(); ++r) {
        for (Eigen::Index c = 0; c < points.cols(); ++c) {
            if (c > 0) out << ' ';
            out << detail::format_double(points(r, c));
        }
        out << '\n';
    }
    atomic_write_file(path, out.str());
}

// ---------------------------------------------------------------------------
// Matrix exports
// ---------------------------------------------------------------------------

namespace detail {

/// CSV body shared by the exact and smooth writers. The first column carries
/// the threshold for global grids; per-direction grids have no shared row
/// threshold, so the row index is written instead.
template <typename Derived>
inline std::string matrix_csv_text(const Eigen::MatrixBase<Derived>& values,
                                   const ThresholdGrid& grid, bool integral) {
    std::ostringstream out;
    out << "t";
    for (Eigen::Index c = 0; c < values.cols(); ++c) out << ",dir_" << c;
    out << '\n';
    for (Eigen::Index r = 0; r < values.rows(); ++r) {
        if (grid.strategy() == GridStrategy::global) {
            out << format_double(grid.for_direction(0)[r]);
        } else {
            out << r;
        }
        for (Eigen::Index c = 0; c < values.cols(); ++c) {
            out << ',';
            if (integral) {
                out << static_cast<long long>(values(r, c));
            } else {
                out << format_double(static_cast<double>(values(r, c)));
            }
        }
        out << '\n';
    }
    return out.str();
}

}  // namespace detail

inline void write_matrix_csv(const EctMatrix& m, const std::string& path) {
    atomic_write_file(path, detail::matrix_csv_text(m.values, m.thresholds, true));
}

inline void write_matrix_csv(const SmoothEctMatrix& m, const std::string& path) {
    atomic_write_file(path, detail::matrix_csv_text(m.values, m.thresholds, false));
}

struct CsvMatrix {
    std::vector<double> axis;  ///< first column (thresholds or row indices)
    Matrix values;
};

inline CsvMatrix read_matrix_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open '" + path + "'");
    detail::LineReader reader(in, path);

    auto header = reader.next();
    if (!header) reader.fail_eof("CSV header");
    std::size_t columns = 0;
    for (char c : *header) {
        if (c == ',') ++columns;
    }
    if (columns < 1) reader.fail("CSV header declares no direction columns");

    CsvMatrix out;
    std::vector<std::vector<double>> rows;
    while (auto line = reader.next()) {
        std::vector<double> row;
        std::string token;
        std::istringstream ss(*line);
        while (std::getline(ss, token, ',')) row.push_back(detail::parse_double(token, reader));
        if (row.size() != columns + 1) {
            reader.fail("row holds " + std::to_string(row.size()) + " fields, expected " +
                        std::to_string(columns + 1));
        }
        out.axis.push_back(row.front());
        rows.push_back(std::move(row));
    }
    out.values.resize(static_cast<int>(rows.size()), static_cast<int>(columns));
    for (std::size_t r = 0; r < rows.size(); ++r) {
        for (std::size_t c = 0; c < columns; ++c) {
            out.values(static_cast<int>(r), static_cast<int>(c)) = rows[r][c + 1];
        }
    }
    return out;
}

/// 16-bit ASCII PGM (P2). Matrix row 0, the lowest threshold, becomes the
/// top image row. Values are min-max scaled onto [0, 65535]; the scaling
/// constants land in a `<path>.meta` sidecar so the image stays invertible.
/// A constant matrix maps to all zeros.
inline void write_matrix_pgm(const Matrix& values, const std::string& path) {
    if (values.size() == 0) throw validation_error("cannot export an empty matrix");
    if (!values.allFinite()) throw validation_error("PGM export requires finite entries");

    const double lo = values.minCoeff();
    const double hi = values.maxCoeff();
    const double span = hi - lo;

    std::ostringstream out;
    out << "P2\n" << values.cols() << ' ' << values.rows() << "\n65535\n";
    for (Eigen::Index r = 0; r < values.rows(); ++r) {
        for (Eigen::Index c = 0; c < values.cols(); ++c) {
            const long gray =
                span > 0.0 ? std::lround((values(r, c) - lo) / span * 65535.0) : 0L;
            if (c > 0) out << ' ';
            out << gray;
        }
        out << '\n';
    }
    atomic_write_file(path, out.str());

    std::ostringstream meta;
    meta << "min " << detail::format_double(lo) << "\nmax " << detail::format_double(hi)
         << "\nmaxval 65535\n";
    atomic_write_file(path + ".meta", meta.str());
}

// ---------------------------------------------------------------------------
// ECT archives
// ---------------------------------------------------------------------------

/// Self-describing serialized transform: values plus every input needed to
/// reconstruct the in-memory matrix (directions, thresholds, lambda) and the
/// provenance that produced it (seed, config digest).
struct EctArchive {
    bool smooth = false;
    Matrix values;       ///< exact transforms store integral entries
    double lambda = 0.0; ///< meaningful only when smooth
    DirectionSet directions;
    ThresholdGrid thresholds;
    std::uint64_t seed = 0;
    std::string config;  ///< digest of the producing configuration
};

inline EctArchive make_archive(const EctMatrix& m, std::uint64_t seed, std::string config) {
    return {false, m.values.cast<double>(), 0.0, m.directions, m.thresholds, seed,
            std::move(config)};
}

inline EctArchive make_archive(const SmoothEctMatrix& m, std::uint64_t seed, std::string config) {
    return {true, m.values, m.lambda, m.directions, m.thresholds, seed, std::move(config)};
}

inline EctMatrix to_ect_matrix(const EctArchive& a) {
    if (a.smooth) throw validation_error("archive holds a smooth transform");
    EctValues values(a.values.rows(), a.values.cols());
    for (Eigen::Index c = 0; c < a.values.cols(); ++c) {
        for (Eigen::Index r = 0; r < a.values.rows(); ++r) {
            values(r, c) = std::llround(a.values(r, c));
        }
    }
    return {std::move(values), a.directions, a.thresholds};
}

inline SmoothEctMatrix to_smooth_ect_matrix(const EctArchive& a) {
    if (!a.smooth) throw validation_error("archive holds an exact transform");
    return {a.values, a.lambda, a.directions, a.thresholds};
}

inline constexpr const char* kArchiveHeader = "ECTKIT v1";

inline void write_ect_archive(const EctArchive& a, const std::string& path) {
    const int l = static_cast<int>(a.values.rows());
    const int k = static_cast<int>(a.values.cols());
    std::ostringstream out;
    out << kArchiveHeader << '\n';
    out << "kind " << (a.smooth ? "smooth" : "exact") << '\n';
    out << "rows " << l << '\n';
    out << "cols " << k << '\n';
    if (a.smooth) out << "lambda " << detail::format_double(a.lambda) << '\n';
    out << "seed " << a.seed << '\n';
    out << "config " << (a.config.empty() ? "none" : a.config) << '\n';

    if (a.directions.has_angles()) {
        out << "directions angles\n";
        for (double angle : a.directions.angles()) {
            out << detail::format_double(angle) << '\n';
        }
    } else {
        out << "directions vectors " << a.directions.dimension() << '\n';
        for (int j = 0; j < a.directions.count(); ++j) {
            for (int c = 0; c < a.directions.dimension(); ++c) {
                if (c > 0) out << ' ';
                out << detail::format_double(a.directions.vectors()(j, c));
            }
            out << '\n';
        }
    }

    out << "thresholds "
        << (a.thresholds.strategy() == GridStrategy::global ? "global" : "per-direction") << '\n';
    const int grid_lines = a.thresholds.strategy() == GridStrategy::global ? 1 : k;
    for (int g = 0; g < grid_lines; ++g) {
        const auto& grid = a.thresholds.for_direction(g);
        for (int r = 0; r < l; ++r) {
            if (r > 0) out << ' ';
            out << detail::format_double(grid[r]);
        }
        if (a.thresholds.degenerate(g)) out << " degenerate";
        out << '\n';
    }

    out << "matrix\n";
    for (int r = 0; r < l; ++r) {
        for (int c = 0; c < k; ++c) {
            if (c > 0) out << ' ';
            if (a.smooth) {
                out << detail::format_double(a.values(r, c));
            } else {
                out << static_cast<long long>(a.values(r, c));
            }
        }
        out << '\n';
    }
    out << "end\n";
    atomic_write_file(path, out.str());
}

namespace detail {

inline std::vector<std::string> expect_line(LineReader& reader, const std::string& what) {
    auto line = reader.next();
    if (!line) reader.fail_eof(what);
    return split_tokens(*line);
}

inline std::string expect_field(LineReader& reader, const std::string& key) {
    const auto tokens = expect_line(reader, "'" + key + "' line");
    if (tokens.size() != 2 || tokens[0] != key) {
        reader.fail("expected '" + key + " <value>'");
    }
    return tokens[1];
}

}  // namespace detail

inline EctArchive read_ect_archive(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open '" + path + "'");
    detail::LineReader reader(in, path);

    {
        auto line = reader.next();
        if (!line) reader.fail_eof("archive header");
        if (detail::split_tokens(*line) != detail::split_tokens(kArchiveHeader)) {
            reader.fail("not an ECTKIT v1 archive");
        }
    }

    const std::string kind = detail::expect_field(reader, "kind");
    if (kind != "exact" && kind != "smooth") reader.fail("kind must be exact or smooth");
    const bool smooth = kind == "smooth";
    const long long l = detail::parse_int(detail::expect_field(reader, "rows"), reader);
    const long long k = detail::parse_int(detail::expect_field(reader, "cols"), reader);
    if (l < 1 || k < 1) reader.fail("archive shape must be positive");

    double lambda = 0.0;
    if (smooth) lambda = detail::parse_double(detail::expect_field(reader, "lambda"), reader);
    const std::uint64_t seed =
        static_cast<std::uint64_t>(detail::parse_int(detail::expect_field(reader, "seed"), reader));
    const std::string config = detail::expect_field(reader, "config");

    const auto dir_header = detail::expect_line(reader, "directions header");
    if (dir_header.empty() || dir_header[0] != "directions") reader.fail("expected directions header");
    std::optional<DirectionSet> directions;
    if (dir_header.size() == 2 && dir_header[1] == "angles") {
        std::vector<double> angles(k);
        for (long long j = 0; j < k; ++j) {
            const auto tokens = detail::expect_line(reader, "angle value");
            if (tokens.size() != 1) reader.fail("angle rows hold exactly one value");
            angles[j] = detail::parse_double(tokens[0], reader);
        }
        directions = DirectionSet::from_angles(std::move(angles));
    } else if (dir_header.size() == 3 && dir_header[1] == "vectors") {
        const long long d = detail::parse_int(dir_header[2], reader);
        if (d < 2) reader.fail("direction dimension must be >= 2");
        Matrix vectors(k, d);
        for (long long j = 0; j < k; ++j) {
            const auto tokens = detail::expect_line(reader, "direction vector");
            if (static_cast<long long>(tokens.size()) != d) {
                reader.fail("direction row must hold " + std::to_string(d) + " components");
            }
            for (long long c = 0; c < d; ++c) {
                vectors(j, c) = detail::parse_double(tokens[c], reader);
            }
        }
        directions = DirectionSet::from_vectors(std::move(vectors));
    } else {
        reader.fail("directions header must be 'directions angles' or 'directions vectors <d>'");
    }

    const auto grid_header = detail::expect_line(reader, "thresholds header");
    if (grid_header.size() != 2 || grid_header[0] != "thresholds" ||
        (grid_header[1] != "global" && grid_header[1] != "per-direction")) {
        reader.fail("expected 'thresholds global|per-direction'");
    }
    const bool global = grid_header[1] == "global";
    const int grid_lines = global ? 1 : static_cast<int>(k);
    std::vector<std::vector<double>> grids(grid_lines);
    std::vector<bool> degenerate(grid_lines, false);
    for (int g = 0; g < grid_lines; ++g) {
        auto tokens = detail::expect_line(reader, "threshold grid row");
        if (!tokens.empty() && tokens.back() == "degenerate") {
            degenerate[g] = true;
            tokens.pop_back();
        }
        if (static_cast<long long>(tokens.size()) != l) {
            reader.fail("grid row must hold " + std::to_string(l) + " thresholds");
        }
        grids[g].resize(l);
        for (long long r = 0; r < l; ++r) grids[g][r] = detail::parse_double(tokens[r], reader);
    }
    ThresholdGrid thresholds = global ? ThresholdGrid::global(std::move(grids.front()))
                                      : ThresholdGrid::per_direction(std::move(grids),
                                                                     std::move(degenerate));

    {
        const auto tokens = detail::expect_line(reader, "matrix marker");
        if (tokens.size() != 1 || tokens[0] != "matrix") reader.fail("expected 'matrix'");
    }
    Matrix values(l, k);
    for (long long r = 0; r < l; ++r) {
        const auto tokens = detail::expect_line(reader, "matrix row");
        if (static_cast<long long>(tokens.size()) != k) {
            reader.fail("matrix row must hold " + std::to_string(k) + " values");
        }
        for (long long c = 0; c < k; ++c) values(r, c) = detail::parse_double(tokens[c], reader);
    }
    {
        const auto tokens = detail::expect_line(reader, "end marker");
        if (tokens.size() != 1 || tokens[0] != "end") reader.fail("expected 'end'");
    }

    return {smooth, std::move(values), lambda, std::move(*directions), std::move(thresholds),
            seed, config};
}

}  // namespace ectkit
