// ectkit command-line interface.
//
// Subcommands: chi, ecc, ect, learn-directions, learn-coordinates,
// normalize, gen. Exit codes: 0 success, 1 validation/usage error,
// 2 I/O error, 3 optimization divergence.

#include "ectkit/ectkit.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace {

using namespace ectkit;

bool has_off_extension(const std::string& path) {
    const auto ext = std::filesystem::path(path).extension().string();
    return ext == ".off" || ext == ".OFF";
}

GeometricSimplicialComplex load_complex(const std::string& path, bool normalize) {
    GeometricSimplicialComplex K = [&] {
        if (has_off_extension(path)) {
            OffMesh mesh = read_off_mesh(path);
            if (mesh.fan_split_faces > 0) {
                std::cerr << "warning: " << mesh.fan_split_faces
                          << " non-triangle face(s) were fan-triangulated\n";
            }
            return GeometricSimplicialComplex::from_triangle_mesh(std::move(mesh.coordinates),
                                                                  mesh.triangles);
        }
        return GeometricSimplicialComplex::from_point_cloud(read_point_cloud_text(path));
    }();
    if (!normalize) return K;
    return normalize_to_unit_ball(K).complex;
}

Vector parse_direction(const std::string& spec) {
    std::vector<double> parts;
    std::stringstream ss(spec);
    std::string token;
    while (std::getline(ss, token, ',')) {
        try {
            std::size_t pos = 0;
            parts.push_back(std::stod(token, &pos));
            if (pos != token.size()) throw std::invalid_argument(token);
        } catch (const std::exception&) {
            throw validation_error("cannot parse direction component '" + token + "'");
        }
    }
    if (parts.size() < 2) throw validation_error("--direction needs at least two components");
    Vector w(static_cast<int>(parts.size()));
    for (std::size_t i = 0; i < parts.size(); ++i) w[static_cast<int>(i)] = parts[i];
    const double norm = w.norm();
    if (norm <= 0.0) throw validation_error("direction must be nonzero");
    return w / norm;
}

std::string trace_text(const OptimizeTrace& trace, int total_steps) {
    std::ostringstream out;
    for (const auto& [step, loss] : trace.logged) {
        out << step << ' ' << detail::format_double(loss) << '\n';
    }
    out << total_steps << ' ' << detail::format_double(trace.final_loss) << '\n';
    return out.str();
}

struct LearnFlags {
    std::string input;
    std::string out_prefix;
    int k = 32;
    int l = 64;
    double lambda = 100.0;
    int steps = 1000;
    double lr = 0.1;
    std::uint64_t seed = 42;
    int log_every = 10;
    bool normalize = false;
};

void run_chi(const std::string& input) {
    std::cout << euler_characteristic(load_complex(input, false)) << '\n';
}

void run_ecc(const std::string& input, const std::string& direction_spec, double angle,
             bool has_angle, int l, bool normalize, const std::string& output) {
    const GeometricSimplicialComplex K = load_complex(input, normalize);
    Vector w;
    if (has_angle) {
        if (K.ambient_dimension() != 2) {
            throw validation_error("--angle only applies to 2-dimensional inputs");
        }
        w = Vector(2);
        w << std::cos(angle), std::sin(angle);
    } else if (!direction_spec.empty()) {
        w = parse_direction(direction_spec);
        if (w.size() != K.ambient_dimension()) {
            throw validation_error("direction dimension does not match the input");
        }
    } else {
        throw validation_error("ecc needs --direction or --angle");
    }

    const ThresholdGrid grid = ThresholdGrid::global_uniform(l);
    const std::vector<std::int64_t> curve = ecc(K, w, grid.for_direction(0));
    std::ostringstream out;
    for (int j = 0; j < l; ++j) {
        out << detail::format_double(grid.for_direction(0)[j]) << ' ' << curve[j] << '\n';
    }
    if (output.empty()) {
        std::cout << out.str();
    } else {
        atomic_write_file(output, out.str());
    }
}

void run_ect(const std::string& input, int k, int l, const std::string& strategy, double lambda,
             bool has_lambda, std::uint64_t seed, bool normalize, const std::string& output,
             const std::string& csv, const std::string& pgm) {
    const GeometricSimplicialComplex K = load_complex(input, normalize);
    const DirectionSet directions = sample_directions_uniform(k, K.ambient_dimension(), seed);

    ThresholdGrid grid = [&] {
        if (strategy == "global") return ThresholdGrid::global_uniform(l);
        if (strategy == "per-direction") return per_direction_grid(K, directions, l);
        throw validation_error("--strategy must be global or per-direction");
    }();

    std::ostringstream canon;
    canon << "ect k=" << k << " l=" << l << " strategy=" << strategy << " lambda="
          << (has_lambda ? detail::format_double(lambda) : std::string("none"))
          << " seed=" << seed << " normalize=" << normalize;
    const std::string digest = config_digest(canon.str());

    if (has_lambda) {
        const SmoothEctMatrix m = soft_ect(K, directions, grid, lambda);
        write_ect_archive(make_archive(m, seed, digest), output);
        if (!csv.empty()) write_matrix_csv(m, csv);
        if (!pgm.empty()) write_matrix_pgm(m.values, pgm);
    } else {
        const EctMatrix m = ect(K, directions, grid);
        write_ect_archive(make_archive(m, seed, digest), output);
        if (!csv.empty()) write_matrix_csv(m, csv);
        if (!pgm.empty()) write_matrix_pgm(m.values.cast<double>(), pgm);
    }
}

void run_learn_directions(const LearnFlags& flags) {
    const GeometricSimplicialComplex K = load_complex(flags.input, flags.normalize);
    if (K.ambient_dimension() != 2) {
        throw validation_error("learn-directions needs 2-dimensional input data");
    }

    const Rng base(flags.seed);
    const DirectionSet target_directions =
        sample_directions_uniform(flags.k, 2, base.fork(1).seed());
    const ThresholdGrid grid = ThresholdGrid::global_uniform(flags.l);
    const SmoothEctMatrix target = soft_ect(K, target_directions, grid, flags.lambda);

    OptimizeConfig config;
    config.steps = flags.steps;
    config.learning_rate = flags.lr;
    config.seed = base.fork(2).seed();
    config.lambda = flags.lambda;
    config.direction_count = flags.k;
    config.threshold_count = flags.l;
    config.log_every = flags.log_every;

    const OptimizeTrace trace = learn_directions(target, K, config);
    std::cerr << "learn-directions: initial loss " << trace.initial_loss << ", final loss "
              << trace.final_loss << " (" << trace.wall_seconds << " s)\n";

    std::ostringstream canon;
    canon << "learn-directions k=" << flags.k << " l=" << flags.l << " lambda=" << flags.lambda
          << " steps=" << flags.steps << " lr=" << flags.lr << " seed=" << flags.seed
          << " log_every=" << flags.log_every << " normalize=" << flags.normalize;
    const std::string digest = config_digest(canon.str());

    atomic_write_file(flags.out_prefix + ".trace.txt", trace_text(trace, flags.steps));
    {
        std::ostringstream out;
        for (double angle : trace.final_angles) out << detail::format_double(angle) << '\n';
        atomic_write_file(flags.out_prefix + ".angles.txt", out.str());
    }
    const SmoothEctMatrix learned =
        soft_ect(K, DirectionSet::from_angles(trace.final_angles), grid, flags.lambda);
    write_ect_archive(make_archive(learned, flags.seed, digest), flags.out_prefix + ".ect");
    write_ect_archive(make_archive(target, flags.seed, digest), flags.out_prefix + ".target.ect");
}

void run_learn_coordinates(const LearnFlags& flags, const std::string& init_path,
                           double noise_sigma) {
    const Matrix target_points = [&] {
        Matrix p = read_point_cloud_text(flags.input);
        return flags.normalize ? normalize_points_to_unit_ball(p).first : p;
    }();
    if (target_points.cols() != 2) {
        throw validation_error("learn-coordinates needs 2-dimensional input data");
    }
    const int n = static_cast<int>(target_points.rows());

    const Rng base(flags.seed);
    const DirectionSet directions = sample_directions_uniform(flags.k, 2, base.fork(1).seed());
    const ThresholdGrid grid = ThresholdGrid::global_uniform(flags.l);
    const auto target_cloud = GeometricSimplicialComplex::from_point_cloud(target_points);
    const SmoothEctMatrix target = soft_ect(target_cloud, directions, grid, flags.lambda);

    Matrix initial = [&] {
        if (init_path.empty()) {
            return generate_noisy_circle(n, base.fork(2).seed(), noise_sigma);
        }
        Matrix p = read_point_cloud_text(init_path);
        return flags.normalize ? normalize_points_to_unit_ball(p).first : p;
    }();
    if (initial.rows() != n) {
        throw validation_error("initial cloud has " + std::to_string(initial.rows()) +
                               " points but the target has " + std::to_string(n));
    }

    OptimizeConfig config;
    config.steps = flags.steps;
    config.learning_rate = flags.lr;
    config.seed = flags.seed;
    config.lambda = flags.lambda;
    config.direction_count = flags.k;
    config.threshold_count = flags.l;
    config.log_every = flags.log_every;

    const OptimizeTrace trace = learn_coordinates(target, std::move(initial), directions, config);
    std::cerr << "learn-coordinates: initial loss " << trace.initial_loss << ", final loss "
              << trace.final_loss << " (" << trace.wall_seconds << " s)\n";

    std::ostringstream canon;
    canon << "learn-coordinates k=" << flags.k << " l=" << flags.l << " lambda=" << flags.lambda
          << " steps=" << flags.steps << " lr=" << flags.lr << " seed=" << flags.seed
          << " noise=" << noise_sigma << " log_every=" << flags.log_every
          << " normalize=" << flags.normalize;
    const std::string digest = config_digest(canon.str());

    atomic_write_file(flags.out_prefix + ".trace.txt", trace_text(trace, flags.steps));
    write_point_cloud_text(trace.final_coordinates, flags.out_prefix + ".coords.txt");
    const auto learned_cloud = GeometricSimplicialComplex::from_point_cloud(trace.final_coordinates);
    const SmoothEctMatrix learned = soft_ect(learned_cloud, directions, grid, flags.lambda);
    write_ect_archive(make_archive(learned, flags.seed, digest), flags.out_prefix + ".ect");
    write_ect_archive(make_archive(target, flags.seed, digest), flags.out_prefix + ".target.ect");
}

void run_normalize(const std::string& input, const std::string& output) {
    if (has_off_extension(input)) {
        OffMesh mesh = read_off_mesh(input);
        auto [points, transform] = normalize_points_to_unit_ball(mesh.coordinates);
        std::cerr << "center " << transform.center.transpose() << ", scale " << transform.scale
                  << (transform.degenerate ? " (degenerate)" : "") << '\n';
        write_off_mesh(points, mesh.triangles, output);
        return;
    }
    Matrix points = read_point_cloud_text(input);
    auto [normalized, transform] = normalize_points_to_unit_ball(points);
    std::cerr << "center " << transform.center.transpose() << ", scale " << transform.scale
              << (transform.degenerate ? " (degenerate)" : "") << '\n';
    write_point_cloud_text(normalized, output);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Euler Characteristic Transforms of meshes and point clouds"};
    app.require_subcommand(1);

    // chi
    std::string chi_input;
    auto* chi_cmd = app.add_subcommand("chi", "Euler characteristic of a mesh or point cloud");
    chi_cmd->add_option("input", chi_input, "OFF mesh or point-cloud text file")->required();

    // ecc
    std::string ecc_input, ecc_direction, ecc_output;
    double ecc_angle = 0.0;
    int ecc_l = 64;
    bool ecc_normalize = false;
    auto* ecc_cmd = app.add_subcommand("ecc", "Euler Characteristic Curve for one direction");
    ecc_cmd->add_option("input", ecc_input)->required();
    ecc_cmd->add_option("--direction", ecc_direction, "comma-separated unit direction, e.g. 0,0,1");
    auto* angle_opt = ecc_cmd->add_option("--angle", ecc_angle, "direction angle (2D inputs)");
    ecc_cmd->add_option("--l", ecc_l, "number of thresholds over [-1,1]")->check(CLI::Range(2, 1 << 20));
    ecc_cmd->add_flag("--normalize", ecc_normalize, "scale input into the unit ball first");
    ecc_cmd->add_option("--output", ecc_output, "write curve to a file instead of stdout");

    // ect
    std::string ect_input, ect_strategy = "global", ect_output = "out.ect", ect_csv, ect_pgm;
    int ect_k = 64, ect_l = 64;
    double ect_lambda = 0.0;
    std::uint64_t ect_seed = 42;
    bool ect_normalize = false;
    auto* ect_cmd = app.add_subcommand("ect", "Euler Characteristic Transform matrix");
    ect_cmd->add_option("input", ect_input)->required();
    ect_cmd->add_option("--k", ect_k, "number of sampled directions")->check(CLI::PositiveNumber);
    ect_cmd->add_option("--l", ect_l, "number of thresholds")->check(CLI::Range(2, 1 << 20));
    ect_cmd->add_option("--strategy", ect_strategy, "global or per-direction")
        ->check(CLI::IsMember({"global", "per-direction"}));
    auto* lambda_opt =
        ect_cmd->add_option("--lambda", ect_lambda, "sigmoid scale; smooth transform if given");
    ect_cmd->add_option("--seed", ect_seed, "direction sampling seed");
    ect_cmd->add_flag("--normalize", ect_normalize, "scale input into the unit ball first");
    ect_cmd->add_option("--output", ect_output, "archive path");
    ect_cmd->add_option("--csv", ect_csv, "also export the matrix as CSV");
    ect_cmd->add_option("--pgm", ect_pgm, "also export the matrix as a 16-bit PGM heatmap");

    // learn-directions
    LearnFlags ld;
    ld.lambda = 5.0;
    ld.out_prefix = "learn_directions";
    auto* ld_cmd = app.add_subcommand("learn-directions",
                                      "learn direction angles matching a target transform");
    ld_cmd->add_option("input", ld.input)->required();
    ld_cmd->add_option("--k", ld.k)->check(CLI::PositiveNumber);
    ld_cmd->add_option("--l", ld.l)->check(CLI::Range(2, 1 << 20));
    ld_cmd->add_option("--lambda", ld.lambda)->check(CLI::PositiveNumber);
    ld_cmd->add_option("--steps", ld.steps)->check(CLI::PositiveNumber);
    ld_cmd->add_option("--lr", ld.lr)->check(CLI::PositiveNumber);
    ld_cmd->add_option("--seed", ld.seed);
    ld_cmd->add_option("--log-every", ld.log_every)->check(CLI::PositiveNumber);
    ld_cmd->add_flag("--normalize", ld.normalize);
    ld_cmd->add_option("--out-prefix", ld.out_prefix);

    // learn-coordinates
    LearnFlags lc;
    lc.k = 256;
    lc.l = 256;
    lc.steps = 500;
    lc.lr = 0.01;
    lc.out_prefix = "learn_coordinates";
    std::string lc_init;
    double lc_noise = 0.1;
    auto* lc_cmd = app.add_subcommand("learn-coordinates",
                                      "learn point coordinates matching a target transform");
    lc_cmd->add_option("target", lc.input, "target point-cloud text file")->required();
    lc_cmd->add_option("--init", lc_init, "initial cloud (default: seeded noisy circle)");
    lc_cmd->add_option("--k", lc.k)->check(CLI::PositiveNumber);
    lc_cmd->add_option("--l", lc.l)->check(CLI::Range(2, 1 << 20));
    lc_cmd->add_option("--lambda", lc.lambda)->check(CLI::PositiveNumber);
    lc_cmd->add_option("--steps", lc.steps)->check(CLI::PositiveNumber);
    lc_cmd->add_option("--lr", lc.lr)->check(CLI::PositiveNumber);
    lc_cmd->add_option("--seed", lc.seed);
    lc_cmd->add_option("--noise", lc_noise, "noisy-circle radial sigma")->check(CLI::NonNegativeNumber);
    lc_cmd->add_option("--log-every", lc.log_every)->check(CLI::PositiveNumber);
    lc_cmd->add_flag("--normalize", lc.normalize);
    lc_cmd->add_option("--out-prefix", lc.out_prefix);

    // normalize
    std::string norm_input, norm_output;
    auto* norm_cmd = app.add_subcommand("normalize", "center and scale data into the unit ball");
    norm_cmd->add_option("input", norm_input)->required();
    norm_cmd->add_option("--output", norm_output)->required();

    // gen
    auto* gen_cmd = app.add_subcommand("gen", "generate synthetic point clouds");
    gen_cmd->require_subcommand(1);
    int gen_n = 100;
    std::uint64_t gen_seed = 42;
    double gen_noise = 0.1;
    std::string gen_output;
    auto* annulus_cmd = gen_cmd->add_subcommand("double-annulus", "two side-by-side rings");
    annulus_cmd->add_option("--n", gen_n)->check(CLI::PositiveNumber);
    annulus_cmd->add_option("--seed", gen_seed);
    annulus_cmd->add_option("--output", gen_output)->required();
    auto* circle_cmd = gen_cmd->add_subcommand("noisy-circle", "unit circle with radial noise");
    circle_cmd->add_option("--n", gen_n)->check(CLI::PositiveNumber);
    circle_cmd->add_option("--seed", gen_seed);
    circle_cmd->add_option("--noise", gen_noise)->check(CLI::NonNegativeNumber);
    circle_cmd->add_option("--output", gen_output)->required();

    try {
        app.parse(argc, argv);

        if (*chi_cmd) {
            run_chi(chi_input);
        } else if (*ecc_cmd) {
            run_ecc(ecc_input, ecc_direction, ecc_angle, angle_opt->count() > 0, ecc_l,
                    ecc_normalize, ecc_output);
        } else if (*ect_cmd) {
            run_ect(ect_input, ect_k, ect_l, ect_strategy, ect_lambda, lambda_opt->count() > 0,
                    ect_seed, ect_normalize, ect_output, ect_csv, ect_pgm);
        } else if (*ld_cmd) {
            run_learn_directions(ld);
        } else if (*lc_cmd) {
            run_learn_coordinates(lc, lc_init, lc_noise);
        } else if (*norm_cmd) {
            run_normalize(norm_input, norm_output);
        } else if (*gen_cmd) {
            if (*annulus_cmd) {
                write_point_cloud_text(generate_double_annulus(gen_n, gen_seed), gen_output);
            } else {
                write_point_cloud_text(generate_noisy_circle(gen_n, gen_seed, gen_noise), gen_output);
            }
        }
        return 0;
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    } catch (const divergence_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const io_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const validation_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
