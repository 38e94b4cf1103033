#pragma once

#include "ectkit/complex.hpp"
#include "ectkit/ect_diff.hpp"
#include "ectkit/ect_exact.hpp"
#include "ectkit/errors.hpp"
#include "ectkit/sampling.hpp"

#include <chrono>
#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace ectkit {

/// Hyperparameters of one gradient-descent run. Plain full-batch descent
/// with a fixed learning rate; no momentum, no line search.
struct OptimizeConfig {
    int steps = 1000;
    double learning_rate = 0.1;
    std::uint64_t seed = 42;
    double lambda = 100.0;
    int direction_count = 32;  ///< k
    int threshold_count = 64;  ///< l
    int log_every = 1;

    void validate() const {
        if (steps < 1) throw validation_error("steps must be >= 1");
        if (!(learning_rate > 0.0)) throw validation_error("learning_rate must be positive");
        if (!(lambda > 0.0)) throw validation_error("lambda must be positive");
        if (direction_count < 1) throw validation_error("direction_count must be >= 1");
        if (threshold_count < 2) throw validation_error("threshold_count must be >= 2");
        if (log_every < 1) throw validation_error("log_every must be >= 1");
    }
};

/// Loss history and final parameters of a run. The loss is measured at the
/// start of each step (before the update) and logged every log_every steps,
/// so the trace always opens with the initial loss and has
/// ceil(steps / log_every) entries.
struct OptimizeTrace {
    std::vector<std::pair<int, double>> logged;  ///< (step, loss) records
    double initial_loss = 0.0;
    double final_loss = 0.0;                     ///< after the last update
    std::vector<double> final_angles;            ///< direction-learning runs
    Matrix final_coordinates;                    ///< coordinate-learning runs
    double wall_seconds = 0.0;
};

/// What the optimizer matches against: the dense matrix plus the threshold
/// grid it was sampled on. Build one from a smoothed or an exact transform.
struct TargetEct {
    Matrix values;
    ThresholdGrid thresholds;
};

inline TargetEct make_target(const SmoothEctMatrix& m) { return {m.values, m.thresholds}; }
inline TargetEct make_target(const EctMatrix& m) {
    return {m.values.cast<double>(), m.thresholds};
}

/// Mean squared error and its gradient: loss = mean((pred - target)^2),
/// grad = 2 (pred - target) / N with N the entry count.
inline std::pair<double, Matrix> mse_loss(const Matrix& pred, const Matrix& target) {
    if (pred.rows() != target.rows() || pred.cols() != target.cols()) {
        throw validation_error("mse_loss shapes differ: " + std::to_string(pred.rows()) + "x" +
                               std::to_string(pred.cols()) + " vs " + std::to_string(target.rows()) +
                               "x" + std::to_string(target.cols()));
    }
    const double n = static_cast<double>(pred.size());
    Matrix diff = pred - target;
    const double loss = diff.squaredNorm() / n;
    diff *= 2.0 / n;
    return {loss, std::move(diff)};
}

namespace detail {

inline void check_divergence(double loss, double initial_loss, int step) {
    if (!std::isfinite(loss)) {
        throw divergence_error("optimization diverged at step " + std::to_string(step) +
                                   ": loss is not finite",
                               step, loss);
    }
    if (initial_loss > 0.0 && loss > 1e6 * initial_loss) {
        throw divergence_error("optimization diverged at step " + std::to_string(step) +
                                   ": loss " + std::to_string(loss) + " exceeds 1e6 x initial",
                               step, loss);
    }
}

}  // namespace detail

/// Learns k direction angles whose smoothed ECT of K matches the target.
/// Angles start from Normal(0, 1) draws under config.seed; each step runs
/// forward -> MSE -> backward -> theta -= lr * grad. Requires d = 2 (the
/// angle parameterization). K and the target are never mutated.
inline OptimizeTrace learn_directions(const TargetEct& target,
                                      const GeometricSimplicialComplex& K,
                                      const OptimizeConfig& config) {
    config.validate();
    K.ensure_valid();
    if (K.ambient_dimension() != 2) {
        throw validation_error("learn_directions needs d = 2 (angle parameterization)");
    }
    if (target.values.rows() != target.thresholds.size()) {
        throw validation_error("target row count does not match its threshold grid");
    }
    if (target.values.cols() != config.direction_count) {
        throw validation_error("config.direction_count does not match target columns");
    }
    if (target.thresholds.size() != config.threshold_count) {
        throw validation_error("config.threshold_count does not match target grid");
    }
    target.thresholds.require_compatible(config.direction_count);

    const auto start = std::chrono::steady_clock::now();
    std::vector<double> angles = sample_angles_normal(config.direction_count, config.seed);

    OptimizeTrace trace;
    for (int step = 0; step < config.steps; ++step) {
        const DirectionSet directions = DirectionSet::from_angles(angles);
        const SmoothEctMatrix pred = soft_ect(K, directions, target.thresholds, config.lambda);
        auto [loss, upstream] = mse_loss(pred.values, target.values);
        if (step == 0) trace.initial_loss = loss;
        detail::check_divergence(loss, trace.initial_loss, step);
        if (step % config.log_every == 0) trace.logged.emplace_back(step, loss);

        const GradientBundle grads =
            soft_ect_backward(K, directions, target.thresholds, config.lambda, upstream);
        for (int j = 0; j < config.direction_count; ++j) {
            angles[j] -= config.learning_rate * grads.angle_gradients[j];
        }
    }

    const SmoothEctMatrix final_pred =
        soft_ect(K, DirectionSet::from_angles(angles), target.thresholds, config.lambda);
    trace.final_loss = mse_loss(final_pred.values, target.values).first;
    detail::check_divergence(trace.final_loss, trace.initial_loss, config.steps);
    trace.final_angles = std::move(angles);
    trace.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return trace;
}

/// Smooth-target overload; the learner must run at the target's lambda.
inline OptimizeTrace learn_directions(const SmoothEctMatrix& target,
                                      const GeometricSimplicialComplex& K,
                                      const OptimizeConfig& config) {
    if (target.lambda != config.lambda) {
        throw validation_error("config.lambda does not match the smooth target's lambda");
    }
    return learn_directions(make_target(target), K, config);
}

/// Learns point coordinates whose smoothed ECT under the fixed directions W
/// matches the target. The points form a 0-dimensional complex each step;
/// coordinates are not re-normalized during the run, so targets and initial
/// clouds are expected to be pre-normalized to the grid's range.
inline OptimizeTrace learn_coordinates(const TargetEct& target, Matrix initial_points,
                                       const DirectionSet& directions,
                                       const OptimizeConfig& config) {
    config.validate();
    if (initial_points.rows() < 1) {
        throw validation_error("learn_coordinates needs a nonempty initial cloud");
    }
    if (initial_points.cols() != directions.dimension()) {
        throw validation_error("initial cloud dimension does not match directions");
    }
    if (directions.count() != config.direction_count) {
        throw validation_error("config.direction_count does not match the direction set");
    }
    if (target.values.cols() != directions.count()) {
        throw validation_error("target column count does not match the direction set");
    }
    if (target.values.rows() != target.thresholds.size() ||
        target.thresholds.size() != config.threshold_count) {
        throw validation_error("target rows, grid, and config.threshold_count must agree");
    }
    target.thresholds.require_compatible(directions.count());

    const auto start = std::chrono::steady_clock::now();
    Matrix points = std::move(initial_points);

    OptimizeTrace trace;
    for (int step = 0; step < config.steps; ++step) {
        const auto cloud = GeometricSimplicialComplex::from_point_cloud(points);
        const SmoothEctMatrix pred = soft_ect(cloud, directions, target.thresholds, config.lambda);
        auto [loss, upstream] = mse_loss(pred.values, target.values);
        if (step == 0) trace.initial_loss = loss;
        detail::check_divergence(loss, trace.initial_loss, step);
        if (step % config.log_every == 0) trace.logged.emplace_back(step, loss);

        const GradientBundle grads =
            soft_ect_backward(cloud, directions, target.thresholds, config.lambda, upstream);
        points -= config.learning_rate * grads.coordinate_gradients;
    }

    const auto final_cloud = GeometricSimplicialComplex::from_point_cloud(points);
    const SmoothEctMatrix final_pred =
        soft_ect(final_cloud, directions, target.thresholds, config.lambda);
    trace.final_loss = mse_loss(final_pred.values, target.values).first;
    detail::check_divergence(trace.final_loss, trace.initial_loss, config.steps);
    trace.final_coordinates = std::move(points);
    trace.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return trace;
}

/// Smooth-target overload; checks lambda and that W matches the target's own
/// direction metadata.
inline OptimizeTrace learn_coordinates(const SmoothEctMatrix& target, Matrix initial_points,
                                       const DirectionSet& directions,
                                       const OptimizeConfig& config) {
    if (target.lambda != config.lambda) {
        throw validation_error("config.lambda does not match the smooth target's lambda");
    }
    if (target.directions.vectors() != directions.vectors()) {
        throw validation_error("direction set differs from the one the target was built with");
    }
    return learn_coordinates(make_target(target), std::move(initial_points), directions, config);
}

}  // namespace ectkit
