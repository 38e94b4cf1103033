#pragma once

#include <stdexcept>
#include <string>

namespace ectkit {

/// Broken invariants, malformed arguments, or shape mismatches.
class validation_error : public std::runtime_error {
public:
    explicit validation_error(const std::string& what) : std::runtime_error(what) {}
};

/// Filesystem or parsing failure, annotated with path (and line) context.
class io_error : public std::runtime_error {
public:
    explicit io_error(const std::string& what) : std::runtime_error(what) {}
};

/// An optimization run aborted because the loss became non-finite or exploded.
class divergence_error : public std::runtime_error {
public:
    divergence_error(const std::string& what, int step, double loss)
        : std::runtime_error(what), step(step), loss(loss) {}

    int step;
    double loss;
};

}  // namespace ectkit
