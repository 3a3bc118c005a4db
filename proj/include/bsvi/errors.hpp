#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace bsvi {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An iterative sub-solver (fixed point, numeric resolvent) ran out of budget.
class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& what, double last_residual, int iterations)
        : Error(what), last_residual_(last_residual), iterations_(iterations) {}

    double last_residual() const noexcept { return last_residual_; }
    int iterations() const noexcept { return iterations_; }

private:
    double last_residual_;
    int iterations_;
};

/// A simulated state became NaN or infinite.
class SimulationError : public Error {
public:
    SimulationError(const std::string& what, std::size_t path, std::size_t step)
        : Error(what + " (path " + std::to_string(path) + ", step " + std::to_string(step) + ")"),
          path_(path), step_(step) {}

    std::size_t path() const noexcept { return path_; }
    std::size_t step() const noexcept { return step_; }

private:
    std::size_t path_;
    std::size_t step_;
};

/// Regression or grouping estimator could not be fitted.
class EstimatorError : public Error {
public:
    EstimatorError(const std::string& what, double condition_estimate)
        : Error(what), condition_estimate_(condition_estimate) {}

    double condition_estimate() const noexcept { return condition_estimate_; }

private:
    double condition_estimate_;
};

/// Failure inside the backward recursion, tagged with the time step.
class BackwardError : public Error {
public:
    BackwardError(const std::string& what, std::size_t step)
        : Error("step " + std::to_string(step) + ": " + what), step_(step) {}

    std::size_t step() const noexcept { return step_; }

private:
    std::size_t step_;
};

/// Malformed configuration file or command-line input.
class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace bsvi
