#pragma once

#include <stdexcept>
#include <string>

namespace gmcb {

// Base class for everything thrown by the library.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Bad configuration (hyperparameters, sampler settings, dimensions requested).
struct ConfigError : Error {
    using Error::Error;
};

// Bad data (non-finite entries, conformability, parse-level problems).
struct DataError : Error {
    using Error::Error;
};

// A sampler failed while running (pathological state, iteration caps).
struct SamplerError : Error {
    using Error::Error;
};

// Numerical failure in a deterministic computation.
struct NumericError : Error {
    using Error::Error;
};

// Cholesky factorization hit a non-positive pivot.
struct NotPositiveDefiniteError : NumericError {
    NotPositiveDefiniteError(const std::string& msg, int pivot_index)
        : NumericError(msg + " (pivot " + std::to_string(pivot_index) + ")"),
          pivot(pivot_index) {}
    int pivot;
};

// Linear solve against a numerically singular system.
struct SingularSystemError : NumericError {
    using NumericError::NumericError;
};

// Adaptive quadrature could not reach the requested tolerance.
struct IntegrationError : NumericError {
    IntegrationError(const std::string& msg, double achieved)
        : NumericError(msg + " (achieved tolerance " + std::to_string(achieved) + ")"),
          achieved_tolerance(achieved) {}
    double achieved_tolerance;
};

}  // namespace gmcb
