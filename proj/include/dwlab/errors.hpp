#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace dwlab {

/// Base for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid ensemble / fluctuation parameters.
class ParameterError : public Error {
public:
    using Error::Error;
};

/// Argument outside the domain of an operation (e.g. z on the real axis).
class DomainError : public Error {
public:
    using Error::Error;
};

/// Non-finite or malformed numerical input.
class InputError : public Error {
public:
    using Error::Error;
};

/// Iterative solver failed to converge or hit a singularity.
class SolverError : public Error {
public:
    SolverError(const std::string& what, double residual)
        : Error(what), residual_(residual) {}
    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

/// Formula evaluated too close to a pole of one of its denominators.
class SingularityError : public Error {
public:
    using Error::Error;
};

/// Truncation threshold removes all of the mass of an entry law.
class DegenerateTruncationError : public Error {
public:
    using Error::Error;
};

/// Numerical extrapolation / fit did not reach the requested accuracy.
class AccuracyError : public Error {
public:
    using Error::Error;
};

/// Malformed or inconsistent run configuration.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// A Monte Carlo sample could not be processed; the run aborts.
class SampleError : public Error {
public:
    SampleError(const std::string& what, std::size_t index)
        : Error(what), index_(index) {}
    std::size_t index() const noexcept { return index_; }

private:
    std::size_t index_;
};

}  // namespace dwlab
