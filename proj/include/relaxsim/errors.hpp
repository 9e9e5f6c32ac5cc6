#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace relaxsim {

// Invalid configuration, option, or argument shape. CLI exit code 2.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// A user-supplied coefficient returned a non-finite value at a quadrature point.
class EvaluationError : public std::runtime_error {
public:
    EvaluationError(const std::string& what, double point)
        : std::runtime_error(what), point_(point) {}

    // Evaluation point (first coordinate) at which the coefficient failed.
    double point() const noexcept { return point_; }

private:
    double point_;
};

// A simulated state left the finite range. CLI exit code 3.
class DivergenceError : public std::runtime_error {
public:
    DivergenceError(const std::string& what, std::size_t step)
        : std::runtime_error(what), step_(step) {}

    // First step index at which a non-finite state appeared.
    std::size_t step() const noexcept { return step_; }

private:
    std::size_t step_;
};

// Symmetric matrix has an eigenvalue below the negative tolerance.
class NotPsdError : public std::runtime_error {
public:
    NotPsdError(const std::string& what, double min_eigenvalue)
        : std::runtime_error(what), min_eigenvalue_(min_eigenvalue) {}

    double min_eigenvalue() const noexcept { return min_eigenvalue_; }

private:
    double min_eigenvalue_;
};

// File could not be opened or written. CLI exit code 4.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace relaxsim
