#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace tcmv {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of an operation (t < 0, gamma <= 0, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

/// Malformed or inconsistent market / correlation / objective input.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Correlation matrix with |rho_ij| > 1, or not positive semidefinite.
class InvalidCorrelationError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

/// An asset with zero volatility where a price of risk is required.
class DegenerateAssetError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

/// How a two-stock market fails the distinct-volatility requirement.
enum class Degeneracy {
    None,
    /// Equal volatility rows and equal drifts: every allocation is admissible.
    IdenticalAssets,
    /// Equal volatility rows with different drifts: no equilibrium control exists.
    NoEquilibrium,
};

const char* describe(Degeneracy d) noexcept;

/// Volatility rows of the two stocks coincide; carries the classification.
class DegenerateVolatilityError : public ValidationError {
public:
    DegenerateVolatilityError(Degeneracy kind, const std::string& what)
        : ValidationError(what), kind_(kind) {}

    Degeneracy kind() const noexcept { return kind_; }

private:
    Degeneracy kind_;
};

/// sigma * sigma^T is numerically singular in the risk-free model.
class SingularCovarianceError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

/// A fixed-point iteration hit its cap before reaching the tolerance.
class NonConvergenceError : public Error {
public:
    NonConvergenceError(const std::string& what, std::size_t iterations, double last_delta)
        : Error(what), iterations_(iterations), last_delta_(last_delta) {}

    std::size_t iterations() const noexcept { return iterations_; }
    double last_delta() const noexcept { return last_delta_; }

private:
    std::size_t iterations_;
    double last_delta_;
};

/// Too many Monte Carlo paths produced non-finite wealth.
class SimulationExplosionError : public Error {
public:
    SimulationExplosionError(const std::string& what, std::size_t exploded)
        : Error(what), exploded_(exploded) {}

    std::size_t exploded_paths() const noexcept { return exploded_; }

private:
    std::size_t exploded_;
};

/// Scenario file problem; line is 0 when not attributable to a single line.
class ConfigError : public Error {
public:
    ConfigError(const std::string& what, std::size_t line = 0)
        : Error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

}  // namespace tcmv
