#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace tcmv {

/// Uniform mesh 0 = t_0 < t_1 < ... < t_N = T.
class TimeGrid {
public:
    /// Default resolution used when a caller does not pick one.
    static constexpr double kStepsPerYear = 1000.0;

    /// Throws DomainError unless horizon > 0 and n_steps >= 2.
    TimeGrid(double horizon, std::size_t n_steps);

    /// Grid with kStepsPerYear steps per unit of horizon (at least 2).
    static TimeGrid with_default_resolution(double horizon);

    double horizon() const noexcept { return horizon_; }
    std::size_t n_steps() const noexcept { return n_steps_; }
    std::size_t size() const noexcept { return n_steps_ + 1; }
    double step() const noexcept { return horizon_ / static_cast<double>(n_steps_); }

    /// t_i, with t_N == T exactly.
    double node(std::size_t i) const noexcept;
    std::vector<double> nodes() const;

    /// Index i of the cell [t_i, t_{i+1}] containing t and the local weight
    /// (t - t_i) / h. Throws DomainError for t outside [0, T].
    std::pair<std::size_t, double> locate(double t) const;

    bool operator==(const TimeGrid&) const = default;

private:
    double horizon_;
    std::size_t n_steps_;
};

/// Values of a function at every node of a grid.
class SampledFunction {
public:
    SampledFunction(TimeGrid grid, std::vector<double> values);
    SampledFunction(TimeGrid grid, double constant);

    const TimeGrid& grid() const noexcept { return grid_; }
    std::span<const double> values() const noexcept { return values_; }
    std::vector<double>& mutable_values() noexcept { return values_; }
    std::size_t size() const noexcept { return values_.size(); }

    double operator[](std::size_t i) const noexcept { return values_[i]; }
    /// Piecewise-linear interpolation; throws DomainError outside [0, T].
    double operator()(double t) const;

    double front() const noexcept { return values_.front(); }
    double back() const noexcept { return values_.back(); }

private:
    TimeGrid grid_;
    std::vector<double> values_;
};

/// max_i |a_i - b_i|; inputs must have equal length.
double sup_distance(std::span<const double> a, std::span<const double> b);

/// out[i] = integral from t_i to T of f, composite trapezoid, out[N] = 0.
/// O(N) backward accumulation.
std::vector<double> tail_integrals(const TimeGrid& grid, std::span<const double> f);

/// out[i] = integral from 0 to t_i of f, composite trapezoid, out[0] = 0.
std::vector<double> head_integrals(const TimeGrid& grid, std::span<const double> f);

/// Integral from t_{t_index} to T of f by the composite trapezoid rule.
double trapezoid_tail_integral(const SampledFunction& f, std::size_t t_index);

}  // namespace tcmv
