#include "tcmv/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "tcmv/error.hpp"

namespace tcmv {

TimeGrid::TimeGrid(double horizon, std::size_t n_steps) : horizon_(horizon), n_steps_(n_steps) {
    if (!(horizon > 0.0) || !std::isfinite(horizon))
        throw DomainError("time grid horizon must be positive and finite");
    if (n_steps < 2) throw DomainError("time grid needs at least 2 steps");
}

TimeGrid TimeGrid::with_default_resolution(double horizon) {
    const double steps = std::round(kStepsPerYear * horizon);
    return TimeGrid(horizon, static_cast<std::size_t>(std::max(2.0, steps)));
}

double TimeGrid::node(std::size_t i) const noexcept {
    if (i >= n_steps_) return horizon_;
    return horizon_ * static_cast<double>(i) / static_cast<double>(n_steps_);
}

std::vector<double> TimeGrid::nodes() const {
    std::vector<double> out(size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = node(i);
    return out;
}

std::pair<std::size_t, double> TimeGrid::locate(double t) const {
    constexpr double kSlack = 1e-12;
    if (!(t >= -kSlack * horizon_ && t <= horizon_ * (1.0 + kSlack)))
        throw DomainError("time outside [0, T]");
    const double pos = std::clamp(t / step(), 0.0, static_cast<double>(n_steps_));
    auto i = static_cast<std::size_t>(pos);
    if (i >= n_steps_) return {n_steps_ - 1, 1.0};
    return {i, pos - static_cast<double>(i)};
}

SampledFunction::SampledFunction(TimeGrid grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values)) {
    if (values_.size() != grid_.size())
        throw ValidationError("sampled function length must match the grid");
    for (double v : values_)
        if (!std::isfinite(v)) throw ValidationError("sampled function has non-finite values");
}

SampledFunction::SampledFunction(TimeGrid grid, double constant)
    : SampledFunction(grid, std::vector<double>(grid.size(), constant)) {}

double SampledFunction::operator()(double t) const {
    const auto [i, w] = grid_.locate(t);
    return (1.0 - w) * values_[i] + w * values_[i + 1];
}

double sup_distance(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw std::invalid_argument("sup_distance: length mismatch");
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

std::vector<double> tail_integrals(const TimeGrid& grid, std::span<const double> f) {
    if (f.size() != grid.size()) throw std::invalid_argument("tail_integrals: length mismatch");
    const double half_h = 0.5 * grid.step();
    std::vector<double> out(f.size(), 0.0);
    for (std::size_t i = f.size() - 1; i-- > 0;) out[i] = out[i + 1] + half_h * (f[i] + f[i + 1]);
    return out;
}

std::vector<double> head_integrals(const TimeGrid& grid, std::span<const double> f) {
    if (f.size() != grid.size()) throw std::invalid_argument("head_integrals: length mismatch");
    const double half_h = 0.5 * grid.step();
    std::vector<double> out(f.size(), 0.0);
    for (std::size_t i = 1; i < f.size(); ++i) out[i] = out[i - 1] + half_h * (f[i - 1] + f[i]);
    return out;
}

double trapezoid_tail_integral(const SampledFunction& f, std::size_t t_index) {
    if (t_index >= f.size()) throw DomainError("trapezoid_tail_integral: node out of range");
    const double half_h = 0.5 * f.grid().step();
    double sum = 0.0;
    for (std::size_t i = f.size() - 1; i > t_index; --i) sum += half_h * (f[i - 1] + f[i]);
    return sum;
}

}  // namespace tcmv
