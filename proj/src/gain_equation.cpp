#include "tcmv/gain_equation.hpp"

#include <algorithm>
#include <cmath>

namespace tcmv {

std::vector<double> gain_map(const TwoAssetMarket& market, const TimeGrid& grid,
                             std::span<const double> k) {
    std::vector<double> exposure(k.size());
    for (std::size_t i = 0; i < k.size(); ++i) exposure[i] = market.exposure(k[i]);
    const std::vector<double> tail = tail_integrals(grid, exposure);

    const double lambda = market.lambda();
    const double base = -market.cross() / market.spread();
    std::vector<double> out(k.size());
    for (std::size_t i = 0; i < k.size(); ++i) out[i] = lambda * std::expm1(-tail[i]) + base;
    return out;
}

double gain_residual(const TwoAssetMarket& market, const TimeGrid& grid, std::span<const double> k) {
    return sup_distance(gain_map(market, grid, k), k);
}

PicardResult solve_gain(const TwoAssetMarket& market, const TimeGrid& grid, const PicardConfig& cfg,
                        const std::string& label) {
    return picard_solve(
        grid, [&](std::span<const double> k) { return gain_map(market, grid, k); }, cfg, label);
}

double gain_lipschitz(const TwoAssetMarket& market, double initial_value) {
    // exposure(k) - exposure(l) = (k - l) (2 cross + (k + l) spread) and
    // |e^{-a} - e^{-b}| <= |a - b| for a, b >= 0.
    const double lo = std::min(initial_value, market.gain_lower_bound());
    const double hi = std::max(initial_value, market.gain_upper_bound());
    const double slope = std::max(std::abs(market.cross() + lo * market.spread()),
                                  std::abs(market.cross() + hi * market.spread()));
    return std::abs(market.lambda()) * 2.0 * slope;
}

double iteration_bound_constant(double lipschitz, const TimeGrid& grid,
                                std::span<const double> k0, std::span<const double> k1) {
    std::vector<double> diff(k0.size());
    for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = std::abs(k1[i] - k0[i]);
    const double omega1 = tail_integrals(grid, diff).front();
    const double first_step = *std::max_element(diff.begin(), diff.end());
    // |k^(0) - k*| <= |k^(1) - k^(0)| sum_j (L T)^j / j!
    const double start_error = first_step * std::exp(lipschitz * grid.horizon());
    const double K = 1.01 * std::max({lipschitz, omega1 * lipschitz, start_error});
    return K > 0.0 ? K : 1e-300;
}

}  // namespace tcmv
