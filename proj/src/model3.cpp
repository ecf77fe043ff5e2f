#include "tcmv/model3.hpp"

#include <algorithm>
#include <cmath>

#include "tcmv/gain_equation.hpp"

namespace tcmv {

KernelTables::KernelTables(const TwoAssetMarket& market, const SampledFunction& k1, double gamma)
    : grid_(k1.grid()),
      lambda_(market.lambda()),
      drift_gap_(market.drift_gap()),
      spread_(market.spread()),
      gamma_(gamma) {
    if (!(gamma > 0.0)) throw DomainError("risk aversion gamma must be positive");
    const std::size_t n = k1.size();
    std::vector<double> drift(n), exposure(n);
    excess_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        drift[i] = market.drift(k1[i]);
        exposure[i] = market.exposure(k1[i]);
        excess_[i] = market.excess(k1[i]);
    }
    drift_tail_ = tail_integrals(grid_, drift);
    exposure_tail_ = tail_integrals(grid_, exposure);

    h_.resize(n);
    for (std::size_t j = 0; j < n; ++j)
        h_[j] = std::exp(drift_tail_[j]) * (drift_gap_ - excess_[j] * std::exp(exposure_tail_[j]));

    // sup_{i <= j} w(i) |h(j)| with a running prefix maximum of w.
    double w_max = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        w_max = std::max(w_max, w(j));
        M3_ = std::max(M3_, w_max * std::abs(h_[j]));
    }
}

double KernelTables::I1(std::size_t i, std::size_t j) const noexcept {
    return std::exp(drift_tail_[j] - drift_tail_[i]);
}

double KernelTables::I2(std::size_t i, std::size_t j) const noexcept {
    return std::exp(exposure_tail_[j] - exposure_tail_[i]);
}

double KernelTables::I3(std::size_t i, std::size_t j) const noexcept {
    const std::size_t last = grid_.n_steps();
    return drift_gap_ * I2(i, last) - excess_[j] * I2(i, j);
}

double KernelTables::phi(std::size_t i) const noexcept {
    return lambda_ / gamma_ * std::exp(-drift_tail_[i] - exposure_tail_[i]);
}

double KernelTables::w(std::size_t i) const noexcept {
    return std::exp(-drift_tail_[i] - exposure_tail_[i]);
}

PicardResult solve_k1(const MarketParams& params, const TimeGrid& grid, const PicardConfig& cfg) {
    return solve_gain(TwoAssetMarket(params), grid, cfg, "model 3 gain k1");
}

KernelTables build_kernels(const MarketParams& params, const SampledFunction& k1, double gamma) {
    return KernelTables(TwoAssetMarket(params), k1, gamma);
}

std::vector<double> intercept_map(const KernelTables& kernels, std::span<const double> k2) {
    const auto h = kernels.h();
    std::vector<double> weighted(k2.size());
    for (std::size_t j = 0; j < k2.size(); ++j) weighted[j] = h[j] * k2[j];
    const std::vector<double> tail = tail_integrals(kernels.grid(), weighted);

    std::vector<double> out(k2.size());
    for (std::size_t i = 0; i < k2.size(); ++i)
        out[i] = kernels.phi(i) + kernels.lambda() * kernels.w(i) * tail[i];
    return out;
}

PicardResult solve_k2(const KernelTables& kernels, const PicardConfig& cfg) {
    return picard_solve(
        kernels.grid(), [&](std::span<const double> k2) { return intercept_map(kernels, k2); }, cfg,
        "model 3 intercept k2");
}

double intercept_bound_constant(const KernelTables& kernels, double initial_value) {
    const std::vector<double> k0(kernels.grid().size(), initial_value);
    const std::vector<double> k1 = intercept_map(kernels, k0);
    return iteration_bound_constant(std::abs(kernels.lambda()) * kernels.M3(), kernels.grid(), k0,
                                    k1);
}

MomentCoefficients::MomentCoefficients(TimeGrid grid, std::vector<double> c0, std::vector<double> c1,
                                       std::vector<double> c2, std::vector<double> growth,
                                       std::vector<double> mean_intercept, double gamma)
    : c0_(grid, std::move(c0)),
      c1_(grid, std::move(c1)),
      c2_(grid, std::move(c2)),
      growth_(grid, std::move(growth)),
      mean_intercept_(grid, std::move(mean_intercept)),
      gamma_(gamma) {}

double MomentCoefficients::mean_at(std::size_t i, double x) const {
    return growth_[i] * x + mean_intercept_[i];
}

double MomentCoefficients::variance_at(std::size_t i, double x) const {
    const double g = growth_[i];
    return g * g * ((c0_[i] * x + c1_[i]) * x + c2_[i]);
}

double MomentCoefficients::second_moment_at(std::size_t i, double x) const {
    const double m = mean_at(i, x);
    return variance_at(i, x) + m * m;
}

double MomentCoefficients::value_at(std::size_t i, double x) const {
    return mean_at(i, x) - 0.5 * gamma_ * variance_at(i, x);
}

double MomentCoefficients::mean(double t, double x) const {
    return growth_(t) * x + mean_intercept_(t);
}

double MomentCoefficients::variance(double t, double x) const {
    const double g = growth_(t);
    return g * g * ((c0_(t) * x + c1_(t)) * x + c2_(t));
}

double MomentCoefficients::value(double t, double x) const {
    return mean(t, x) - 0.5 * gamma_ * variance(t, x);
}

MomentCoefficients moments(const MarketParams& params, const SampledFunction& k1,
                           const SampledFunction& k2, double gamma) {
    if (!(k1.grid() == k2.grid())) throw ValidationError("k1 and k2 must share a grid");
    const TwoAssetMarket market(params);
    const KernelTables kern(market, k1, gamma);
    const TimeGrid& grid = k1.grid();
    const std::size_t n = k1.size();
    const auto drift_tail = kern.drift_tail();
    const auto exposure_tail = kern.exposure_tail();
    const auto h = kern.h();
    const double gap = market.drift_gap();

    // Integrands in v that make every t-dependence a prefactor.
    std::vector<double> e_k2(n), hk2(n), sq(n);
    for (std::size_t v = 0; v < n; ++v) {
        e_k2[v] = std::exp(drift_tail[v]) * k2[v];
        hk2[v] = h[v] * k2[v];
        sq[v] = std::exp(2.0 * drift_tail[v] + exposure_tail[v]) * k2[v] * k2[v];
    }
    // P(v) = int_0^v e^{D(w)} k2(w) dw, so int_t^v I1(t,w) k2(w) dw = e^{-D(t)} (P(v) - P(t)).
    const std::vector<double> P = head_integrals(grid, e_k2);
    std::vector<double> hk2P(n);
    for (std::size_t v = 0; v < n; ++v) hk2P[v] = hk2[v] * P[v];

    const std::vector<double> tail_e_k2 = tail_integrals(grid, e_k2);
    const std::vector<double> tail_hk2 = tail_integrals(grid, hk2);
    const std::vector<double> tail_sq = tail_integrals(grid, sq);
    const std::vector<double> tail_hk2P = tail_integrals(grid, hk2P);

    std::vector<double> c0(n), c1(n), c2(n), growth(n), intercept(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double d = drift_tail[i];
        const double b = exposure_tail[i];
        growth[i] = std::exp(d);
        intercept[i] = gap * tail_e_k2[i];
        c0[i] = std::expm1(b);
        // I2(t,T)^{-1} int L k2 = e^{B} w(t) tail = e^{-D} tail
        c1[i] = -2.0 * std::exp(-d) * tail_hk2[i];
        c2[i] = std::exp(-2.0 * d) *
                (market.spread() * tail_sq[i] - 2.0 * gap * (tail_hk2P[i] - P[i] * tail_hk2[i]));
    }
    return MomentCoefficients(grid, std::move(c0), std::move(c1), std::move(c2), std::move(growth),
                              std::move(intercept), gamma);
}

Model3Solution solve_model3(const MarketParams& params, double gamma, const TimeGrid& grid,
                            const PicardConfig& cfg) {
    if (!(gamma > 0.0)) throw DomainError("risk aversion gamma must be positive");
    const TwoAssetMarket market(params);
    PicardResult k1 = solve_gain(market, grid, cfg, "model 3 gain k1");
    KernelTables kern(market, k1.solution, gamma);
    PicardResult k2 = solve_k2(kern, cfg);
    MomentCoefficients mom = moments(params, k1.solution, k2.solution, gamma);

    const std::vector<double> start(grid.size(), cfg.initial_value);
    const double k1_K = iteration_bound_constant(gain_lipschitz(market, cfg.initial_value), grid,
                                                 start, gain_map(market, grid, start));
    const double k2_K = intercept_bound_constant(kern, cfg.initial_value);

    return Model3Solution{std::move(k1.solution),
                          std::move(k2.solution),
                          std::move(kern),
                          std::move(mom),
                          k1.iterations,
                          k1.final_delta,
                          k2.iterations,
                          k2.final_delta,
                          std::move(k1.history),
                          std::move(k2.history),
                          k1_K,
                          k2_K};
}

std::pair<double, double> control(const Model3Solution& solution, double t, double x) {
    const double u1 = solution.k1(t) * x + solution.k2(t);
    return {u1, x - u1};
}

}  // namespace tcmv
