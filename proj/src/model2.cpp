#include "tcmv/model2.hpp"

#include <cmath>

#include "tcmv/gain_equation.hpp"

namespace tcmv {

Model2Solution solve_k_model2(const MarketParams& params, const TimeGrid& grid,
                              const PicardConfig& cfg) {
    const TwoAssetMarket market(params);
    PicardResult r = solve_gain(market, grid, cfg, "model 2 gain k");
    return Model2Solution{std::move(r.solution), r.iterations, r.final_delta, std::move(r.history)};
}

Model2Evaluation::Model2Evaluation(SampledFunction a, SampledFunction A,
                                   SampledFunction exposure_tail, double gamma)
    : a_(std::move(a)), A_(std::move(A)), exposure_tail_(std::move(exposure_tail)), gamma_(gamma) {}

double Model2Evaluation::expected_wealth(double t, double x) const { return a_(t) * x; }

double Model2Evaluation::variance(double t, double x) const {
    const double a = a_(t);
    return a * a * std::expm1(exposure_tail_(t)) * x * x;
}

double Model2Evaluation::value(double t, double x) const { return -0.5 * gamma_ * variance(t, x); }

double Model2Evaluation::expected_wealth_at(std::size_t i, double x) const { return a_[i] * x; }

double Model2Evaluation::variance_at(std::size_t i, double x) const {
    return a_[i] * a_[i] * std::expm1(exposure_tail_[i]) * x * x;
}

Model2Evaluation evaluate_model2(const MarketParams& params, const SampledFunction& k, double gamma) {
    if (!(gamma > 0.0)) throw DomainError("risk aversion gamma must be positive");
    const TwoAssetMarket market(params);
    const TimeGrid& grid = k.grid();

    std::vector<double> drift(k.size()), exposure(k.size());
    for (std::size_t i = 0; i < k.size(); ++i) {
        drift[i] = market.drift(k[i]);
        exposure[i] = market.exposure(k[i]);
    }
    const std::vector<double> drift_tail = tail_integrals(grid, drift);
    std::vector<double> exposure_tail = tail_integrals(grid, exposure);

    std::vector<double> a(k.size()), A(k.size());
    for (std::size_t i = 0; i < k.size(); ++i) {
        a[i] = std::exp(drift_tail[i]);
        A[i] = -0.5 * gamma * a[i] * a[i] * std::expm1(exposure_tail[i]);
    }
    return Model2Evaluation(SampledFunction(grid, std::move(a)), SampledFunction(grid, std::move(A)),
                            SampledFunction(grid, std::move(exposure_tail)), gamma);
}

std::pair<double, double> model2_control(const SampledFunction& k, double t, double x) {
    const double u1 = k(t) * x;
    return {u1, x - u1};
}

}  // namespace tcmv
