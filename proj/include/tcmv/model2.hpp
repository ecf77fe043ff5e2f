#pragma once

#include <cstddef>
#include <vector>

#include "tcmv/market.hpp"
#include "tcmv/numerics.hpp"
#include "tcmv/picard.hpp"

namespace tcmv {

/// Variance-only objective without a bank account: u(t, x) = k(t) x dollars
/// in stock 1, the rest in stock 2.
struct Model2Solution {
    SampledFunction k;
    std::size_t iterations = 0;
    double final_delta = 0.0;
    std::vector<std::vector<double>> history;  ///< Picard iterates when requested
};

/// Solves the gain equation for k on the grid. Throws
/// DegenerateVolatilityError or NonConvergenceError.
Model2Solution solve_k_model2(const MarketParams& params, const TimeGrid& grid,
                              const PicardConfig& cfg = {});

/// Closed-form consequences of a gain k:
///   a(t) = exp(int_t^T drift(k)),  g(t, x) = a(t) x
///   A(t) = (gamma/2) a(t)^2 (1 - exp(int_t^T exposure(k))),  V(t, x) = A(t) x^2
class Model2Evaluation {
public:
    Model2Evaluation(SampledFunction a, SampledFunction A, SampledFunction exposure_tail, double gamma);

    const SampledFunction& a() const noexcept { return a_; }
    const SampledFunction& A() const noexcept { return A_; }
    double gamma() const noexcept { return gamma_; }

    double expected_wealth(double t, double x) const;
    double variance(double t, double x) const;
    double value(double t, double x) const;  ///< V = -(gamma/2) Var

    /// Node versions, exact on the grid.
    double expected_wealth_at(std::size_t i, double x) const;
    double variance_at(std::size_t i, double x) const;

private:
    SampledFunction a_, A_, exposure_tail_;
    double gamma_;
};

Model2Evaluation evaluate_model2(const MarketParams& params, const SampledFunction& k, double gamma);

/// u(t, x) for stock 1 and stock 2.
std::pair<double, double> model2_control(const SampledFunction& k, double t, double x);

}  // namespace tcmv
