#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "tcmv/gain_equation.hpp"
#include "tcmv/model2.hpp"
#include "test_support.hpp"

using namespace tcmv;
using tcmv::testing::Gen;

namespace {

double sup_abs(std::span<const double> v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

/// max_i |a(t_i) - b(t_i)| for grids of n and 2n steps sharing every node of a.
double coarse_fine_gap(const SampledFunction& a, const SampledFunction& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[2 * i]));
    return m;
}

}  // namespace

TEST(Model2, RiskFreeSecondStockGivesZeroGain) {
    const MarketParams p = MarketParams::two_asset(0.2, 0.04, 0.3, 0.0, 0.0, 0.0, 0.04);
    const auto s = solve_k_model2(p, TimeGrid(1.0, 1000));
    EXPECT_LT(sup_abs(s.k.values()), 1e-10);
}

TEST(Model2, SymmetricCaseGivesHalf) {
    const MarketParams p = MarketParams::two_asset(0.12, 0.12, 0.25, 0.0, 0.0, 0.25);
    const auto s = solve_k_model2(p, TimeGrid(1.0, 1000));
    for (double v : s.k.values()) EXPECT_NEAR(v, 0.5, 1e-10);
    const auto [u1, u2] = model2_control(s.k, 0.3, 2.0);
    EXPECT_NEAR(u1, 1.0, 1e-10);
    EXPECT_NEAR(u2, 1.0, 1e-10);
}

TEST(Model2, ReferenceGain) {
    const MarketParams p = tcmv::testing::reference_market();
    const TimeGrid grid(1.0, 10000);
    const auto s = solve_k_model2(p, grid);
    EXPECT_DOUBLE_EQ(s.k.back(), 0.5);
    // independent oracle: the gain equation closed into an ODE and integrated by RK4
    const auto oracle = tcmv::testing::gain_ode_oracle(TwoAssetMarket(p), 1.0, 100000);
    EXPECT_NEAR(s.k.front(), oracle.front(), 1e-9);
    EXPECT_NEAR(s.k.front(), 0.480299164228, 1e-9);
    for (std::size_t i = 0; i < grid.size(); i += 100) EXPECT_NEAR(s.k[i], oracle[10 * i], 1e-9);
}

TEST(Model2, LongHorizonAgainstOracle) {
    const MarketParams p = tcmv::testing::reference_market();
    const auto s = solve_k_model2(p, TimeGrid(3.0, 30000));
    const auto oracle = tcmv::testing::gain_ode_oracle(TwoAssetMarket(p), 3.0, 300000);
    EXPECT_NEAR(s.k.front(), oracle.front(), 1e-9);
    EXPECT_NEAR(s.k.front(), 0.442480838692, 1e-9);
}

TEST(Model2, ResidualAndShape) {
    const MarketParams p = tcmv::testing::reference_market();
    const TimeGrid grid(1.0, 1000);
    PicardConfig cfg;
    const auto s = solve_k_model2(p, grid, cfg);
    EXPECT_LE(gain_residual(TwoAssetMarket(p), grid, s.k.values()), 10 * cfg.tol);
    for (std::size_t i = 0; i + 1 < s.k.size(); ++i) EXPECT_LT(s.k[i], 0.5);
    for (std::size_t i = 0; i + 1 < s.k.size(); ++i) EXPECT_LE(s.k[i], s.k[i + 1]);
}

TEST(Model2, EvaluationBoundaryAndExamples) {
    const MarketParams p = MarketParams::two_asset(0.2, 0.12, 0.3, 0.0, 0.0, 0.0);
    const TimeGrid grid(1.0, 1000);
    const auto e = evaluate_model2(p, SampledFunction(grid, 0.0), 2.0);
    EXPECT_NEAR(e.expected_wealth(0.0, 1.0), std::exp(0.12), 1e-12);
    EXPECT_NEAR(e.expected_wealth(0.0, 1.0), 1.12750, 5e-6);
    EXPECT_EQ(e.variance(0.0, 1.0), 0.0);
    EXPECT_EQ(e.a().back(), 1.0);
    EXPECT_EQ(e.A().back(), 0.0);
    EXPECT_EQ(e.expected_wealth(1.0, 3.0), 3.0);
    EXPECT_EQ(e.variance(1.0, 3.0), 0.0);

    const MarketParams sym = MarketParams::two_asset(0.12, 0.12, 0.25, 0.0, 0.0, 0.25);
    const auto h = evaluate_model2(sym, SampledFunction(grid, 0.5), 3.0);
    EXPECT_NEAR(h.expected_wealth(0.0, 1.0), std::exp(0.12), 1e-12);
    EXPECT_NEAR(h.variance(0.0, 1.0), std::exp(0.24) * std::expm1(0.03125), 1e-12);
    EXPECT_NEAR(h.variance(0.0, 1.0), 0.04035, 5e-6);
    EXPECT_NEAR(h.value(0.0, 1.0), -1.5 * h.variance(0.0, 1.0), 1e-15);
}

TEST(Model2, ReferenceMoments) {
    const MarketParams p = tcmv::testing::reference_market();
    const TimeGrid grid(1.0, 10000);
    const auto s = solve_k_model2(p, grid);
    const auto e = evaluate_model2(p, s.k, 1.0);
    // frozen after agreeing with the RK4 gain oracle on a 10x finer grid to 12 digits
    EXPECT_NEAR(e.expected_wealth_at(0, 1.0), 1.17258189377, 1e-9);
    EXPECT_NEAR(e.variance_at(0, 1.0), 0.043668655655, 1e-9);
}

TEST(Model2, GammaDoesNotEnterTheGain) {
    const MarketParams p = tcmv::testing::reference_market();
    const TimeGrid grid(2.0, 500);
    const auto s = solve_k_model2(p, grid);
    const auto e1 = evaluate_model2(p, s.k, 1.0);
    const auto e7 = evaluate_model2(p, s.k, 7.0);
    for (std::size_t i = 0; i < grid.size(); i += 50) {
        EXPECT_DOUBLE_EQ(e1.variance_at(i, 1.0), e7.variance_at(i, 1.0));
        EXPECT_NEAR(e7.A()[i], 7.0 * e1.A()[i], 1e-15);
    }
}

TEST(Model2, SecondOrderGridConvergence) {
    const MarketParams p = tcmv::testing::reference_market();
    const auto k1 = solve_k_model2(p, TimeGrid(3.0, 100)).k;
    const auto k2 = solve_k_model2(p, TimeGrid(3.0, 200)).k;
    const auto k3 = solve_k_model2(p, TimeGrid(3.0, 400)).k;
    const double ratio = coarse_fine_gap(k1, k2) / coarse_fine_gap(k2, k3);
    EXPECT_NEAR(ratio, 4.0, 0.3);
}

TEST(Model2, RejectsDegenerateVolatility) {
    const MarketParams p = MarketParams::two_asset(0.2, 0.12, 0.25, 0.0, 0.25, 0.0);
    EXPECT_THROW(solve_k_model2(p, TimeGrid(1.0, 10)), DegenerateVolatilityError);
}

TEST(Model2Property, RandomMarkets) {
    Gen gen(31);
    for (int trial = 0; trial < 100; ++trial) {
        const MarketParams p = gen.two_asset();
        const TwoAssetMarket m(p);
        const TimeGrid grid(gen.uniform(0.2, 3.0), 400);
        PicardConfig cfg;
        cfg.keep_history = true;
        const auto s = solve_k_model2(p, grid, cfg);
        EXPECT_LE(gain_residual(m, grid, s.k.values()), 10 * cfg.tol);
        const double lo = m.gain_lower_bound() - 1e-12, hi = m.gain_upper_bound() + 1e-12;
        for (std::size_t n = 1; n < s.history.size(); ++n)
            for (double v : s.history[n]) {
                EXPECT_GE(v, lo);
                EXPECT_LE(v, hi);
            }
        const auto e = evaluate_model2(p, s.k, gen.uniform(0.5, 5.0));
        for (std::size_t i = 0; i < grid.size(); i += 20) {
            EXPECT_LE(e.A()[i], 0.0);
            EXPECT_GE(e.variance_at(i, 1.5), 0.0);
        }
        // drift ordering fixes the direction of monotonicity
        for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
            if (m.drift_gap() > 0) {
                EXPECT_LE(s.k[i], s.k[i + 1] + 1e-14);
            }
            if (m.drift_gap() < 0) {
                EXPECT_GE(s.k[i], s.k[i + 1] - 1e-14);
            }
        }
    }
}
