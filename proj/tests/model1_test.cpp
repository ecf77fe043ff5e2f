#include <gtest/gtest.h>

#include <cmath>

#include "tcmv/model1.hpp"
#include "test_support.hpp"

using namespace tcmv;
using tcmv::testing::Gen;

TEST(Model1, ZeroExcessReturnHoldsNoStock) {
    const MarketParams p = MarketParams::two_asset(0.04, 0.04, 0.3, 0.0, 0.0, 0.2, 0.04);
    const auto s = solve_model1(p, {2.0, 1.0});
    EXPECT_LT(s.control(0.3).cwiseAbs().maxCoeff(), 1e-15);
    EXPECT_NEAR(s.value(0.25, 2.0), std::exp(0.04 * 0.75) * 2.0, 1e-15);
}

TEST(Model1, ComparisonValues) {
    const auto s = solve_model1(tcmv::testing::comparison_market(), {3.0, 1.0});
    const Vector uT = s.control(1.0);
    EXPECT_NEAR(uT[0], 0.16 / (3 * 0.09), 1e-14);
    EXPECT_NEAR(uT[0], 0.59259, 5e-6);
    EXPECT_NEAR(uT[1], 0.66667, 5e-6);
    const Vector u0 = s.control(0.0);
    EXPECT_NEAR(u0[0], 0.56936, 5e-6);
    EXPECT_NEAR(u0[1], 0.08 / (3 * 0.04) * std::exp(-0.04), 1e-14);
    EXPECT_NEAR(u0[1], 0.64052, 1e-5);
    EXPECT_NEAR(s.theta_sq(), 0.44444, 5e-6);
    EXPECT_NEAR(s.value(0.0, 1.0), std::exp(0.04) + 0.44444 / 6.0, 1e-5);
    EXPECT_NEAR(s.value(0.0, 1.0), 1.04081 + 0.07407, 2e-5);
    EXPECT_NEAR(s.expected_wealth(0.0, 1.0), 1.18896, 5e-6);
    EXPECT_NEAR(s.variance(0.0, 1.0), 0.04938, 5e-6);
    // total stock dollars exceed wealth: borrowing from the bank
    EXPECT_GT(u0.sum(), 1.0);
    EXPECT_THROW(s.control(1.5), DomainError);
}

TEST(Model1, FirstOrderConditionAndMeanEquation) {
    const MarketParams p = tcmv::testing::comparison_market();
    const ObjectiveSpec obj{3.0, 1.0};
    const auto s = solve_model1(p, obj);
    const Matrix cov = p.sigma * p.sigma.transpose();
    const Vector ex = p.alpha - Vector::Constant(2, p.r);
    for (double t : {0.0, 0.4, 0.9}) {
        // (alpha - r) V_x - gamma sigma sigma^T u g_x^2 = 0 with V_x = g_x = e^{r (T - t)}
        const double gx = std::exp(p.r * (obj.horizon - t));
        const Vector foc = ex * gx - obj.gamma * cov * s.control(t) * gx * gx;
        EXPECT_LT(foc.cwiseAbs().maxCoeff(), 1e-14);
        // g_t + (r x + (alpha - r)^T u) g_x = 0
        const double x = 1.7, h = 1e-6;
        const double gt = (s.expected_wealth(t + h, x) - s.expected_wealth(t, x)) / h;
        EXPECT_NEAR(gt + (p.r * x + ex.dot(s.control(t))) * gx, 0.0, 1e-6);
    }
}

TEST(Model1, DomainErrors) {
    EXPECT_THROW(solve_model1(tcmv::testing::comparison_market(), {0.0, 1.0}), DomainError);
    EXPECT_THROW(solve_model1(tcmv::testing::comparison_market(), {-1.0, 1.0}), DomainError);
}

TEST(Model1, SymmetricTwoFactorCase) {
    const MarketParams p = MarketParams::two_asset(0.15, 0.15, 0.25, 0.0, 0.0, 0.25, 0.03);
    const auto s = solve_model1(p, {2.0, 2.0});
    const double want = std::exp(-0.03 * 1.5) * 0.12 / (2.0 * 0.0625);
    EXPECT_NEAR(s.control(0.5)[0], want, 1e-14);
    EXPECT_NEAR(s.control(0.5)[1], want, 1e-14);
}

TEST(Model1, GeneralDimension) {
    MarketParams p;
    p.alpha = Vector{{0.1, 0.12, 0.08}};
    p.sigma = Matrix{{0.2, 0.05, 0.0, 0.01}, {0.0, 0.25, 0.05, 0.0}, {0.02, 0.0, 0.15, 0.03}};
    p.r = 0.02;
    const auto s = solve_model1(p, {4.0, 2.0});
    const Matrix cov = p.sigma * p.sigma.transpose();
    const Vector ex = p.alpha - Vector::Constant(3, p.r);
    EXPECT_LT((cov * s.weights() - ex).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Model1, SingularCovarianceCarriesDiagnosis) {
    const MarketParams same = MarketParams::two_asset(0.2, 0.2, 0.3, 0.0, 0.3, 0.0, 0.04);
    try {
        solve_model1(same, {1.0, 1.0});
        FAIL();
    } catch (const SingularCovarianceError& e) {
        EXPECT_NE(std::string(e.what()).find("not unique"), std::string::npos);
    }
    const MarketParams arb = MarketParams::two_asset(0.2, 0.1, 0.3, 0.0, 0.3, 0.0, 0.04);
    try {
        solve_model1(arb, {1.0, 1.0});
        FAIL();
    } catch (const SingularCovarianceError& e) {
        EXPECT_NE(std::string(e.what()).find("no equilibrium exists"), std::string::npos);
    }
}

TEST(OneFactor, EqualPricesOfRisk) {
    const MarketParams p = MarketParams::two_asset(0.2, 0.2, 0.3, 0.0, 0.3, 0.0, 0.04);
    const auto d = diagnose_one_factor(p, {1.0, 1.0});
    EXPECT_EQ(d.kind, OneFactorDiagnosis::Kind::NonUniqueAllocation);
    EXPECT_NEAR(d.constraint_value(1.0), 0.16 / 0.3, 1e-14);
    EXPECT_NEAR(d.constraint_value(1.0), 0.53333, 5e-6);
    EXPECT_NEAR(d.value(0.0, 1.0) - d.expected_wealth(0.0, 1.0), -0.5 * std::pow(0.16 / 0.3, 2), 1e-14);
}

TEST(OneFactor, DifferentPricesOfRisk) {
    const MarketParams p = MarketParams::two_asset(0.2, 0.1, 0.3, 0.0, 0.3, 0.0, 0.04);
    const auto d = diagnose_one_factor(p, {1.0, 1.0});
    EXPECT_EQ(d.kind, OneFactorDiagnosis::Kind::NoEquilibrium);
    EXPECT_NE(d.message.find("arbitrage"), std::string::npos);
    EXPECT_THROW(d.constraint_value(0.0), DomainError);
    EXPECT_THROW(diagnose_one_factor(tcmv::testing::comparison_market(), {1.0, 1.0}), ValidationError);
}

TEST(Model1Property, ShapeLaws) {
    Gen gen(21);
    for (int trial = 0; trial < 100; ++trial) {
        MarketParams p = gen.two_asset(0.1);
        p.sigma(0, 0) += 0.5;
        p.sigma(1, 1) += 0.5;
        const double gamma = gen.uniform(0.5, 10.0), T = gen.uniform(0.1, 5.0);
        const auto s = solve_model1(p, {gamma, T});
        const double t = gen.uniform(0.0, T);
        const Vector uT = s.control(T);
        EXPECT_LT((s.control(t) - uT * std::exp(-s.rate() * (T - t))).cwiseAbs().maxCoeff(), 1e-12);
        EXPECT_LE(s.value(t, 1.3) - s.expected_wealth(t, 1.3), 1e-15);
        EXPECT_NEAR(s.value(t, 1.3) - s.expected_wealth(t, 1.3), -s.theta_sq() * (T - t) / (2 * gamma), 1e-12);
        EXPECT_NEAR(s.value(T, 0.7), 0.7, 1e-15);
        EXPECT_NEAR(s.expected_wealth(T, 0.7), 0.7, 1e-15);
    }
}

TEST(Model1Property, DoublingGammaHalvesControl) {
    Gen gen(22);
    for (int trial = 0; trial < 50; ++trial) {
        MarketParams p = gen.two_asset(0.1);
        p.sigma(0, 0) += 0.5;  // keeps sigma well conditioned
        p.sigma(1, 1) += 0.5;
        const double gamma = gen.uniform(0.5, 10.0);
        const auto a = solve_model1(p, {gamma, 2.0});
        const auto b = solve_model1(p, {2.0 * gamma, 2.0});
        EXPECT_LT((a.control(0.5) - 2.0 * b.control(0.5)).cwiseAbs().maxCoeff(), 1e-12);
    }
}
