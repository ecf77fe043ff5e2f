#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "tcmv/market.hpp"
#include "test_support.hpp"

using namespace tcmv;
using tcmv::testing::Gen;

TEST(MarketParams, TwoAssetLayout) {
    const MarketParams p = MarketParams::two_asset(0.2, 0.12, 0.3, 0.01, 0.02, 0.2, 0.04);
    EXPECT_EQ(p.n_stocks(), 2u);
    EXPECT_EQ(p.n_factors(), 2u);
    EXPECT_DOUBLE_EQ(p.sigma(0, 1), 0.01);
    EXPECT_DOUBLE_EQ(p.sigma(1, 0), 0.02);
    EXPECT_DOUBLE_EQ(p.initial_price(1), 1.0);
    EXPECT_NO_THROW(p.validate());
}

TEST(MarketParams, RejectsBadShapes) {
    MarketParams p = tcmv::testing::reference_market();
    p.sigma = Matrix::Zero(3, 2);
    EXPECT_THROW(p.validate(), ValidationError);
    p = tcmv::testing::reference_market();
    p.alpha[0] = std::nan("");
    EXPECT_THROW(p.validate(), ValidationError);
    p = tcmv::testing::reference_market();
    p.s0 = Vector::Ones(3);
    EXPECT_THROW(p.validate(), ValidationError);
}

TEST(CorrelationSpec, Validation) {
    EXPECT_NO_THROW(CorrelationSpec::pair(0.5).validate());
    EXPECT_THROW(CorrelationSpec::pair(1.2).validate(), InvalidCorrelationError);
    CorrelationSpec asym = CorrelationSpec::pair(0.3);
    asym.rho(0, 1) = 0.2;
    EXPECT_THROW(asym.validate(), ValidationError);
    CorrelationSpec diag = CorrelationSpec::identity(2);
    diag.rho(1, 1) = 0.9;
    EXPECT_THROW(diag.validate(), InvalidCorrelationError);
}

TEST(ObjectiveSpec, Validation) {
    EXPECT_NO_THROW((ObjectiveSpec{3.0, 1.0}.validate()));
    EXPECT_THROW((ObjectiveSpec{0.0, 1.0}.validate()), DomainError);
    EXPECT_THROW((ObjectiveSpec{1.0, -1.0}.validate()), DomainError);
}

TEST(Decorrelate, IdentityLeavesSigma) {
    const Matrix sigma = tcmv::testing::comparison_market().sigma;
    EXPECT_TRUE(decorrelate(sigma, CorrelationSpec::identity(2)).isApprox(sigma, 1e-15));
}

TEST(Decorrelate, PerfectCorrelationCollapsesSecondFactor) {
    const Matrix s = decorrelate(tcmv::testing::comparison_market().sigma, CorrelationSpec::pair(1.0));
    EXPECT_NEAR(s(0, 1), 0.0, 1e-15);
    EXPECT_NEAR(s(1, 1), 0.0, 1e-15);
}

TEST(Decorrelate, HalfCorrelationMatchesMatrixProduct) {
    Matrix sigma(2, 2);
    sigma << 0.3, 0.0, 0.0, 0.2;
    const CorrelationSpec rho = CorrelationSpec::pair(0.5);
    const Matrix s = decorrelate(sigma, rho);
    // direct product: [[0.09, 0.03], [0.03, 0.04]]
    EXPECT_NEAR((s * s.transpose())(0, 0), 0.09, 1e-15);
    EXPECT_NEAR((s * s.transpose())(0, 1), 0.03, 1e-15);
    EXPECT_NEAR((s * s.transpose())(1, 1), 0.04, 1e-15);
    // the pairwise rule for two factors: first column sigma_i1 + rho sigma_i2
    EXPECT_NEAR(s(1, 0), 0.5 * 0.2, 1e-15);
    EXPECT_NEAR(s(1, 1), std::sqrt(0.75) * 0.2, 1e-15);
}

TEST(DecorrelateProperty, PreservesCovarianceForRandomInputs) {
    Gen gen(11);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t d = 1 + gen.index(5);
        const std::size_t n = 1 + gen.index(4);
        const Matrix sigma = gen.matrix(n, d, -0.5, 0.5);
        const CorrelationSpec rho{gen.correlation(d)};
        const Matrix s = decorrelate(sigma, rho);
        const Matrix want = sigma * rho.rho * sigma.transpose();
        EXPECT_LT((s * s.transpose() - want).cwiseAbs().maxCoeff(), 1e-12) << "trial " << trial;
    }
}

TEST(PriceCovariance, Examples) {
    MarketParams p = MarketParams::two_asset(0.2, 0.1, 0.3, 0.0, 0.0, 0.2);
    const auto id = CorrelationSpec::identity(2);
    EXPECT_EQ(price_covariance(p, id, 0, 0, 0.0), 0.0);
    EXPECT_NEAR(price_covariance(p, id, 0, 0, 1.0), std::exp(0.4) * std::expm1(0.09), 1e-14);
    EXPECT_NEAR(price_covariance(p, id, 0, 0, 1.0), 0.140491522314, 1e-11);
    EXPECT_EQ(price_covariance(p, id, 0, 1, 1.0), 0.0);
    EXPECT_THROW(price_covariance(p, id, 0, 0, -0.1), DomainError);
}

TEST(PriceCovariance, MatchesSampledPrices) {
    MarketParams p = MarketParams::two_asset(0.2, 0.1, 0.3, 0.0, 0.1, 0.2);
    const auto rho = CorrelationSpec::pair(0.4);
    const Matrix s = decorrelate(p.sigma, rho);
    std::mt19937_64 eng(5);
    std::normal_distribution<double> z;
    const int n = 100000;
    const double t = 1.0;
    std::vector<double> a(n), b(n);
    for (int k = 0; k < n; ++k) {
        const double w1 = z(eng) * std::sqrt(t), w2 = z(eng) * std::sqrt(t);
        a[k] = std::exp((0.2 - 0.5 * s.row(0).squaredNorm()) * t + s(0, 0) * w1 + s(0, 1) * w2);
        b[k] = std::exp((0.1 - 0.5 * s.row(1).squaredNorm()) * t + s(1, 0) * w1 + s(1, 1) * w2);
    }
    double ma = 0, mb = 0;
    for (int k = 0; k < n; ++k) ma += a[k], mb += b[k];
    ma /= n, mb /= n;
    std::vector<double> prod(n);
    double mp = 0;
    for (int k = 0; k < n; ++k) mp += (prod[k] = (a[k] - ma) * (b[k] - mb));
    mp /= n - 1;
    double v = 0;
    for (int k = 0; k < n; ++k) v += (prod[k] - mp) * (prod[k] - mp);
    const double se = std::sqrt(v / (n - 1) / n);
    EXPECT_NEAR(mp, price_covariance(p, rho, 0, 1, t), 3.0 * se);
}

TEST(PriceCovarianceProperty, SymmetricAndNonnegativeDiagonal) {
    Gen gen(12);
    for (int trial = 0; trial < 100; ++trial) {
        MarketParams p;
        p.alpha = (Vector(3) << gen.uniform(-0.2, 0.2), gen.uniform(-0.2, 0.2), gen.uniform(-0.2, 0.2)).finished();
        p.sigma = gen.matrix(3, 3, -0.4, 0.4);
        p.s0 = (Vector(3) << gen.uniform(0.5, 2), gen.uniform(0.5, 2), gen.uniform(0.5, 2)).finished();
        const CorrelationSpec rho{gen.correlation(3)};
        const double t = gen.uniform(0.0, 5.0);
        for (std::size_t i = 0; i < 3; ++i) {
            EXPECT_GE(price_covariance(p, rho, i, i, t), 0.0);
            for (std::size_t j = 0; j < 3; ++j)
                EXPECT_DOUBLE_EQ(price_covariance(p, rho, i, j, t), price_covariance(p, rho, j, i, t));
        }
    }
}

TEST(MarketPriceOfRisk, FootnoteValues) {
    MarketParams p = tcmv::testing::comparison_market();
    EXPECT_NEAR(market_price_of_risk(p, 0), 0.5333, 5e-5);
    EXPECT_NEAR(market_price_of_risk(p, 1), 0.4000, 5e-5);
    p.s0 = Vector::Constant(2, 7.0);
    EXPECT_NEAR(market_price_of_risk(p, 0), 0.16 / 0.3, 1e-15);
    p.alpha[1] = p.r;
    EXPECT_EQ(market_price_of_risk(p, 1), 0.0);
    p.sigma.row(1).setZero();
    EXPECT_THROW(market_price_of_risk(p, 1), DegenerateAssetError);
}

TEST(DistinctVolatility, Classification) {
    EXPECT_TRUE(validate_distinct_volatility(tcmv::testing::comparison_market()).passed);

    const auto same = validate_distinct_volatility(MarketParams::two_asset(0.1, 0.1, 0.25, 0, 0.25, 0));
    EXPECT_FALSE(same.passed);
    EXPECT_EQ(same.degeneracy, Degeneracy::IdenticalAssets);
    EXPECT_NE(same.message.find("identical assets, any allocation admissible"), std::string::npos);

    const auto none = validate_distinct_volatility(MarketParams::two_asset(0.2, 0.1, 0.25, 0, 0.25, 0));
    EXPECT_FALSE(none.passed);
    EXPECT_EQ(none.degeneracy, Degeneracy::NoEquilibrium);
    EXPECT_NE(none.message.find("no equilibrium exists"), std::string::npos);

    try {
        TwoAssetMarket m(MarketParams::two_asset(0.2, 0.1, 0.25, 0, 0.25, 0));
        FAIL() << "expected DegenerateVolatilityError";
    } catch (const DegenerateVolatilityError& e) {
        EXPECT_EQ(e.kind(), Degeneracy::NoEquilibrium);
    }
}

TEST(TwoAssetMarket, ReferenceCombinations) {
    const TwoAssetMarket m(tcmv::testing::reference_market());
    EXPECT_DOUBLE_EQ(m.spread(), 0.125);
    EXPECT_DOUBLE_EQ(m.cross(), -0.0625);
    EXPECT_NEAR(m.lambda(), 0.64, 1e-15);
    EXPECT_NEAR(m.gain_lower_bound(), -0.14, 1e-15);
    EXPECT_NEAR(m.gain_upper_bound(), 0.5, 1e-15);
    EXPECT_NEAR(m.exposure(0.5), 0.03125, 1e-16);
    EXPECT_NEAR(m.excess(0.5), 0.08, 1e-16);
    EXPECT_NEAR(m.drift(1.0), 0.2, 1e-16);
}

TEST(TwoAssetMarket, AppliesCorrelation) {
    const MarketParams p = tcmv::testing::comparison_market();
    const TwoAssetMarket m(p, CorrelationSpec::pair(0.5));
    EXPECT_NEAR(m.s21(), 0.1, 1e-15);
    EXPECT_NEAR(m.s22(), 0.2 * std::sqrt(0.75), 1e-15);
}
