#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <string>

#include "tcmv/error.hpp"

namespace tcmv {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Stock drifts, volatility loadings and the bank rate.
///
/// Row i of `sigma` holds the loadings of stock i on the d risk factors.
/// `s0` may be left empty, in which case every initial price is 1.
struct MarketParams {
    Vector alpha;  ///< per-stock drift (1/year)
    Matrix sigma;  ///< n x d volatility matrix (1/sqrt(year))
    double r = 0.0;  ///< risk-free rate (1/year); read by the risk-free model only
    Vector s0;  ///< initial prices, defaults to ones

    std::size_t n_stocks() const noexcept { return static_cast<std::size_t>(alpha.size()); }
    std::size_t n_factors() const noexcept { return static_cast<std::size_t>(sigma.cols()); }
    double initial_price(std::size_t i) const;

    /// Throws ValidationError on shape mismatch or non-finite entries.
    void validate() const;

    /// Two stocks driven by two factors.
    static MarketParams two_asset(double alpha1, double alpha2, double s11, double s12, double s21,
                                  double s22, double r = 0.0);
};

/// Brownian correlations; unit diagonal, symmetric, entries in [-1, 1].
struct CorrelationSpec {
    Matrix rho;

    static CorrelationSpec identity(std::size_t d);
    static CorrelationSpec pair(double rho12);

    /// Throws InvalidCorrelationError or ValidationError.
    void validate() const;
};

/// Risk aversion and horizon.
struct ObjectiveSpec {
    double gamma = 1.0;
    double horizon = 1.0;

    void validate() const;
};

/// Loadings on independent Brownian motions with the same instantaneous
/// covariance: the result S satisfies S S^T = sigma rho sigma^T.
Matrix decorrelate(const Matrix& sigma, const CorrelationSpec& rho);

/// Cov(S_i(t), S_j(t)) for geometric Brownian prices with correlated drivers.
double price_covariance(const MarketParams& params, const CorrelationSpec& rho, std::size_t i,
                        std::size_t j, double t);

/// (alpha_i - r) / |sigma row i|.
double market_price_of_risk(const MarketParams& params, std::size_t i);

struct VolatilityCheck {
    bool passed = false;
    Degeneracy degeneracy = Degeneracy::None;
    double distance = 0.0;  ///< (s11 - s21)^2 + (s12 - s22)^2
    std::string message;
};

/// Squared distance below which two volatility rows count as identical.
inline constexpr double kVolatilityDegeneracyTol = 1e-12;

/// Two-stock check that the volatility rows differ; never throws for a
/// well-shaped 2x2 market.
VolatilityCheck validate_distinct_volatility(const MarketParams& params);

/// Scalar view of a two-stock, two-factor market with independent drivers,
/// exposing the combinations that appear in the equilibrium equations.
///
/// With k the fraction of wealth held in stock 1:
///   drift(k)    = alpha2 + k (alpha1 - alpha2)
///   exposure(k) = (s21 + k d1)^2 + (s22 + k d2)^2,  d1 = s11 - s21, d2 = s12 - s22
///   excess(k)   = (alpha1 - alpha2) + d1 (s21 + k d1) + d2 (s22 + k d2)
class TwoAssetMarket {
public:
    /// Throws DegenerateVolatilityError when the volatility rows coincide.
    explicit TwoAssetMarket(const MarketParams& params);
    TwoAssetMarket(const MarketParams& params, const CorrelationSpec& rho);

    double alpha1() const noexcept { return alpha1_; }
    double alpha2() const noexcept { return alpha2_; }
    double s11() const noexcept { return s11_; }
    double s12() const noexcept { return s12_; }
    double s21() const noexcept { return s21_; }
    double s22() const noexcept { return s22_; }

    double drift_gap() const noexcept { return alpha1_ - alpha2_; }
    double d1() const noexcept { return s11_ - s21_; }
    double d2() const noexcept { return s12_ - s22_; }
    /// (s11 - s21)^2 + (s12 - s22)^2, strictly positive.
    double spread() const noexcept { return d1() * d1() + d2() * d2(); }
    /// s21 (s11 - s21) + s22 (s12 - s22)
    double cross() const noexcept { return s21_ * d1() + s22_ * d2(); }
    /// (alpha1 - alpha2) / spread
    double lambda() const noexcept { return drift_gap() / spread(); }

    double drift(double k) const noexcept { return alpha2_ + k * drift_gap(); }
    double exposure(double k) const noexcept {
        const double b1 = s21_ + k * d1();
        const double b2 = s22_ + k * d2();
        return b1 * b1 + b2 * b2;
    }
    double excess(double k) const noexcept { return drift_gap() + cross() + k * spread(); }

    /// Bounds satisfied by every gain iterate after the first:
    /// between -cross/spread and -(cross + alpha1 - alpha2)/spread.
    double gain_lower_bound() const noexcept;
    double gain_upper_bound() const noexcept;

private:
    void init(const MarketParams& params, const Matrix& sigma);

    double alpha1_, alpha2_, s11_, s12_, s21_, s22_;
};

}  // namespace tcmv
