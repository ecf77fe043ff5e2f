#include "tcmv/market.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace tcmv {

const char* describe(Degeneracy d) noexcept {
    switch (d) {
        case Degeneracy::None: return "distinct volatilities";
        case Degeneracy::IdenticalAssets: return "identical assets, any allocation admissible";
        case Degeneracy::NoEquilibrium: return "no equilibrium exists";
    }
    return "unknown";
}

double MarketParams::initial_price(std::size_t i) const {
    if (i >= n_stocks()) throw DomainError("stock index out of range");
    return s0.size() == 0 ? 1.0 : s0[static_cast<Eigen::Index>(i)];
}

void MarketParams::validate() const {
    if (alpha.size() < 1) throw ValidationError("market needs at least one stock");
    if (sigma.cols() < 1) throw ValidationError("market needs at least one risk factor");
    if (sigma.rows() != alpha.size())
        throw ValidationError("sigma must have one row per stock");
    if (s0.size() != 0 && s0.size() != alpha.size())
        throw ValidationError("s0 must have one entry per stock");
    if (!alpha.allFinite() || !sigma.allFinite() || !std::isfinite(r) || !s0.allFinite())
        throw ValidationError("market parameters must be finite");
}

MarketParams MarketParams::two_asset(double alpha1, double alpha2, double s11, double s12,
                                     double s21, double s22, double r) {
    MarketParams p;
    p.alpha = Vector{{alpha1, alpha2}};
    p.sigma = Matrix{{s11, s12}, {s21, s22}};
    p.r = r;
    return p;
}

CorrelationSpec CorrelationSpec::identity(std::size_t d) {
    return {Matrix::Identity(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d))};
}

CorrelationSpec CorrelationSpec::pair(double rho12) {
    return {Matrix{{1.0, rho12}, {rho12, 1.0}}};
}

void CorrelationSpec::validate() const {
    if (rho.rows() != rho.cols() || rho.rows() < 1)
        throw ValidationError("correlation matrix must be square");
    if (!rho.allFinite()) throw ValidationError("correlation entries must be finite");
    for (Eigen::Index i = 0; i < rho.rows(); ++i) {
        if (std::abs(rho(i, i) - 1.0) > 1e-12)
            throw InvalidCorrelationError("correlation diagonal must be 1");
        for (Eigen::Index j = 0; j < rho.cols(); ++j) {
            if (std::abs(rho(i, j)) > 1.0)
                throw InvalidCorrelationError("correlation entries must lie in [-1, 1]");
            if (std::abs(rho(i, j) - rho(j, i)) > 1e-12)
                throw ValidationError("correlation matrix must be symmetric");
        }
    }
}

void ObjectiveSpec::validate() const {
    if (!(gamma > 0.0) || !std::isfinite(gamma))
        throw DomainError("risk aversion gamma must be positive");
    if (!(horizon > 0.0) || !std::isfinite(horizon))
        throw DomainError("horizon T must be positive");
}

namespace {

// Lower-triangular factor of a positive semidefinite correlation matrix.
// Zero pivots (perfectly correlated factors) give a zero column.
Matrix correlation_factor(const Matrix& rho) {
    const Eigen::Index d = rho.rows();
    Matrix L = Matrix::Zero(d, d);
    constexpr double kPivotTol = 1e-12;
    for (Eigen::Index j = 0; j < d; ++j) {
        double pivot = rho(j, j) - L.row(j).head(j).squaredNorm();
        if (pivot < -kPivotTol)
            throw InvalidCorrelationError("correlation matrix is not positive semidefinite");
        const double ljj = pivot > kPivotTol ? std::sqrt(pivot) : 0.0;
        L(j, j) = ljj;
        for (Eigen::Index i = j + 1; i < d; ++i) {
            const double v = rho(i, j) - L.row(i).head(j).dot(L.row(j).head(j));
            if (ljj == 0.0) {
                if (std::abs(v) > 1e-9)
                    throw InvalidCorrelationError("correlation matrix is not positive semidefinite");
                L(i, j) = 0.0;
            } else {
                L(i, j) = v / ljj;
            }
        }
    }
    return L;
}

}  // namespace

Matrix decorrelate(const Matrix& sigma, const CorrelationSpec& rho) {
    rho.validate();
    if (rho.rho.rows() != sigma.cols())
        throw ValidationError("correlation size must equal the number of factors");
    return sigma * correlation_factor(rho.rho);
}

double price_covariance(const MarketParams& params, const CorrelationSpec& rho, std::size_t i,
                        std::size_t j, double t) {
    params.validate();
    if (t < 0.0) throw DomainError("price_covariance: t must be nonnegative");
    const auto n = params.n_stocks();
    if (i >= n || j >= n) throw DomainError("price_covariance: stock index out of range");
    const Matrix s = decorrelate(params.sigma, rho);
    const auto ii = static_cast<Eigen::Index>(i);
    const auto jj = static_cast<Eigen::Index>(j);
    const double loading = s.row(ii).dot(s.row(jj));
    return params.initial_price(i) * params.initial_price(j) *
           std::exp((params.alpha[ii] + params.alpha[jj]) * t) * std::expm1(loading * t);
}

double market_price_of_risk(const MarketParams& params, std::size_t i) {
    params.validate();
    if (i >= params.n_stocks()) throw DomainError("market_price_of_risk: index out of range");
    const auto ii = static_cast<Eigen::Index>(i);
    const double vol = params.sigma.row(ii).norm();
    if (vol == 0.0)
        throw DegenerateAssetError("stock " + std::to_string(i + 1) + " has zero volatility");
    return (params.alpha[ii] - params.r) / vol;
}

VolatilityCheck validate_distinct_volatility(const MarketParams& params) {
    params.validate();
    if (params.n_stocks() != 2 || params.n_factors() != 2)
        throw ValidationError("distinct-volatility check needs two stocks and two factors");
    const double d1 = params.sigma(0, 0) - params.sigma(1, 0);
    const double d2 = params.sigma(0, 1) - params.sigma(1, 1);
    VolatilityCheck out;
    out.distance = d1 * d1 + d2 * d2;
    if (out.distance > kVolatilityDegeneracyTol) {
        out.passed = true;
        out.message = describe(Degeneracy::None);
        return out;
    }
    const double gap = params.alpha[0] - params.alpha[1];
    out.degeneracy = std::abs(gap) <= 1e-12 * std::max(1.0, std::abs(params.alpha[0]))
                         ? Degeneracy::IdenticalAssets
                         : Degeneracy::NoEquilibrium;
    std::ostringstream msg;
    msg << "volatility rows of the two stocks coincide (squared distance " << out.distance
        << "): " << describe(out.degeneracy);
    out.message = msg.str();
    return out;
}

TwoAssetMarket::TwoAssetMarket(const MarketParams& params) {
    params.validate();
    init(params, params.sigma);
}

TwoAssetMarket::TwoAssetMarket(const MarketParams& params, const CorrelationSpec& rho) {
    params.validate();
    init(params, decorrelate(params.sigma, rho));
}

void TwoAssetMarket::init(const MarketParams& params, const Matrix& sigma) {
    if (params.n_stocks() != 2 || sigma.cols() != 2)
        throw ValidationError("two-stock models need exactly two stocks and two factors");
    MarketParams effective = params;
    effective.sigma = sigma;
    const VolatilityCheck check = validate_distinct_volatility(effective);
    if (!check.passed) throw DegenerateVolatilityError(check.degeneracy, check.message);
    alpha1_ = params.alpha[0];
    alpha2_ = params.alpha[1];
    s11_ = sigma(0, 0);
    s12_ = sigma(0, 1);
    s21_ = sigma(1, 0);
    s22_ = sigma(1, 1);
}

double TwoAssetMarket::gain_lower_bound() const noexcept {
    const double a = -cross() / spread();
    const double b = -(cross() + drift_gap()) / spread();
    return std::min(a, b);
}

double TwoAssetMarket::gain_upper_bound() const noexcept {
    const double a = -cross() / spread();
    const double b = -(cross() + drift_gap()) / spread();
    return std::max(a, b);
}

}  // namespace tcmv
