#pragma once

#include <optional>

#include "tcmv/market.hpp"

namespace tcmv {

/// Equilibrium with a bank account and n stocks (closed form).
///
/// The dollar allocation does not depend on wealth:
///   u(t) = (1/gamma) e^{-r (T - t)} (sigma sigma^T)^{-1} (alpha - r 1)
/// and with theta^2 = (alpha - r 1)^T (sigma sigma^T)^{-1} (alpha - r 1)
///   g(t, x) = e^{r (T - t)} x + theta^2 (T - t) / gamma
///   V(t, x) = e^{r (T - t)} x + theta^2 (T - t) / (2 gamma)
class Model1Solution {
public:
    Model1Solution(Vector weights, double theta_sq, double r, ObjectiveSpec obj);

    /// Dollars in each stock at time t; the rest of the wealth sits in the bank.
    Vector control(double t) const;
    double expected_wealth(double t, double x) const;  ///< g(t, x)
    double value(double t, double x) const;  ///< V(t, x)
    double variance(double t, double x) const;  ///< Var_{t,x}(X_T) = theta^2 (T - t) / gamma^2

    double theta_sq() const noexcept { return theta_sq_; }
    double rate() const noexcept { return r_; }
    const ObjectiveSpec& objective() const noexcept { return obj_; }
    /// (sigma sigma^T)^{-1} (alpha - r 1)
    const Vector& weights() const noexcept { return weights_; }

private:
    void check_time(double t) const;

    Vector weights_;
    double theta_sq_;
    double r_;
    ObjectiveSpec obj_;
};

/// Condition number of sigma sigma^T above which it is treated as singular.
inline constexpr double kCovarianceConditionLimit = 1e10;
/// Relative tolerance for equal market prices of risk in the one-factor case.
inline constexpr double kPriceOfRiskTol = 1e-9;

/// Outcome of the single-risk-factor analysis.
struct OneFactorDiagnosis {
    enum class Kind {
        /// All risky stocks share one price of risk m; only the combination
        /// sum_i sigma_i1 u_i is pinned down.
        NonUniqueAllocation,
        /// Different prices of risk (or a riskless stock earning more than r).
        NoEquilibrium,
    };

    Kind kind = Kind::NoEquilibrium;
    double price_of_risk = 0.0;  ///< m, meaningful for NonUniqueAllocation
    Vector loadings;  ///< sigma_i1 coefficients of the constraint
    double gamma = 1.0;
    double r = 0.0;
    double horizon = 1.0;
    std::string message;

    /// Right side of sum_i sigma_i1 u_i = (m / gamma) e^{-r (T - t)}.
    double constraint_value(double t) const;
    double expected_wealth(double t, double x) const;
    double value(double t, double x) const;
};

/// Throws DomainError for gamma <= 0; when sigma sigma^T is singular throws
/// SingularCovarianceError whose message carries the one-factor diagnosis
/// if the market has a single effective factor.
Model1Solution solve_model1(const MarketParams& params, const ObjectiveSpec& obj);

/// Requires every factor beyond the first to carry (numerically) zero loading.
OneFactorDiagnosis diagnose_one_factor(const MarketParams& params, const ObjectiveSpec& obj);

/// True when sigma has no loading outside its first column.
bool is_one_factor(const MarketParams& params);

}  // namespace tcmv
