#include "tcmv/model1.hpp"

#include <cmath>
#include <sstream>

namespace tcmv {

Model1Solution::Model1Solution(Vector weights, double theta_sq, double r, ObjectiveSpec obj)
    : weights_(std::move(weights)), theta_sq_(theta_sq), r_(r), obj_(obj) {}

void Model1Solution::check_time(double t) const {
    if (!(t >= 0.0 && t <= obj_.horizon)) throw DomainError("time outside [0, T]");
}

Vector Model1Solution::control(double t) const {
    check_time(t);
    return weights_ * (std::exp(-r_ * (obj_.horizon - t)) / obj_.gamma);
}

double Model1Solution::expected_wealth(double t, double x) const {
    check_time(t);
    const double tau = obj_.horizon - t;
    return std::exp(r_ * tau) * x + theta_sq_ * tau / obj_.gamma;
}

double Model1Solution::value(double t, double x) const {
    check_time(t);
    const double tau = obj_.horizon - t;
    return std::exp(r_ * tau) * x + theta_sq_ * tau / (2.0 * obj_.gamma);
}

double Model1Solution::variance(double t, double /*x*/) const {
    check_time(t);
    return theta_sq_ * (obj_.horizon - t) / (obj_.gamma * obj_.gamma);
}

bool is_one_factor(const MarketParams& params) {
    if (params.n_factors() < 2) return true;
    const double scale = std::max(params.sigma.cwiseAbs().maxCoeff(), 1e-300);
    return params.sigma.rightCols(params.sigma.cols() - 1).cwiseAbs().maxCoeff() <= 1e-12 * scale;
}

Model1Solution solve_model1(const MarketParams& params, const ObjectiveSpec& obj) {
    params.validate();
    obj.validate();
    const Matrix cov = params.sigma * params.sigma.transpose();
    const Vector excess = params.alpha - Vector::Constant(params.alpha.size(), params.r);

    Eigen::SelfAdjointEigenSolver<Matrix> eig(cov);
    const double lmax = eig.eigenvalues().maxCoeff();
    const double lmin = eig.eigenvalues().minCoeff();
    if (!(lmin > 0.0) || lmax / lmin > kCovarianceConditionLimit) {
        std::ostringstream msg;
        msg << "sigma sigma^T is singular (condition number "
            << (lmin > 0.0 ? lmax / lmin : INFINITY) << ")";
        if (is_one_factor(params)) msg << "; " << diagnose_one_factor(params, obj).message;
        throw SingularCovarianceError(msg.str());
    }
    const Vector weights = cov.ldlt().solve(excess);
    return Model1Solution(weights, excess.dot(weights), params.r, obj);
}

double OneFactorDiagnosis::constraint_value(double t) const {
    if (kind != Kind::NonUniqueAllocation) throw DomainError("no equilibrium: no constraint");
    return price_of_risk / gamma * std::exp(-r * (horizon - t));
}

double OneFactorDiagnosis::expected_wealth(double t, double x) const {
    if (kind != Kind::NonUniqueAllocation) throw DomainError("no equilibrium: no value");
    return std::exp(r * (horizon - t)) * x + price_of_risk * price_of_risk * (horizon - t) / gamma;
}

double OneFactorDiagnosis::value(double t, double x) const {
    if (kind != Kind::NonUniqueAllocation) throw DomainError("no equilibrium: no value");
    return std::exp(r * (horizon - t)) * x +
           price_of_risk * price_of_risk * (horizon - t) / (2.0 * gamma);
}

OneFactorDiagnosis diagnose_one_factor(const MarketParams& params, const ObjectiveSpec& obj) {
    params.validate();
    obj.validate();
    if (!is_one_factor(params))
        throw ValidationError("one-factor diagnosis needs zero loadings beyond the first factor");

    OneFactorDiagnosis out;
    out.gamma = obj.gamma;
    out.r = params.r;
    out.horizon = obj.horizon;
    out.loadings = params.sigma.col(0);

    bool have_price = false;
    bool consistent = true;
    std::ostringstream why;
    for (Eigen::Index i = 0; i < params.alpha.size(); ++i) {
        const double s = params.sigma(i, 0);
        const double ex = params.alpha[i] - params.r;
        if (s == 0.0) {
            // A riskless stock must earn exactly the bank rate.
            if (std::abs(ex) > kPriceOfRiskTol * std::max(1.0, std::abs(params.r))) {
                consistent = false;
                why << "stock " << i + 1 << " is riskless with drift != r; ";
            }
            continue;
        }
        const double m = ex / s;
        if (!have_price) {
            out.price_of_risk = m;
            have_price = true;
        } else if (std::abs(m - out.price_of_risk) >
                   kPriceOfRiskTol * std::max(std::abs(m), std::abs(out.price_of_risk))) {
            consistent = false;
            why << "prices of risk differ (" << out.price_of_risk << " vs " << m << "); ";
        }
    }

    if (consistent && have_price) {
        out.kind = OneFactorDiagnosis::Kind::NonUniqueAllocation;
        std::ostringstream msg;
        msg << "single risk factor with common price of risk " << out.price_of_risk
            << ": allocations are not unique, only sum_i sigma_i1 u_i = (m/gamma) e^{-r(T-t)} "
               "is determined";
        out.message = msg.str();
    } else {
        out.kind = OneFactorDiagnosis::Kind::NoEquilibrium;
        out.message = "single risk factor: " + why.str() +
                      "arbitrage, no equilibrium exists";
        if (!have_price && consistent) out.message = "no risky stock: no equilibrium allocation";
    }
    return out;
}

}  // namespace tcmv
