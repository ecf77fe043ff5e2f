#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "tcmv/market.hpp"
#include "tcmv/numerics.hpp"
#include "tcmv/picard.hpp"

namespace tcmv {

/// Kernels of the intercept equation for the mean-variance model without a
/// bank account, for a solved gain k1:
///
///   I1(t,v) = exp(-int_t^v drift(k1)),  I2(t,v) = exp(-int_t^v exposure(k1))
///   I3(t,v) = (alpha1 - alpha2) I2(t,T) - excess(k1(v)) I2(t,v)
///   L(t,v)  = I1(t,v) I3(t,v),  phi(t) = lambda I1(t,T) I2(t,T) / gamma
///
/// All three exponents are differences of one backward cumulative integral,
/// so L(t,v) = w(t) h(v) with w(t) = exp(-D(t) - B(t)) and
/// h(v) = exp(D(v)) (alpha1 - alpha2 - excess(k1(v)) exp(B(v))), where D and B
/// are the tail integrals of drift and exposure. Only O(N) data is stored.
class KernelTables {
public:
    KernelTables(const TwoAssetMarket& market, const SampledFunction& k1, double gamma);

    const TimeGrid& grid() const noexcept { return grid_; }
    double lambda() const noexcept { return lambda_; }
    double drift_gap() const noexcept { return drift_gap_; }
    double spread() const noexcept { return spread_; }
    double gamma() const noexcept { return gamma_; }
    /// sup over grid pairs t <= v of |L(t,v)|.
    double M3() const noexcept { return M3_; }

    double I1(std::size_t i, std::size_t j) const noexcept;
    double I2(std::size_t i, std::size_t j) const noexcept;
    double I3(std::size_t i, std::size_t j) const noexcept;
    double L(std::size_t i, std::size_t j) const noexcept { return I1(i, j) * I3(i, j); }
    double phi(std::size_t i) const noexcept;

    /// Tail integrals of drift(k1) and exposure(k1), and the separable factors.
    std::span<const double> drift_tail() const noexcept { return drift_tail_; }
    std::span<const double> exposure_tail() const noexcept { return exposure_tail_; }
    std::span<const double> excess() const noexcept { return excess_; }
    double w(std::size_t i) const noexcept;
    std::span<const double> h() const noexcept { return h_; }

private:
    TimeGrid grid_;
    double lambda_, drift_gap_, spread_, gamma_;
    std::vector<double> drift_tail_, exposure_tail_, excess_, h_;
    double M3_ = 0.0;
};

/// Mean, variance and value of terminal wealth under u = k1 x + k2 from any
/// (t, x), written through the coefficients
///   E_{t,x} X_T   = I1(t,T)^{-1} (x + (alpha1 - alpha2) int_t^T I1(t,v) k2(v) dv)
///   Var_{t,x} X_T = I1(t,T)^{-2} (c0 x^2 + c1 x + c2)
///   g = E,  V = E - (gamma/2) Var.
class MomentCoefficients {
public:
    MomentCoefficients(TimeGrid grid, std::vector<double> c0, std::vector<double> c1,
                       std::vector<double> c2, std::vector<double> growth,
                       std::vector<double> mean_intercept, double gamma);

    const SampledFunction& c0() const noexcept { return c0_; }
    const SampledFunction& c1() const noexcept { return c1_; }
    const SampledFunction& c2() const noexcept { return c2_; }
    /// I1(t,T)^{-1}
    const SampledFunction& growth() const noexcept { return growth_; }
    double gamma() const noexcept { return gamma_; }

    double mean_at(std::size_t i, double x) const;
    double variance_at(std::size_t i, double x) const;
    double second_moment_at(std::size_t i, double x) const;
    double value_at(std::size_t i, double x) const;

    /// Off-grid versions interpolate the coefficient curves linearly.
    double mean(double t, double x) const;
    double variance(double t, double x) const;
    double value(double t, double x) const;

private:
    SampledFunction c0_, c1_, c2_, growth_, mean_intercept_;
    double gamma_;
};

struct Model3Solution {
    SampledFunction k1;
    SampledFunction k2;  ///< dollars
    KernelTables kernels;
    MomentCoefficients moments;
    std::size_t k1_iterations = 0;
    double k1_delta = 0.0;
    std::size_t k2_iterations = 0;
    double k2_delta = 0.0;
    std::vector<std::vector<double>> k1_history, k2_history;
    double k1_bound_K = 0.0;  ///< constant for convergence_bound on the k1 iterates
    double k2_bound_K = 0.0;
};

/// Gain equation for k1; shares its form with the variance-only model.
PicardResult solve_k1(const MarketParams& params, const TimeGrid& grid, const PicardConfig& cfg = {});

KernelTables build_kernels(const MarketParams& params, const SampledFunction& k1, double gamma);

/// One substitution k2 -> phi + lambda int_t^T L(t,v) k2(v) dv, O(N).
std::vector<double> intercept_map(const KernelTables& kernels, std::span<const double> k2);

PicardResult solve_k2(const KernelTables& kernels, const PicardConfig& cfg = {});

MomentCoefficients moments(const MarketParams& params, const SampledFunction& k1,
                           const SampledFunction& k2, double gamma);

/// k1 -> kernels -> k2 -> moments, with iteration bound constants.
Model3Solution solve_model3(const MarketParams& params, double gamma, const TimeGrid& grid,
                            const PicardConfig& cfg = {});

/// Dollars in (stock 1, stock 2) at (t, x); throws DomainError outside [0, T].
std::pair<double, double> control(const Model3Solution& solution, double t, double x);

/// K for the k2 iterates: Lipschitz constant |lambda| M3 fed to
/// iteration_bound_constant with the first intercept iterate.
double intercept_bound_constant(const KernelTables& kernels, double initial_value);

}  // namespace tcmv
