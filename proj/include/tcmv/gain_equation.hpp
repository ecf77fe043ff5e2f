#pragma once

#include <span>
#include <string>
#include <vector>

#include "tcmv/market.hpp"
#include "tcmv/numerics.hpp"
#include "tcmv/picard.hpp"

namespace tcmv {

// The fraction k(t) of wealth held in stock 1 solves, in both models without a
// bank account,
//
//   k(t) = [ (alpha1 - alpha2) (exp(-int_t^T exposure(k(s)) ds) - 1) - cross ] / spread
//
// (see TwoAssetMarket for exposure, cross and spread).

/// One substitution of the gain equation on the grid.
std::vector<double> gain_map(const TwoAssetMarket& market, const TimeGrid& grid,
                             std::span<const double> k);

/// sup_i |gain_map(k)_i - k_i|
double gain_residual(const TwoAssetMarket& market, const TimeGrid& grid, std::span<const double> k);

/// Picard solve from cfg.initial_value.
PicardResult solve_gain(const TwoAssetMarket& market, const TimeGrid& grid, const PicardConfig& cfg,
                        const std::string& label);

/// Volterra-Lipschitz constant of gain_map over the values the iterates can
/// take (the start value and the a priori bounds):
/// |map(k)(t) - map(l)(t)| <= L int_t^T |k - l| ds.
double gain_lipschitz(const TwoAssetMarket& market, double initial_value);

/// Constant K for convergence_bound given a Volterra-Lipschitz constant L,
/// the first two iterates and the grid:
///   K = 1.01 max(L, omega1 L, |k1 - k0|_inf e^{L T}),  omega1 = int_0^T |k1 - k0|.
double iteration_bound_constant(double lipschitz, const TimeGrid& grid,
                                std::span<const double> k0, std::span<const double> k1);

}  // namespace tcmv
