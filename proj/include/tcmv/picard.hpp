#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "tcmv/numerics.hpp"

namespace tcmv {

struct PicardConfig {
    double tol = 1e-10;  ///< sup-norm stopping tolerance on successive iterates
    std::size_t max_iter = 200;
    double initial_value = 1.0;  ///< constant starting iterate
    bool keep_history = false;  ///< retain k^(0), k^(1), ... in the result

    void validate() const;
};

/// Maps the node values of one iterate to the node values of the next.
using PicardMap = std::function<std::vector<double>(std::span<const double>)>;

struct PicardResult {
    SampledFunction solution;
    std::size_t iterations = 0;  ///< number of map applications
    double final_delta = 0.0;  ///< |k^(n) - k^(n-1)| in sup norm at exit
    std::vector<std::vector<double>> history;  ///< k^(0..n) when requested
};

/// Successive substitution k^(n) = map(k^(n-1)) from a constant start.
/// Returns the first iterate within cfg.tol of its predecessor; throws
/// NonConvergenceError after cfg.max_iter maps or on non-finite iterates.
PicardResult picard_solve(const TimeGrid& grid, const PicardMap& map, const PicardConfig& cfg,
                          const std::string& label = "picard");

/// sum_{i >= n} K^{i+1} h^i / i!  (a priori error of the n-th iterate of a
/// Volterra-type fixed-point map with Lipschitz constant below K).
struct ConvergenceBound {
    double K = 0.0;
    double horizon = 0.0;
    std::size_t n = 1;
    double bound = 0.0;
};

/// Throws DomainError for K <= 0, horizon < 0 or n < 1.
double convergence_bound(double K, double horizon, std::size_t n);
ConvergenceBound make_convergence_bound(double K, double horizon, std::size_t n);

/// One row per iteration index n >= 1: empirical sup error of k^(n) against
/// the converged solution next to the a priori bound at the full horizon.
struct BoundRow {
    std::size_t n = 0;
    double empirical = 0.0;
    double bound = 0.0;
};

/// Rows n = 1..n_max (clipped to the retained history).
std::vector<BoundRow> bound_table(std::span<const std::vector<double>> history,
                                  std::span<const double> solution, double K, double horizon,
                                  std::size_t n_max);

/// Fixed-width text rendering of bound_table output.
std::string format_bound_table(std::span<const BoundRow> rows, const std::string& title);

}  // namespace tcmv
