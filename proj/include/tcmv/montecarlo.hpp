#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tcmv/market.hpp"
#include "tcmv/model1.hpp"
#include "tcmv/model2.hpp"
#include "tcmv/model3.hpp"

namespace tcmv {

struct SimConfig {
    std::size_t n_paths = 100000;
    std::size_t n_time_steps = 1000;
    std::uint64_t seed = 20160101;
    double x0 = 1.0;
    double horizon = 1.0;
    std::size_t threads = 1;
    std::size_t stored_paths = 0;  ///< how many leading paths to record step by step

    void validate() const;
};

/// Linear feedback in dollars: u_i(t, x) = gain_i(t) x + intercept_i(t).
/// Wealth not held in stocks earns the bank rate r; strategies for the
/// models without a bank have gains summing to 1 and intercepts summing to 0.
struct FeedbackStrategy {
    std::string label;
    std::function<Vector(double)> gain;
    std::function<Vector(double)> intercept;
    /// Optional analytic E_{t,x} X_T and Var_{t,x} X_T under this strategy.
    std::function<double(double, double)> mean;
    std::function<double(double, double)> variance;
};

FeedbackStrategy model1_strategy(const Model1Solution& solution);
FeedbackStrategy model2_strategy(const SampledFunction& k, std::optional<Model2Evaluation> eval = {});
FeedbackStrategy model3_strategy(const Model3Solution& solution);

/// Step-by-step record of the first cfg.stored_paths paths.
struct PathRecord {
    std::vector<double> wealth;  ///< X at each of the n_time_steps + 1 times
    std::vector<Vector> dollars;  ///< u(t_s, X_s) per time
};

struct SimulationReport {
    std::string label;
    double mean_estimate = 0.0;
    double variance_estimate = 0.0;  ///< unbiased (n - 1)
    double reward_estimate = 0.0;  ///< mean - (gamma/2) variance
    double mean_se = 0.0;
    double variance_se = 0.0;  ///< delta method with the fourth central moment
    double reward_se = 0.0;
    std::size_t paths_used = 0;
    std::size_t paths_exploded = 0;
    std::vector<PathRecord> paths;
};

/// Euler-Maruyama for several strategies driven by common random numbers.
/// Path p draws its Gaussian increments from its own engine keyed by
/// (seed, p), so results do not depend on cfg.threads. Throws
/// SimulationExplosionError when more than 0.1% of the paths of any
/// strategy end non-finite.
std::vector<SimulationReport> simulate(const MarketParams& params,
                                       std::span<const FeedbackStrategy> strategies,
                                       const SimConfig& cfg, double gamma);

SimulationReport simulate(const MarketParams& params, const FeedbackStrategy& strategy,
                          const SimConfig& cfg, double gamma);

/// One common price path with per-strategy wealth, allocation and
/// conditional moments along it.
struct FigurePaths {
    std::vector<double> times;
    std::vector<Vector> prices;  ///< per time, one entry per stock
    struct Series {
        std::string label;
        std::vector<double> wealth;
        std::vector<Vector> dollars;
        std::vector<double> cond_mean, cond_variance, reward;  ///< empty when not analytic
    };
    std::vector<Series> series;
};

/// Uses the first path of a CRN run (cfg.n_paths is ignored; one path).
FigurePaths reproduce_figure_paths(const MarketParams& params,
                                   std::span<const FeedbackStrategy> strategies, SimConfig cfg,
                                   double gamma);

/// Key a per-path engine from (seed, path index).
std::uint64_t path_stream_seed(std::uint64_t seed, std::uint64_t path);

}  // namespace tcmv
