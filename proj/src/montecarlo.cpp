#include "tcmv/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <thread>

namespace tcmv {

void SimConfig::validate() const {
    if (n_paths < 1) throw DomainError("simulation needs at least one path");
    if (n_time_steps < 1) throw DomainError("simulation needs at least one time step");
    if (!(horizon > 0.0) || !std::isfinite(horizon))
        throw DomainError("simulation horizon must be positive");
    if (!std::isfinite(x0)) throw DomainError("initial wealth must be finite");
}

FeedbackStrategy model1_strategy(const Model1Solution& solution) {
    FeedbackStrategy s;
    s.label = "model1";
    const auto n = solution.weights().size();
    s.gain = [n](double) { return Vector::Zero(n).eval(); };
    s.intercept = [solution](double t) { return solution.control(t); };
    s.mean = [solution](double t, double x) { return solution.expected_wealth(t, x); };
    s.variance = [solution](double t, double x) { return solution.variance(t, x); };
    return s;
}

FeedbackStrategy model2_strategy(const SampledFunction& k, std::optional<Model2Evaluation> eval) {
    FeedbackStrategy s;
    s.label = "model2";
    s.gain = [k](double t) {
        const double v = k(t);
        return Vector{{v, 1.0 - v}};
    };
    s.intercept = [](double) { return Vector::Zero(2).eval(); };
    if (eval) {
        s.mean = [e = *eval](double t, double x) { return e.expected_wealth(t, x); };
        s.variance = [e = *eval](double t, double x) { return e.variance(t, x); };
    }
    return s;
}

FeedbackStrategy model3_strategy(const Model3Solution& solution) {
    FeedbackStrategy s;
    s.label = "model3";
    s.gain = [k1 = solution.k1](double t) {
        const double v = k1(t);
        return Vector{{v, 1.0 - v}};
    };
    s.intercept = [k2 = solution.k2](double t) {
        const double v = k2(t);
        return Vector{{v, -v}};
    };
    s.mean = [m = solution.moments](double t, double x) { return m.mean(t, x); };
    s.variance = [m = solution.moments](double t, double x) { return m.variance(t, x); };
    return s;
}

std::uint64_t path_stream_seed(std::uint64_t seed, std::uint64_t path) {
    // splitmix64 finalizer applied to a mix of both keys
    auto mix = [](std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    };
    return mix(seed ^ mix(path + 0x632be59bd9b4e019ULL));
}

namespace {

// Per-step coefficients of dX = (a X + b) dt + (G X + H) . dW for one strategy.
struct StepTables {
    std::vector<double> a, b;
    std::vector<Vector> G, H;
    std::vector<Vector> gain, intercept;
};

StepTables tabulate(const MarketParams& params, const FeedbackStrategy& s, const SimConfig& cfg) {
    const std::size_t steps = cfg.n_time_steps;
    const double dt = cfg.horizon / static_cast<double>(steps);
    StepTables tab;
    tab.a.resize(steps + 1);
    tab.b.resize(steps + 1);
    tab.G.resize(steps + 1);
    tab.H.resize(steps + 1);
    tab.gain.resize(steps + 1);
    tab.intercept.resize(steps + 1);
    const Eigen::Index n = params.alpha.size();
    for (std::size_t i = 0; i <= steps; ++i) {
        const double t = i == steps ? cfg.horizon : dt * static_cast<double>(i);
        Vector g = s.gain(t);
        Vector c = s.intercept(t);
        if (g.size() != n || c.size() != n)
            throw ValidationError("strategy '" + s.label + "' has the wrong number of stocks");
        tab.a[i] = params.r * (1.0 - g.sum()) + params.alpha.dot(g);
        tab.b[i] = -params.r * c.sum() + params.alpha.dot(c);
        tab.G[i] = params.sigma.transpose() * g;
        tab.H[i] = params.sigma.transpose() * c;
        tab.gain[i] = std::move(g);
        tab.intercept[i] = std::move(c);
    }
    return tab;
}

struct Sample {
    double m = 0.0, var = 0.0, m3 = 0.0, m4 = 0.0;
    std::size_t n = 0;
};

Sample central_moments(std::span<const double> xs) {
    Sample s;
    double sum = 0.0;
    for (double x : xs)
        if (std::isfinite(x)) {
            sum += x;
            ++s.n;
        }
    if (s.n == 0) return s;
    s.m = sum / static_cast<double>(s.n);
    double m2 = 0.0, m3 = 0.0, m4 = 0.0;
    for (double x : xs) {
        if (!std::isfinite(x)) continue;
        const double d = x - s.m;
        const double d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    const double n = static_cast<double>(s.n);
    s.var = s.n > 1 ? m2 / (n - 1.0) : 0.0;
    s.m3 = m3 / n;
    s.m4 = m4 / n;
    return s;
}

struct RunOutput {
    std::vector<SimulationReport> reports;
    std::vector<std::vector<Vector>> prices;  ///< stored paths only
};

RunOutput run(const MarketParams& params, std::span<const FeedbackStrategy> strategies,
              const SimConfig& cfg, double gamma) {
    params.validate();
    cfg.validate();
    if (strategies.empty()) throw ValidationError("no strategy to simulate");
    const std::size_t n_strat = strategies.size();
    const std::size_t steps = cfg.n_time_steps;
    const std::size_t d = params.n_factors();
    const std::size_t n_stocks = params.n_stocks();
    const double dt = cfg.horizon / static_cast<double>(steps);
    const double sqrt_dt = std::sqrt(dt);

    std::vector<StepTables> tables;
    tables.reserve(n_strat);
    for (const auto& s : strategies) tables.push_back(tabulate(params, s, cfg));

    // terminal[m * n_paths + p]
    std::vector<double> terminal(n_strat * cfg.n_paths);
    const std::size_t stored = std::min(cfg.stored_paths, cfg.n_paths);
    std::vector<std::vector<PathRecord>> records(n_strat, std::vector<PathRecord>(stored));
    std::vector<std::vector<Vector>> prices(stored);

    // Price log-drift per stock for the recorded price paths.
    Vector log_drift(static_cast<Eigen::Index>(n_stocks));
    for (Eigen::Index i = 0; i < log_drift.size(); ++i)
        log_drift[i] = params.alpha[i] - 0.5 * params.sigma.row(i).squaredNorm();

    auto simulate_range = [&](std::size_t begin, std::size_t end) {
        std::vector<double> x(n_strat);
        Vector dW(static_cast<Eigen::Index>(d));
        for (std::size_t p = begin; p < end; ++p) {
            std::mt19937_64 engine(path_stream_seed(cfg.seed, p));
            std::normal_distribution<double> normal(0.0, 1.0);
            std::fill(x.begin(), x.end(), cfg.x0);
            const bool record = p < stored;
            Vector log_s(static_cast<Eigen::Index>(n_stocks));
            if (record) {
                for (Eigen::Index i = 0; i < log_s.size(); ++i)
                    log_s[i] = std::log(params.initial_price(static_cast<std::size_t>(i)));
                prices[p].push_back(log_s.array().exp().matrix());
                for (std::size_t m = 0; m < n_strat; ++m) {
                    records[m][p].wealth.push_back(x[m]);
                    records[m][p].dollars.push_back(tables[m].gain[0] * x[m] +
                                                    tables[m].intercept[0]);
                }
            }
            for (std::size_t s = 0; s < steps; ++s) {
                for (std::size_t f = 0; f < d; ++f)
                    dW[static_cast<Eigen::Index>(f)] = sqrt_dt * normal(engine);
                for (std::size_t m = 0; m < n_strat; ++m) {
                    const StepTables& tab = tables[m];
                    const double xm = x[m];
                    x[m] = xm + (tab.a[s] * xm + tab.b[s]) * dt + (tab.G[s] * xm + tab.H[s]).dot(dW);
                }
                if (record) {
                    log_s += log_drift * dt + params.sigma * dW;
                    prices[p].push_back(log_s.array().exp().matrix());
                    for (std::size_t m = 0; m < n_strat; ++m) {
                        records[m][p].wealth.push_back(x[m]);
                        records[m][p].dollars.push_back(tables[m].gain[s + 1] * x[m] +
                                                        tables[m].intercept[s + 1]);
                    }
                }
            }
            for (std::size_t m = 0; m < n_strat; ++m) terminal[m * cfg.n_paths + p] = x[m];
        }
    };

    const std::size_t threads =
        std::max<std::size_t>(1, std::min(cfg.threads, cfg.n_paths));
    if (threads == 1) {
        simulate_range(0, cfg.n_paths);
    } else {
        std::vector<std::thread> pool;
        const std::size_t chunk = (cfg.n_paths + threads - 1) / threads;
        for (std::size_t w = 0; w < threads; ++w) {
            const std::size_t begin = w * chunk;
            const std::size_t end = std::min(cfg.n_paths, begin + chunk);
            if (begin < end) pool.emplace_back(simulate_range, begin, end);
        }
        for (auto& t : pool) t.join();
    }

    RunOutput out;
    out.prices = std::move(prices);
    for (std::size_t m = 0; m < n_strat; ++m) {
        const std::span<const double> xs(terminal.data() + m * cfg.n_paths, cfg.n_paths);
        const Sample s = central_moments(xs);
        SimulationReport r;
        r.label = strategies[m].label;
        r.paths_used = s.n;
        r.paths_exploded = cfg.n_paths - s.n;
        if (static_cast<double>(r.paths_exploded) > 1e-3 * static_cast<double>(cfg.n_paths)) {
            std::ostringstream msg;
            msg << "strategy '" << r.label << "': " << r.paths_exploded << " of " << cfg.n_paths
                << " paths produced non-finite wealth";
            throw SimulationExplosionError(msg.str(), r.paths_exploded);
        }
        const double n = static_cast<double>(s.n);
        const double var_sq = s.var * s.var;
        r.mean_estimate = s.m;
        r.variance_estimate = s.var;
        r.reward_estimate = s.m - 0.5 * gamma * s.var;
        r.mean_se = std::sqrt(s.var / n);
        r.variance_se = std::sqrt(std::max(0.0, s.m4 - var_sq * (n - 3.0) / (n - 1.0)) / n);
        r.reward_se = std::sqrt(
            std::max(0.0, s.var - gamma * s.m3 + 0.25 * gamma * gamma * (s.m4 - var_sq)) / n);
        r.paths = std::move(records[m]);
        out.reports.push_back(std::move(r));
    }
    return out;
}

}  // namespace

std::vector<SimulationReport> simulate(const MarketParams& params,
                                       std::span<const FeedbackStrategy> strategies,
                                       const SimConfig& cfg, double gamma) {
    return run(params, strategies, cfg, gamma).reports;
}

SimulationReport simulate(const MarketParams& params, const FeedbackStrategy& strategy,
                          const SimConfig& cfg, double gamma) {
    return std::move(simulate(params, std::span<const FeedbackStrategy>(&strategy, 1), cfg, gamma)
                         .front());
}

FigurePaths reproduce_figure_paths(const MarketParams& params,
                                   std::span<const FeedbackStrategy> strategies, SimConfig cfg,
                                   double gamma) {
    cfg.n_paths = 1;
    cfg.stored_paths = 1;
    cfg.threads = 1;
    RunOutput run_out = run(params, strategies, cfg, gamma);

    FigurePaths fig;
    const double dt = cfg.horizon / static_cast<double>(cfg.n_time_steps);
    for (std::size_t s = 0; s <= cfg.n_time_steps; ++s)
        fig.times.push_back(s == cfg.n_time_steps ? cfg.horizon : dt * static_cast<double>(s));
    fig.prices = std::move(run_out.prices.front());
    for (std::size_t m = 0; m < strategies.size(); ++m) {
        PathRecord& rec = run_out.reports[m].paths.front();
        FigurePaths::Series series;
        series.label = strategies[m].label;
        if (strategies[m].mean && strategies[m].variance) {
            for (std::size_t s = 0; s < fig.times.size(); ++s) {
                const double mu = strategies[m].mean(fig.times[s], rec.wealth[s]);
                const double var = strategies[m].variance(fig.times[s], rec.wealth[s]);
                series.cond_mean.push_back(mu);
                series.cond_variance.push_back(var);
                series.reward.push_back(mu - 0.5 * gamma * var);
            }
        }
        series.wealth = std::move(rec.wealth);
        series.dollars = std::move(rec.dollars);
        fig.series.push_back(std::move(series));
    }
    return fig;
}

}  // namespace tcmv
