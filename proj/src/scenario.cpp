#include "tcmv/scenario.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <istream>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include "tcmv/csv_format.hpp"
#include "tcmv/gain_equation.hpp"
#include "tcmv/model1.hpp"
#include "tcmv/model2.hpp"
#include "tcmv/model3.hpp"

namespace tcmv {

namespace {

const std::set<std::string> kTableNames{"k_curves",      "allocation_vs_wealth",
                                        "mean_variance_vs_wealth", "simulated_paths",
                                        "mc_summary",    "diagnostics",
                                        "bounds"};

const std::map<std::string, std::set<std::string>> kSectionKeys{
    {"market", {"alpha", "sigma", "rho", "r", "s0"}},
    {"objective", {"gamma", "T"}},
    {"solver", {"n_steps", "steps_per_year", "tol", "max_iter", "initial_value"}},
    {"simulation", {"n_paths", "n_time_steps", "steps_per_year", "seed", "x0"}},
    {"outputs",
     {"models", "tables", "directory", "wealth_min", "wealth_max", "wealth_points", "bound_rows"}},
};

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_items(std::string_view s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == ',' || c == ' ' || c == '\t') {
            if (!cur.empty()) out.push_back(std::move(cur));
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    if (!cur.empty()) out.push_back(std::move(cur));
    return out;
}

struct Entry {
    std::string value;
    std::size_t line = 0;
};

class EntryReader {
public:
    explicit EntryReader(std::map<std::string, Entry> entries) : entries_(std::move(entries)) {}

    const Entry* find(const std::string& key) const {
        auto it = entries_.find(key);
        return it == entries_.end() ? nullptr : &it->second;
    }

    const Entry& require(const std::string& key) const {
        const Entry* e = find(key);
        if (!e) throw ConfigError("missing required key " + key);
        return *e;
    }

    static double number(const std::string& token, std::size_t line) {
        double v = 0.0;
        const char* first = token.data();
        const char* last = first + token.size();
        if (!token.empty() && *first == '+') ++first;
        const auto [ptr, ec] = std::from_chars(first, last, v);
        if (ec != std::errc() || ptr != last || !std::isfinite(v))
            throw ConfigError("'" + token + "' is not a finite number", line);
        return v;
    }

    static double scalar(const Entry& e) {
        const auto items = split_items(e.value);
        if (items.size() != 1) throw ConfigError("expected a single number", e.line);
        return number(items.front(), e.line);
    }

    static std::uint64_t count(const Entry& e) {
        const auto items = split_items(e.value);
        if (items.size() != 1) throw ConfigError("expected a single integer", e.line);
        const std::string& tok = items.front();
        std::uint64_t v = 0;
        const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
        if (ec != std::errc() || ptr != tok.data() + tok.size())
            throw ConfigError("'" + tok + "' is not a nonnegative integer", e.line);
        return v;
    }

    static std::vector<double> list(const Entry& e) {
        std::vector<double> out;
        for (const auto& tok : split_items(e.value)) out.push_back(number(tok, e.line));
        if (out.empty()) throw ConfigError("expected at least one number", e.line);
        return out;
    }

    static Matrix matrix(const Entry& e) {
        std::vector<std::vector<double>> rows;
        std::string_view rest = e.value;
        while (true) {
            const auto semi = rest.find(';');
            const std::string row_text(rest.substr(0, semi));
            std::vector<double> row;
            for (const auto& tok : split_items(row_text)) row.push_back(number(tok, e.line));
            if (row.empty()) throw ConfigError("empty matrix row", e.line);
            if (!rows.empty() && row.size() != rows.front().size())
                throw ConfigError("matrix rows have different lengths", e.line);
            rows.push_back(std::move(row));
            if (semi == std::string_view::npos) break;
            rest = rest.substr(semi + 1);
        }
        Matrix m(static_cast<Eigen::Index>(rows.size()),
                 static_cast<Eigen::Index>(rows.front().size()));
        for (std::size_t i = 0; i < rows.size(); ++i)
            for (std::size_t j = 0; j < rows[i].size(); ++j)
                m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
        return m;
    }

    static Vector vector(const Entry& e) {
        const auto v = list(e);
        return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
    }

private:
    std::map<std::string, Entry> entries_;
};

std::size_t positive_count(const Entry& e, const char* what) {
    const auto v = EntryReader::count(e);
    if (v < 1) throw ConfigError(std::string(what) + " must be at least 1", e.line);
    return static_cast<std::size_t>(v);
}

double positive(const Entry& e, const char* what) {
    const double v = EntryReader::scalar(e);
    if (!(v > 0.0)) throw ConfigError(std::string(what) + " must be positive", e.line);
    return v;
}

}  // namespace

ScenarioConfig parse_scenario(std::istream& in) {
    std::map<std::string, Entry> entries;
    std::string section;
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const auto hash = raw.find('#');
        const std::string line = trim(std::string_view(raw).substr(0, hash));
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError("unterminated section header", line_no);
            section = trim(std::string_view(line).substr(1, line.size() - 2));
            if (!kSectionKeys.count(section))
                throw ConfigError("unknown section [" + section + "]", line_no);
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError("expected 'key = value'", line_no);
        if (section.empty()) throw ConfigError("key outside of any section", line_no);
        const std::string key = trim(std::string_view(line).substr(0, eq));
        const std::string value = trim(std::string_view(line).substr(eq + 1));
        if (!kSectionKeys.at(section).count(key))
            throw ConfigError("unknown key '" + key + "' in [" + section + "]", line_no);
        if (value.empty()) throw ConfigError("empty value for '" + key + "'", line_no);
        const std::string full = section + "." + key;
        if (entries.count(full)) throw ConfigError("duplicate key '" + key + "'", line_no);
        entries.emplace(full, Entry{value, line_no});
    }

    const EntryReader rd(std::move(entries));
    ScenarioConfig cfg;

    cfg.market.alpha = EntryReader::vector(rd.require("market.alpha"));
    const Entry& sigma = rd.require("market.sigma");
    cfg.market.sigma = EntryReader::matrix(sigma);
    if (cfg.market.sigma.rows() != cfg.market.alpha.size())
        throw ConfigError("sigma must have one row per entry of alpha", sigma.line);
    if (const Entry* e = rd.find("market.r")) cfg.market.r = EntryReader::scalar(*e);
    if (const Entry* e = rd.find("market.s0")) {
        cfg.market.s0 = EntryReader::vector(*e);
        if (cfg.market.s0.size() != cfg.market.alpha.size())
            throw ConfigError("s0 must have one entry per stock", e->line);
    }
    if (const Entry* e = rd.find("market.rho")) {
        cfg.rho = CorrelationSpec{EntryReader::matrix(*e)};
        if (cfg.rho->rho.rows() != cfg.market.sigma.cols() ||
            cfg.rho->rho.cols() != cfg.market.sigma.cols())
            throw ConfigError("rho must be square with one row per column of sigma", e->line);
    }

    const Entry& gammas = rd.require("objective.gamma");
    cfg.gammas = EntryReader::list(gammas);
    for (double g : cfg.gammas)
        if (!(g > 0.0)) throw ConfigError("gamma must be positive", gammas.line);
    const Entry& horizons = rd.require("objective.T");
    cfg.horizons = EntryReader::list(horizons);
    for (double t : cfg.horizons)
        if (!(t >= 0.0)) throw ConfigError("T must be nonnegative", horizons.line);

    if (const Entry* e = rd.find("solver.n_steps")) {
        const auto n = EntryReader::count(*e);
        if (n < 2) throw ConfigError("n_steps must be at least 2", e->line);
        cfg.n_steps = static_cast<std::size_t>(n);
    }
    if (const Entry* e = rd.find("solver.steps_per_year"))
        cfg.steps_per_year = positive(*e, "steps_per_year");
    if (const Entry* e = rd.find("solver.tol")) cfg.picard.tol = positive(*e, "tol");
    if (const Entry* e = rd.find("solver.max_iter"))
        cfg.picard.max_iter = positive_count(*e, "max_iter");
    if (const Entry* e = rd.find("solver.initial_value"))
        cfg.picard.initial_value = EntryReader::scalar(*e);

    if (const Entry* e = rd.find("simulation.n_paths")) cfg.n_paths = positive_count(*e, "n_paths");
    if (const Entry* e = rd.find("simulation.n_time_steps"))
        cfg.n_time_steps = positive_count(*e, "n_time_steps");
    if (const Entry* e = rd.find("simulation.steps_per_year"))
        cfg.sim_steps_per_year = positive(*e, "steps_per_year");
    if (const Entry* e = rd.find("simulation.seed")) cfg.seed = EntryReader::count(*e);
    if (const Entry* e = rd.find("simulation.x0")) cfg.x0 = EntryReader::scalar(*e);

    if (const Entry* e = rd.find("outputs.models")) {
        cfg.models.clear();
        for (const auto& tok : split_items(e->value)) {
            if (tok != "1" && tok != "2" && tok != "3")
                throw ConfigError("models must be chosen from 1, 2, 3", e->line);
            cfg.models.insert(tok.front() - '0');
        }
        if (cfg.models.empty()) throw ConfigError("at least one model must be selected", e->line);
    }
    if (const Entry* e = rd.find("outputs.tables")) {
        for (const auto& tok : split_items(e->value)) {
            if (!kTableNames.count(tok)) throw ConfigError("unknown table '" + tok + "'", e->line);
            cfg.tables.insert(tok);
        }
    }
    if (const Entry* e = rd.find("outputs.directory")) cfg.directory = e->value;
    if (const Entry* e = rd.find("outputs.wealth_min")) cfg.wealth_min = EntryReader::scalar(*e);
    if (const Entry* e = rd.find("outputs.wealth_max")) cfg.wealth_max = EntryReader::scalar(*e);
    if (const Entry* e = rd.find("outputs.wealth_points")) {
        cfg.wealth_points = positive_count(*e, "wealth_points");
        if (cfg.wealth_points < 2) throw ConfigError("wealth_points must be at least 2", e->line);
    }
    if (!(cfg.wealth_min < cfg.wealth_max))
        throw ConfigError("wealth_min must be below wealth_max");
    if (const Entry* e = rd.find("outputs.bound_rows"))
        cfg.bound_rows = positive_count(*e, "bound_rows");
    return cfg;
}

ScenarioConfig load_scenario(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file " + path.string());
    return parse_scenario(in);
}

MarketParams ScenarioConfig::effective_market() const {
    MarketParams out = market;
    out.validate();
    if (rho) {
        rho->validate();
        out.sigma = decorrelate(market.sigma, *rho);
    }
    return out;
}

TimeGrid ScenarioConfig::solver_grid(double horizon) const {
    if (n_steps) return TimeGrid(horizon, *n_steps);
    const auto n = static_cast<std::size_t>(std::ceil(steps_per_year * horizon - 1e-9));
    return TimeGrid(horizon, std::max<std::size_t>(2, n));
}

SimConfig ScenarioConfig::sim_config(double horizon) const {
    SimConfig s;
    s.n_paths = n_paths;
    s.n_time_steps =
        n_time_steps ? *n_time_steps
                     : std::max<std::size_t>(
                           1, static_cast<std::size_t>(std::ceil(sim_steps_per_year * horizon - 1e-9)));
    s.seed = seed;
    s.x0 = x0;
    s.horizon = horizon;
    return s;
}

namespace {

struct Combo {
    double gamma = 1.0;
    double horizon = 1.0;
};

struct ComboResult {
    Combo combo;
    std::optional<TimeGrid> grid;
    std::optional<Model1Solution> m1;
    std::optional<Model2Solution> m2;
    std::optional<Model2Evaluation> e2;
    std::optional<Model3Solution> m3;
    double m2_residual = 0.0, k1_residual = 0.0, k2_residual = 0.0;
    double m2_K = 0.0;
    std::vector<SimulationReport> reports;
    std::optional<FigurePaths> figure;
    std::vector<FeedbackStrategy> strategies;
};

bool two_asset_models(const ScenarioConfig& cfg) {
    return cfg.models.count(2) || cfg.models.count(3);
}

std::vector<FeedbackStrategy> strategies_of(const ComboResult& r) {
    std::vector<FeedbackStrategy> out;
    if (r.m1) out.push_back(model1_strategy(*r.m1));
    if (r.m2) out.push_back(model2_strategy(r.m2->k, r.e2));
    if (r.m3) out.push_back(model3_strategy(*r.m3));
    return out;
}

ComboResult solve_combo(const ScenarioConfig& cfg, const MarketParams& market, Combo combo,
                        Command command, std::size_t sim_threads) {
    ComboResult r;
    r.combo = combo;
    if (command == Command::Bounds && combo.horizon == 0.0) return r;

    PicardConfig picard = cfg.picard;
    picard.keep_history = command != Command::Simulate;
    const TimeGrid grid = cfg.solver_grid(combo.horizon);
    r.grid = grid;

    if (two_asset_models(cfg)) {
        const TwoAssetMarket two(market);
        const std::vector<double> start(grid.size(), picard.initial_value);
        if (cfg.models.count(2)) {
            r.m2 = solve_k_model2(market, grid, picard);
            r.e2 = evaluate_model2(market, r.m2->k, combo.gamma);
            r.m2_residual = gain_residual(two, grid, r.m2->k.values());
            r.m2_K = iteration_bound_constant(gain_lipschitz(two, picard.initial_value), grid, start,
                                              gain_map(two, grid, start));
        }
        if (cfg.models.count(3)) {
            r.m3 = solve_model3(market, combo.gamma, grid, picard);
            r.k1_residual = gain_residual(two, grid, r.m3->k1.values());
            r.k2_residual = sup_distance(intercept_map(r.m3->kernels, r.m3->k2.values()),
                                         r.m3->k2.values());
        }
    }
    if (cfg.models.count(1) && command != Command::Bounds)
        r.m1 = solve_model1(market, ObjectiveSpec{combo.gamma, combo.horizon});

    if (command == Command::Simulate) {
        const auto strategies = strategies_of(r);
        SimConfig sim = cfg.sim_config(combo.horizon);
        sim.threads = sim_threads;
        r.reports = simulate(market, strategies, sim, combo.gamma);
        r.figure = reproduce_figure_paths(market, strategies, sim, combo.gamma);
    }
    return r;
}

std::vector<ComboResult> solve_all(const ScenarioConfig& cfg, const MarketParams& market,
                                   Command command, std::size_t threads, std::ostream* log) {
    std::vector<Combo> combos;
    for (double g : cfg.gammas)
        for (double t : cfg.horizons) combos.push_back({g, t});

    std::vector<std::optional<ComboResult>> results(combos.size());
    std::vector<std::exception_ptr> errors(combos.size());
    const std::size_t workers = std::max<std::size_t>(1, std::min(threads, combos.size()));
    const std::size_t sim_threads = std::max<std::size_t>(1, threads / workers);
    std::atomic<std::size_t> next{0};
    std::mutex log_mutex;

    auto work = [&] {
        for (std::size_t i = next++; i < combos.size(); i = next++) {
            try {
                results[i] = solve_combo(cfg, market, combos[i], command, sim_threads);
                if (log) {
                    std::lock_guard lock(log_mutex);
                    *log << "solved gamma=" << format_number(combos[i].gamma)
                         << " T=" << format_number(combos[i].horizon) << '\n';
                }
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    if (workers == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);

    std::vector<ComboResult> out;
    for (auto& r : results) out.push_back(std::move(*r));
    return out;
}

std::vector<std::string> indexed(const std::string& prefix, std::size_t n) {
    std::vector<std::string> out;
    for (std::size_t i = 1; i <= n; ++i) out.push_back(prefix + std::to_string(i));
    return out;
}

std::vector<double> wealth_lattice(const ScenarioConfig& cfg) {
    std::vector<double> xs(cfg.wealth_points);
    const double step = (cfg.wealth_max - cfg.wealth_min) / static_cast<double>(cfg.wealth_points - 1);
    for (std::size_t i = 0; i < xs.size(); ++i)
        xs[i] = i + 1 == xs.size() ? cfg.wealth_max : cfg.wealth_min + step * static_cast<double>(i);
    return xs;
}

std::string k_curves(const std::vector<ComboResult>& results) {
    CsvTable table({"gamma", "T", "t", "k_model2", "k1", "k2"});
    for (const auto& r : results) {
        if (!r.grid) continue;
        for (std::size_t i = 0; i < r.grid->size(); ++i) {
            table.add_row({format_number(r.combo.gamma), format_number(r.combo.horizon),
                           format_number(r.grid->node(i)), r.m2 ? format_number(r.m2->k[i]) : "",
                           r.m3 ? format_number(r.m3->k1[i]) : "",
                           r.m3 ? format_number(r.m3->k2[i]) : ""});
        }
    }
    return table.str();
}

std::string allocation_vs_wealth(const std::vector<ComboResult>& results, std::size_t n_stocks,
                                 const std::vector<double>& xs) {
    std::vector<std::string> header{"gamma", "T", "model", "x"};
    for (auto& h : indexed("u", n_stocks)) header.push_back(h);
    header.push_back("bank");
    for (auto& h : indexed("p", n_stocks)) header.push_back(h);
    CsvTable table(header);

    for (const auto& r : results) {
        for (const auto& s : strategies_of(r)) {
            const Vector gain = s.gain(0.0);
            const Vector icpt = s.intercept(0.0);
            for (double x : xs) {
                const Vector u = gain * x + icpt;
                std::vector<std::string> row{format_number(r.combo.gamma),
                                             format_number(r.combo.horizon), s.label,
                                             format_number(x)};
                for (Eigen::Index i = 0; i < u.size(); ++i) row.push_back(format_number(u[i]));
                row.push_back(format_number(x - u.sum()));
                for (Eigen::Index i = 0; i < u.size(); ++i) row.push_back(format_number(u[i] / x));
                table.add_row(std::move(row));
            }
        }
    }
    return table.str();
}

double model_value(const ComboResult& r, const std::string& label, double x) {
    if (label == "model1") return r.m1->value(0.0, x);
    if (label == "model2") return r.e2->value(0.0, x);
    return r.m3->moments.value_at(0, x);
}

std::string mean_variance_vs_wealth(const std::vector<ComboResult>& results,
                                    const std::vector<double>& xs) {
    CsvTable table({"gamma", "T", "model", "x", "mean", "variance", "reward", "value"});
    for (const auto& r : results) {
        for (const auto& s : strategies_of(r)) {
            for (double x : xs) {
                const double mean = s.mean(0.0, x);
                const double var = s.variance(0.0, x);
                table.add_row({format_number(r.combo.gamma), format_number(r.combo.horizon),
                               s.label, format_number(x), format_number(mean), format_number(var),
                               format_number(mean - 0.5 * r.combo.gamma * var),
                               format_number(model_value(r, s.label, x))});
            }
        }
    }
    return table.str();
}

std::string simulated_paths(const std::vector<ComboResult>& results, std::size_t n_stocks) {
    std::vector<std::string> header{"gamma", "T", "model", "t"};
    for (auto& h : indexed("S", n_stocks)) header.push_back(h);
    header.push_back("wealth");
    for (auto& h : indexed("u", n_stocks)) header.push_back(h);
    header.push_back("bank");
    for (auto& h : indexed("p", n_stocks)) header.push_back(h);
    for (const char* h : {"cond_mean", "cond_variance", "reward"}) header.push_back(h);
    CsvTable table(header);

    for (const auto& r : results) {
        if (!r.figure) continue;
        const FigurePaths& fig = *r.figure;
        for (const auto& series : fig.series) {
            for (std::size_t s = 0; s < fig.times.size(); ++s) {
                const double x = series.wealth[s];
                const Vector& u = series.dollars[s];
                std::vector<std::string> row{format_number(r.combo.gamma),
                                             format_number(r.combo.horizon), series.label,
                                             format_number(fig.times[s])};
                for (Eigen::Index i = 0; i < fig.prices[s].size(); ++i)
                    row.push_back(format_number(fig.prices[s][i]));
                row.push_back(format_number(x));
                for (Eigen::Index i = 0; i < u.size(); ++i) row.push_back(format_number(u[i]));
                row.push_back(format_number(x - u.sum()));
                for (Eigen::Index i = 0; i < u.size(); ++i) row.push_back(format_number(u[i] / x));
                const bool analytic = !series.cond_mean.empty();
                row.push_back(analytic ? format_number(series.cond_mean[s]) : "");
                row.push_back(analytic ? format_number(series.cond_variance[s]) : "");
                row.push_back(analytic ? format_number(series.reward[s]) : "");
                table.add_row(std::move(row));
            }
        }
    }
    return table.str();
}

std::string mc_summary(const std::vector<ComboResult>& results, const ScenarioConfig& cfg) {
    CsvTable table({"gamma", "T", "model", "paths", "steps", "x0", "mean", "mean_se",
                    "analytic_mean", "variance", "variance_se", "analytic_variance", "reward",
                    "reward_se", "analytic_reward", "exploded"});
    for (const auto& r : results) {
        const auto strategies = strategies_of(r);
        const SimConfig sim = cfg.sim_config(r.combo.horizon);
        for (std::size_t m = 0; m < r.reports.size(); ++m) {
            const SimulationReport& rep = r.reports[m];
            const double mean = strategies[m].mean(0.0, cfg.x0);
            const double var = strategies[m].variance(0.0, cfg.x0);
            table.add_row({format_number(r.combo.gamma), format_number(r.combo.horizon), rep.label,
                           std::to_string(rep.paths_used), std::to_string(sim.n_time_steps),
                           format_number(cfg.x0), format_number(rep.mean_estimate),
                           format_number(rep.mean_se), format_number(mean),
                           format_number(rep.variance_estimate), format_number(rep.variance_se),
                           format_number(var), format_number(rep.reward_estimate),
                           format_number(rep.reward_se),
                           format_number(mean - 0.5 * r.combo.gamma * var),
                           std::to_string(rep.paths_exploded)});
        }
    }
    return table.str();
}

std::string combo_title(const Combo& c) {
    return "gamma = " + format_number(c.gamma) + ", T = " + format_number(c.horizon);
}

std::string bounds_text(const std::vector<ComboResult>& results, const ScenarioConfig& cfg) {
    std::ostringstream out;
    for (const auto& r : results) {
        const std::string title = combo_title(r.combo);
        if (!r.grid) {
            std::vector<BoundRow> rows;
            for (std::size_t n = 1; n <= cfg.bound_rows; ++n) rows.push_back({n, 0.0, 0.0});
            out << format_bound_table(rows, title + ": zero horizon") << '\n';
            continue;
        }
        const double T = r.grid->horizon();
        if (r.m2) {
            const auto rows = bound_table(r.m2->history, r.m2->k.values(), r.m2_K, T, cfg.bound_rows);
            out << format_bound_table(rows, title + ", model 2 gain k, K = " + format_number(r.m2_K))
                << '\n';
        }
        if (r.m3) {
            const auto k1 = bound_table(r.m3->k1_history, r.m3->k1.values(), r.m3->k1_bound_K, T,
                                        cfg.bound_rows);
            out << format_bound_table(k1, title + ", model 3 gain k1, K = " +
                                              format_number(r.m3->k1_bound_K))
                << '\n';
            const auto k2 = bound_table(r.m3->k2_history, r.m3->k2.values(), r.m3->k2_bound_K, T,
                                        cfg.bound_rows);
            out << format_bound_table(k2, title + ", model 3 intercept k2, K = " +
                                              format_number(r.m3->k2_bound_K))
                << '\n';
        }
    }
    return out.str();
}

std::string diagnostics_text(const std::vector<ComboResult>& results, const MarketParams& market,
                             const ScenarioConfig& cfg) {
    std::ostringstream out;
    out << "alpha:";
    for (Eigen::Index i = 0; i < market.alpha.size(); ++i) out << ' ' << format_number(market.alpha[i]);
    out << "\nsigma (independent drivers):";
    for (Eigen::Index i = 0; i < market.sigma.rows(); ++i) {
        out << (i ? " ;" : "");
        for (Eigen::Index j = 0; j < market.sigma.cols(); ++j)
            out << ' ' << format_number(market.sigma(i, j));
    }
    out << "\nr: " << format_number(market.r) << '\n';
    if (two_asset_models(cfg)) {
        const TwoAssetMarket two(market);
        out << "lambda: " << format_number(two.lambda()) << "\nspread: " << format_number(two.spread())
            << "\ncross: " << format_number(two.cross()) << "\ngain bounds: ["
            << format_number(two.gain_lower_bound()) << ", " << format_number(two.gain_upper_bound())
            << "]\n";
    }
    out << "picard tol: " << format_number(cfg.picard.tol)
        << ", max_iter: " << cfg.picard.max_iter
        << ", initial value: " << format_number(cfg.picard.initial_value) << "\n\n";

    for (const auto& r : results) {
        out << "[" << combo_title(r.combo) << ", " << r.grid->n_steps() << " steps]\n";
        if (r.m1) {
            out << "model 1: theta^2 = " << format_number(r.m1->theta_sq()) << ", u(0) =";
            const Vector u = r.m1->control(0.0);
            for (Eigen::Index i = 0; i < u.size(); ++i) out << ' ' << format_number(u[i]);
            out << '\n';
        }
        if (r.m2) {
            out << "model 2 k: iterations = " << r.m2->iterations
                << ", last delta = " << format_number(r.m2->final_delta)
                << ", residual = " << format_number(r.m2_residual)
                << ", k(0) = " << format_number(r.m2->k.front()) << ", K = " << format_number(r.m2_K)
                << '\n';
        }
        if (r.m3) {
            out << "model 3 k1: iterations = " << r.m3->k1_iterations
                << ", last delta = " << format_number(r.m3->k1_delta)
                << ", residual = " << format_number(r.k1_residual)
                << ", k1(0) = " << format_number(r.m3->k1.front())
                << ", K = " << format_number(r.m3->k1_bound_K) << '\n';
            out << "model 3 k2: iterations = " << r.m3->k2_iterations
                << ", last delta = " << format_number(r.m3->k2_delta)
                << ", residual = " << format_number(r.k2_residual)
                << ", k2(0) = " << format_number(r.m3->k2.front())
                << ", K = " << format_number(r.m3->k2_bound_K)
                << ", M3 = " << format_number(r.m3->kernels.M3()) << '\n';
        }
        out << '\n';
    }
    out << bounds_text(results, cfg);
    return out.str();
}

bool wanted(const ScenarioConfig& cfg, const std::string& table) {
    return cfg.tables.empty() || cfg.tables.count(table);
}

}  // namespace

ScenarioOutput run_scenario(const ScenarioConfig& config, Command command,
                            const RunOptions& options, std::ostream* log) {
    if (config.models.empty()) throw ConfigError("at least one model must be selected");
    if (command == Command::Bounds && !two_asset_models(config))
        throw ConfigError("the bound table needs model 2 or model 3");
    if (command != Command::Bounds)
        for (double t : config.horizons)
            if (!(t > 0.0)) throw ConfigError("T must be positive to solve or simulate");

    const MarketParams market = config.effective_market();
    if (two_asset_models(config)) TwoAssetMarket{market};

    const auto results = solve_all(config, market, command, options.threads, log);
    const std::size_t n_stocks = market.n_stocks();

    ScenarioOutput out;
    std::ostringstream console;
    switch (command) {
        case Command::Solve: {
            const auto xs = wealth_lattice(config);
            if (two_asset_models(config) && wanted(config, "k_curves"))
                out.files["k_curves.csv"] = k_curves(results);
            if (wanted(config, "allocation_vs_wealth"))
                out.files["allocation_vs_wealth.csv"] = allocation_vs_wealth(results, n_stocks, xs);
            if (wanted(config, "mean_variance_vs_wealth"))
                out.files["mean_variance_vs_wealth.csv"] = mean_variance_vs_wealth(results, xs);
            if (wanted(config, "diagnostics"))
                out.files["diagnostics.txt"] = diagnostics_text(results, market, config);
            for (const auto& r : results) {
                console << combo_title(r.combo) << ':';
                if (r.m1) console << " model1 u1(0) = " << format_number(r.m1->control(0.0)[0]);
                if (r.m2) console << " k(0) = " << format_number(r.m2->k.front());
                if (r.m3)
                    console << " k1(0) = " << format_number(r.m3->k1.front())
                            << " k2(0) = " << format_number(r.m3->k2.front());
                console << '\n';
            }
            break;
        }
        case Command::Simulate: {
            const std::string summary = mc_summary(results, config);
            if (wanted(config, "mc_summary")) out.files["mc_summary.csv"] = summary;
            if (wanted(config, "simulated_paths"))
                out.files["simulated_paths.csv"] = simulated_paths(results, n_stocks);
            console << summary;
            break;
        }
        case Command::Bounds: {
            const std::string text = bounds_text(results, config);
            if (wanted(config, "bounds")) out.files["bounds.txt"] = text;
            console << text;
            break;
        }
    }
    out.console = console.str();
    return out;
}

void write_outputs(const ScenarioOutput& output, const std::filesystem::path& dir) {
    namespace fs = std::filesystem;
    std::vector<fs::path> written;
    try {
        fs::create_directories(dir);
        for (const auto& [name, content] : output.files) {
            const fs::path path = dir / name;
            std::ofstream f(path, std::ios::binary | std::ios::trunc);
            written.push_back(path);
            if (!f) throw Error("cannot open " + path.string() + " for writing");
            f << content;
            f.close();
            if (!f) throw Error("failed writing " + path.string());
        }
    } catch (...) {
        std::error_code ec;
        for (const auto& p : written) fs::remove(p, ec);
        throw;
    }
}

int exit_code_for(const std::exception& e) noexcept {
    if (dynamic_cast<const ConfigError*>(&e)) return 2;
    if (dynamic_cast<const ValidationError*>(&e)) return 3;
    if (dynamic_cast<const NonConvergenceError*>(&e)) return 4;
    if (dynamic_cast<const SimulationExplosionError*>(&e)) return 5;
    return 1;
}

std::filesystem::path resolve_output_dir(const ScenarioConfig& config, const RunOptions& options) {
    if (options.out_dir) return *options.out_dir;
    if (!config.directory.empty()) return config.directory;
    if (const char* env = std::getenv("TCMV_OUT_DIR"); env && *env) return env;
    return "tcmv_output";
}

int run_scenario_file(const std::filesystem::path& config_path, Command command,
                      const RunOptions& options, std::ostream& out, std::ostream& err) {
    try {
        const ScenarioConfig config = load_scenario(config_path);
        const ScenarioOutput output =
            run_scenario(config, command, options, options.verbose ? &err : nullptr);
        const auto dir = resolve_output_dir(config, options);
        write_outputs(output, dir);
        out << output.console;
        if (options.verbose)
            for (const auto& [name, content] : output.files) err << "wrote " << (dir / name).string() << '\n';
        return 0;
    } catch (const NonConvergenceError& e) {
        err << "error: " << e.what() << " (after " << e.iterations()
            << " iterations, last delta " << format_number(e.last_delta()) << ")\n";
        return exit_code_for(e);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return exit_code_for(e);
    }
}

}  // namespace tcmv
