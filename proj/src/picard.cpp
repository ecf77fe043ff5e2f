#include "tcmv/picard.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "tcmv/error.hpp"

namespace tcmv {

void PicardConfig::validate() const {
    if (!(tol > 0.0)) throw DomainError("Picard tolerance must be positive");
    if (max_iter < 1) throw DomainError("Picard iteration cap must be at least 1");
    if (!std::isfinite(initial_value)) throw DomainError("Picard initial value must be finite");
}

PicardResult picard_solve(const TimeGrid& grid, const PicardMap& map, const PicardConfig& cfg,
                          const std::string& label) {
    cfg.validate();
    std::vector<double> current(grid.size(), cfg.initial_value);
    std::vector<std::vector<double>> history;
    if (cfg.keep_history) history.push_back(current);

    double delta = 0.0;
    for (std::size_t n = 1; n <= cfg.max_iter; ++n) {
        std::vector<double> next = map(current);
        if (next.size() != current.size())
            throw ValidationError(label + ": map changed the number of nodes");
        for (double v : next) {
            if (!std::isfinite(v)) {
                throw NonConvergenceError(label + ": iterate " + std::to_string(n) +
                                              " is not finite",
                                          n, delta);
            }
        }
        delta = sup_distance(next, current);
        current = std::move(next);
        if (cfg.keep_history) history.push_back(current);
        if (delta < cfg.tol) {
            return PicardResult{SampledFunction(grid, std::move(current)), n, delta,
                                std::move(history)};
        }
    }
    std::ostringstream msg;
    msg << label << ": no convergence after " << cfg.max_iter << " iterations (last delta "
        << delta << ", tol " << cfg.tol << ")";
    throw NonConvergenceError(msg.str(), cfg.max_iter, delta);
}

double convergence_bound(double K, double horizon, std::size_t n) {
    if (!(K > 0.0) || !std::isfinite(K)) throw DomainError("convergence bound needs K > 0");
    if (!(horizon >= 0.0)) throw DomainError("convergence bound needs horizon >= 0");
    if (n < 1) throw DomainError("convergence bound is stated for n >= 1");
    if (horizon == 0.0) return 0.0;

    const double x = K * horizon;
    // First term K^{n+1} h^n / n! in log space, then the ratio x / (i + 1).
    double term =
        std::exp((static_cast<double>(n) + 1.0) * std::log(K) +
                 static_cast<double>(n) * std::log(horizon) - std::lgamma(static_cast<double>(n) + 1.0));
    double sum = 0.0;
    for (std::size_t i = n;; ++i) {
        sum += term;
        const double ratio = x / (static_cast<double>(i) + 1.0);
        term *= ratio;
        if (ratio < 1.0 && term <= 1e-16 * sum) break;
        if (!std::isfinite(sum)) break;
    }
    return sum;
}

ConvergenceBound make_convergence_bound(double K, double horizon, std::size_t n) {
    return {K, horizon, n, convergence_bound(K, horizon, n)};
}

std::vector<BoundRow> bound_table(std::span<const std::vector<double>> history,
                                  std::span<const double> solution, double K, double horizon,
                                  std::size_t n_max) {
    std::vector<BoundRow> rows;
    for (std::size_t n = 1; n <= n_max; ++n) {
        BoundRow row;
        row.n = n;
        // Iterates past the stopping point are the converged solution itself.
        row.empirical = n < history.size() ? sup_distance(history[n], solution) : 0.0;
        row.bound = convergence_bound(K, horizon, n);
        rows.push_back(row);
    }
    return rows;
}

std::string format_bound_table(std::span<const BoundRow> rows, const std::string& title) {
    std::ostringstream out;
    out << title << '\n';
    char line[128];
    std::snprintf(line, sizeof line, "%4s  %22s  %22s  %s\n", "n", "empirical_sup_error",
                  "theoretical_bound", "ok");
    out << line;
    for (const auto& r : rows) {
        std::snprintf(line, sizeof line, "%4zu  %22.12e  %22.12e  %s\n", r.n, r.empirical, r.bound,
                      r.empirical <= r.bound ? "yes" : "NO");
        out << line;
    }
    return out.str();
}

}  // namespace tcmv
