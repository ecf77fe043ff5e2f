#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "tcmv/market.hpp"
#include "tcmv/montecarlo.hpp"
#include "tcmv/picard.hpp"

namespace tcmv {

/// Parsed scenario file.
///
/// Grammar (one item per line, '#' starts a comment):
///
///   [section]
///   key = value
///
/// Values are numbers separated by commas or blanks; matrix rows are
/// separated by ';'. Sections and keys:
///
///   [market]      alpha (list), sigma (matrix), rho (matrix, optional),
///                 r (default 0), s0 (list, optional)
///   [objective]   gamma (list), T (list)
///   [solver]      n_steps (optional), steps_per_year (1000), tol (1e-10),
///                 max_iter (200), initial_value (1)
///   [simulation]  n_paths (100000), n_time_steps (optional),
///                 steps_per_year (1000), seed, x0 (1)
///   [outputs]     models (subset of 1 2 3), tables (names), directory,
///                 wealth_min (0.1), wealth_max (5), wealth_points (50),
///                 bound_rows (10)
struct ScenarioConfig {
    MarketParams market;
    std::optional<CorrelationSpec> rho;
    std::vector<double> gammas;
    std::vector<double> horizons;

    std::optional<std::size_t> n_steps;
    double steps_per_year = 1000.0;
    PicardConfig picard;

    std::size_t n_paths = 100000;
    std::optional<std::size_t> n_time_steps;
    double sim_steps_per_year = 1000.0;
    std::uint64_t seed = 20160101;
    double x0 = 1.0;

    std::set<int> models{1, 2, 3};
    std::set<std::string> tables;  ///< empty: every table of the command
    std::string directory;
    double wealth_min = 0.1;
    double wealth_max = 5.0;
    std::size_t wealth_points = 50;
    std::size_t bound_rows = 10;

    /// Market with sigma expressed on independent drivers.
    MarketParams effective_market() const;
    TimeGrid solver_grid(double horizon) const;
    SimConfig sim_config(double horizon) const;
};

/// Throws ConfigError (with the offending line when there is one).
ScenarioConfig parse_scenario(std::istream& in);
ScenarioConfig load_scenario(const std::filesystem::path& path);

enum class Command { Solve, Simulate, Bounds };

struct RunOptions {
    std::optional<std::filesystem::path> out_dir;
    std::size_t threads = 1;
    bool verbose = false;
};

/// Generated artifacts, keyed by file name, plus text meant for stdout.
struct ScenarioOutput {
    std::map<std::string, std::string> files;
    std::string console;
};

/// Runs every (gamma, T) combination and renders the tables in memory.
/// Throws the library errors (validation, non-convergence, explosion).
ScenarioOutput run_scenario(const ScenarioConfig& config, Command command,
                            const RunOptions& options, std::ostream* log = nullptr);

/// Writes every file or none: on failure the files written so far are removed.
void write_outputs(const ScenarioOutput& output, const std::filesystem::path& dir);

/// Exit codes: 0 success, 1 other failure, 2 config error, 3 market
/// validation error, 4 solver non-convergence, 5 simulation explosion.
int exit_code_for(const std::exception& e) noexcept;

/// Output directory precedence: --out-dir, then [outputs] directory, then
/// the TCMV_OUT_DIR environment variable, then "tcmv_output".
std::filesystem::path resolve_output_dir(const ScenarioConfig& config, const RunOptions& options);

/// Parse, run, write, report. Returns the process exit code.
int run_scenario_file(const std::filesystem::path& config_path, Command command,
                      const RunOptions& options, std::ostream& out, std::ostream& err);

}  // namespace tcmv
