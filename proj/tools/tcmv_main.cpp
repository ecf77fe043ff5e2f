// Command-line front end: tcmv {solve|simulate|bounds} <config> [options]

#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "tcmv/scenario.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Time-consistent mean-variance portfolio solver"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    std::size_t threads = 1;
    bool verbose = false;

    struct Sub {
        const char* name;
        const char* help;
        tcmv::Command command;
    };
    const Sub subs[] = {
        {"solve", "Solve every model and write the k-curve, allocation and moment tables",
         tcmv::Command::Solve},
        {"simulate", "Monte Carlo the solved strategies and write path and summary tables",
         tcmv::Command::Simulate},
        {"bounds", "Print the Picard iteration bound table", tcmv::Command::Bounds},
    };
    for (const Sub& s : subs) {
        CLI::App* sub = app.add_subcommand(s.name, s.help);
        sub->add_option("config", config_path, "Scenario file")->required()->check(CLI::ExistingFile);
        sub->add_option("--out-dir", out_dir,
                        "Output directory (default: [outputs] directory, then $TCMV_OUT_DIR, "
                        "then ./tcmv_output)");
        sub->add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);
        sub->add_flag("-v,--verbose", verbose, "Progress on stderr");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    tcmv::Command command = tcmv::Command::Solve;
    for (const Sub& s : subs)
        if (app.got_subcommand(s.name)) command = s.command;

    tcmv::RunOptions options;
    if (!out_dir.empty()) options.out_dir = out_dir;
    options.threads = threads;
    options.verbose = verbose;
    return tcmv::run_scenario_file(config_path, command, options, std::cout, std::cerr);
}
