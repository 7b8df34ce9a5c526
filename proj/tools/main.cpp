#include "fracsing/commands.hpp"

#include <CLI11.hpp>

#include <exception>
#include <iostream>
#include <string>

int main(int argc, char** argv)
{
    using namespace fracsing;

    CLI::App app{"Fractional p-Laplacian problems with singular nonlinearities"};
    app.require_subcommand(1);
    app.fallthrough();

    CommandOptions options;
    std::string out_dir;
    std::uint64_t seed = 0;
    app.add_option("--out", out_dir, "Output directory (overrides output.directory)");
    app.add_option("--workers", options.workers, "Worker threads for sweeps")->check(CLI::PositiveNumber);
    auto* seed_opt = app.add_option("--seed", seed, "Seed for sampling checks (overrides output.seed)");
    app.add_flag("--strict", options.strict, "Count rejected preconditions as failures");

    std::string config;
    auto* solve = app.add_subcommand("solve", "Run the regularization limit and write solution, report and history");
    solve->add_option("config", config, "Run configuration (JSON)")->required();
    auto* verify = app.add_subcommand("verify", "Run the verification suite");
    verify->add_option("config", config, "Run configuration (JSON)")->required();
    auto* sweep = app.add_subcommand("sweep", "Solve every (p, s, gamma, M) combination of the sweep block");
    sweep->add_option("config", config, "Run configuration (JSON)")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : exit_config_error;
    }
    if (!out_dir.empty()) options.out = out_dir;
    if (seed_opt->count() > 0) options.seed = seed;

    try {
        if (solve->parsed()) return cmd_solve(config, options, std::cout, std::cerr);
        if (verify->parsed()) return cmd_verify(config, options, std::cout, std::cerr);
        return cmd_sweep(config, options, std::cout, std::cerr);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
