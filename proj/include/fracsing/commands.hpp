#ifndef FRACSING_COMMANDS_HPP
#define FRACSING_COMMANDS_HPP

#include "fracsing/analysis.hpp"
#include "fracsing/config.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace fracsing {

enum ExitCode : int {
    exit_success = 0,
    exit_config_error = 2,
    exit_not_converged = 3,
    exit_check_failed = 4,
};

/// Global command-line flags; set values override the config file.
struct CommandOptions {
    std::optional<std::filesystem::path> out;
    unsigned workers = 1;
    std::optional<std::uint64_t> seed;
    /// Count "precondition rejected" verdicts as failures.
    bool strict = false;
};

RunConfig apply_overrides(RunConfig config, const CommandOptions& options);

/// Runs the configured checks (the default suite when the list is empty).
std::vector<CheckResult> run_checks(const RunConfig& config);

/// Default suite used when the verify block lists no checks.
const std::vector<std::string>& default_checks();

int verify_exit_code(const std::vector<CheckResult>& results, bool strict);

struct SweepRow {
    double p = 0.0;
    double s = 0.0;
    double gamma = 0.0;
    long M = 0;
    int exit_code = 0;
    std::string status;
    double seminorm = 0.0;
    double seminorm_qb = 0.0;
    double interior_min = 0.0;
    double residual = 0.0;
    double extrapolation_error = 0.0;
    std::string monotonicity;
    std::string message;
};

/// One row per (p, s, gamma, M) combination, in nested list order; each run is isolated.
std::vector<SweepRow> run_sweep(const RunConfig& config, unsigned workers);

std::string sweep_csv(const std::vector<SweepRow>& rows);

int cmd_solve(const std::filesystem::path& config_path, const CommandOptions& options, std::ostream& out,
              std::ostream& err);
int cmd_verify(const std::filesystem::path& config_path, const CommandOptions& options, std::ostream& out,
               std::ostream& err);
int cmd_sweep(const std::filesystem::path& config_path, const CommandOptions& options, std::ostream& out,
              std::ostream& err);

} // namespace fracsing

#endif
