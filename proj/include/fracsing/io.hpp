#ifndef FRACSING_IO_HPP
#define FRACSING_IO_HPP

#include "fracsing/analysis.hpp"
#include "fracsing/field.hpp"
#include "fracsing/solver.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace fracsing {

/// Writes to a sibling temporary file and renames it into place.
void write_atomic(const std::filesystem::path& path, const std::string& content);

/// 17 significant digits, so values survive a text round trip.
std::string format_double(double x);

struct CsvHeader {
    double p = 0.0;
    double s = 0.0;
    double gamma = 0.0;
    long n_max = 0;
    /// Grid size label, e.g. "129" or "33x33"; defaults to the full lattice extents.
    std::string M;
};

/// "# p=.. s=.. gamma=.. n_max=.. M=.." followed by x[,y],value rows for the interior nodes.
std::string field_csv(const Field& u, const CsvHeader& header);

/// Numeric rows of a CSV file; '#' lines and blank lines are skipped.
std::vector<std::vector<double>> read_csv_rows(const std::filesystem::path& path);

/// Per-stage convergence history of a limit run.
std::string history_csv(const SolveReport& report);

/// SolveReport without wall-clock timings.
nlohmann::json report_json(const SolveReport& report);

nlohmann::json check_json(const CheckResult& result);

} // namespace fracsing

#endif
