#include "fracsing/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace fracsing {

using nlohmann::json;

namespace {

json number_or_null(double x)
{
    if (std::isfinite(x)) return x;
    return nullptr;
}

std::string lattice_label(const GridDomain& grid)
{
    std::string m;
    const auto& lat = grid.lattice();
    for (int d = 0; d < grid.dim(); ++d) m += (d ? "x" : "") + std::to_string(lat[d]);
    return m;
}

} // namespace

void write_atomic(const std::filesystem::path& path, const std::string& content)
{
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
        out << content;
        out.flush();
        if (!out) throw std::runtime_error("write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

std::string format_double(double x)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string field_csv(const Field& u, const CsvHeader& h)
{
    const GridDomain& grid = u.grid();
    std::string out = "# p=" + format_double(h.p) + " s=" + format_double(h.s) + " gamma=" + format_double(h.gamma) +
                      " n_max=" + std::to_string(h.n_max) + " M=" + (h.M.empty() ? lattice_label(grid) : h.M) + "\n";
    for (std::size_t i : grid.interior_indices()) {
        const Point& x = grid.node(i);
        for (int d = 0; d < grid.dim(); ++d) out += format_double(x[d]) + ",";
        out += format_double(u[i]) + "\n";
    }
    return out;
}

std::vector<std::vector<double>> read_csv_rows(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#' || line.find_first_not_of(" \t\r") == std::string::npos) continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            try {
                std::size_t used = 0;
                row.push_back(std::stod(cell, &used));
                if (cell.find_first_not_of(" \t\r", used) != std::string::npos) throw std::invalid_argument(cell);
            } catch (const std::exception&) {
                throw std::runtime_error(path.string() + ":" + std::to_string(lineno) + ": not a number: '" + cell + "'");
            }
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

std::string history_csv(const SolveReport& report)
{
    std::string out = "n,converged,inner_iterations,fixed_point_iterations,sup_increment,min_increment,seminorm,"
                      "seminorm_qb,interior_min,residual\n";
    for (const StageRecord& r : report.stages) {
        out += std::to_string(r.n) + "," + (r.converged ? "1" : "0") + "," + std::to_string(r.inner_iterations) +
               "," + std::to_string(r.fixed_point_iterations) + "," + format_double(r.sup_increment) + "," +
               format_double(r.min_increment) + "," + format_double(r.seminorm) + "," + format_double(r.seminorm_qb) +
               "," + format_double(r.interior_min) + "," + format_double(r.residual) + "\n";
    }
    return out;
}

json report_json(const SolveReport& report)
{
    json stages = json::array();
    for (const StageRecord& r : report.stages) {
        stages.push_back({{"n", r.n},
                          {"converged", r.converged},
                          {"inner_iterations", r.inner_iterations},
                          {"fixed_point_iterations", r.fixed_point_iterations},
                          {"sup_increment", number_or_null(r.sup_increment)},
                          {"min_increment", number_or_null(r.min_increment)},
                          {"seminorm", number_or_null(r.seminorm)},
                          {"seminorm_qb", number_or_null(r.seminorm_qb)},
                          {"interior_min", number_or_null(r.interior_min)},
                          {"residual", number_or_null(r.residual)}});
    }
    return {{"converged", report.converged},
            {"degenerate_source", report.degenerate_source},
            {"boundary_exponent", report.boundary_exponent},
            {"residual", number_or_null(report.residual)},
            {"extrapolation_error", number_or_null(report.extrapolation_error)},
            {"solution_max", report.solution.max()},
            {"interior_subset_size", report.subset.node_indices.size()},
            {"interior_subset_margin", report.subset.margin},
            {"stages", stages},
            {"notes", report.notes}};
}

json check_json(const CheckResult& r)
{
    json metrics = json::object();
    for (const auto& [k, v] : r.metrics) metrics[k] = number_or_null(v);
    return {{"name", r.name},
            {"anchor", r.anchor},
            {"status", to_string(r.status)},
            {"margin", number_or_null(r.margin)},
            {"message", r.message},
            {"metrics", metrics}};
}

} // namespace fracsing
