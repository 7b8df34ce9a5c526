#ifndef FRACSING_CONFIG_HPP
#define FRACSING_CONFIG_HPP

#include "fracsing/field.hpp"
#include "fracsing/geometry.hpp"
#include "fracsing/solver.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace fracsing {

/// Rejected configuration; `field` is the dotted path of the offending entry
/// (or "line L, column C" for syntax errors).
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string field, const std::string& message)
        : std::runtime_error(field + ": " + message), field_(std::move(field))
    {
    }
    const std::string& field() const { return field_; }

private:
    std::string field_;
};

struct DomainSpec {
    DomainShape shape = DomainShape::Interval;
    /// Corners (interval, rectangle).
    std::vector<double> lo{-1.0};
    std::vector<double> hi{1.0};
    /// Ball centre and radius.
    std::vector<double> center{0.0, 0.0};
    double radius = 1.0;
    /// Nodes per axis on the closed domain.
    std::vector<long> M{129};
    double pad = 1.0;
};

/// Named source profile or nodal values read from CSV.
struct SourceSpec {
    enum class Profile { Constant, Gaussian, Power, Csv } profile = Profile::Constant;
    enum class Variant { Plain, Even, Odd } variant = Variant::Plain;
    /// Amplitude (all analytic profiles).
    double c = 1.0;
    std::vector<double> mu;
    double sigma = 0.25;
    double alpha = 1.0;
    /// Relative odd component of the Odd variant: f(x) (1 + odd_slope (x1 - c1)/half-width).
    double odd_slope = 0.5;
    std::string path;
};

struct ProblemBlock {
    double p = 2.0;
    double s = 0.5;
    double gamma = 1.0;
    int N = 1;
    DomainSpec domain;
    SourceSpec source;
};

struct CheckSpec {
    std::string name;
    nlohmann::json params = nlohmann::json::object();
};

struct VerifyBlock {
    /// Empty means the full default suite.
    std::vector<CheckSpec> checks;
};

struct OutputBlock {
    std::string directory = "out";
    std::vector<std::string> formats{"json", "csv"};
    std::uint64_t seed = 12345;
};

/// Cartesian sweep lists; an empty list makes the sweep empty.
struct SweepBlock {
    std::vector<double> p;
    std::vector<double> s;
    std::vector<double> gamma;
    std::vector<long> M;
};

struct RunConfig {
    ProblemBlock problem;
    SolverConfig solver;
    VerifyBlock verify;
    OutputBlock output;
    std::optional<SweepBlock> sweep;
    /// Directory that relative paths in the file are resolved against (not serialized).
    std::filesystem::path base_dir;
};

/// Parses, fills defaults and validates every cross-field constraint, including
/// building the grid and the source. Throws ConfigError.
RunConfig parse_config(const std::string& text, const std::filesystem::path& base_dir = {});
RunConfig load_config(const std::filesystem::path& path);

/// Effective configuration with all defaults filled; parse_config(to_json(c).dump()) == c.
nlohmann::json to_json(const RunConfig& config);

bool operator==(const RunConfig& a, const RunConfig& b);

/// Parameter ranges and N >= sp; throws ConfigError.
void validate_problem(const ProblemBlock& problem);

/// Grid and source built from a configuration.
struct Materialized {
    DomainPtr domain;
    ProblemSpec problem;
};

/// Throws ConfigError naming the field at fault.
Materialized materialize(const RunConfig& config);

DomainPtr build_domain(const DomainSpec& spec);
Field build_source(const SourceSpec& spec, const DomainPtr& domain, const std::filesystem::path& base_dir);

/// Names accepted in the verify block.
const std::vector<std::string>& known_checks();

} // namespace fracsing

#endif
