#include "fracsing/config.hpp"

#include "fracsing/io.hpp"
#include "fracsing/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace fracsing {

using nlohmann::json;

namespace {

const char* shape_name(DomainShape s)
{
    switch (s) {
    case DomainShape::Interval: return "interval";
    case DomainShape::Rectangle: return "rectangle";
    case DomainShape::Ball: return "ball";
    }
    return "interval";
}

const char* profile_name(SourceSpec::Profile p)
{
    switch (p) {
    case SourceSpec::Profile::Constant: return "constant";
    case SourceSpec::Profile::Gaussian: return "gaussian";
    case SourceSpec::Profile::Power: return "power";
    case SourceSpec::Profile::Csv: return "csv";
    }
    return "constant";
}

const char* variant_name(SourceSpec::Variant v)
{
    switch (v) {
    case SourceSpec::Variant::Plain: return "plain";
    case SourceSpec::Variant::Even: return "even";
    case SourceSpec::Variant::Odd: return "odd";
    }
    return "plain";
}

// Typed access to one JSON table; remembers which keys were consumed so that
// leftovers can be reported as unknown.
class Table {
public:
    Table(const json& j, std::string path) : j_(j), path_(std::move(path))
    {
        if (!j_.is_object()) throw ConfigError(path_, "expected a table");
    }

    std::string at(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
    bool has(const std::string& key) const { return j_.contains(key); }

    const json& raw(const std::string& key)
    {
        seen_.insert(key);
        return j_.at(key);
    }

    double number(const std::string& key, double fallback)
    {
        if (!has(key)) return fallback;
        const json& v = raw(key);
        if (!v.is_number()) throw ConfigError(at(key), "expected a number");
        const double x = v.get<double>();
        if (!std::isfinite(x)) throw ConfigError(at(key), "must be finite");
        return x;
    }

    long integer(const std::string& key, long fallback)
    {
        if (!has(key)) return fallback;
        const json& v = raw(key);
        if (!v.is_number_integer()) throw ConfigError(at(key), "expected an integer");
        return v.get<long>();
    }

    std::uint64_t unsigned_integer(const std::string& key, std::uint64_t fallback)
    {
        if (!has(key)) return fallback;
        const json& v = raw(key);
        if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<long>() < 0))
            throw ConfigError(at(key), "expected a nonnegative integer");
        return v.get<std::uint64_t>();
    }

    std::string text(const std::string& key, const std::string& fallback)
    {
        if (!has(key)) return fallback;
        const json& v = raw(key);
        if (!v.is_string()) throw ConfigError(at(key), "expected a string");
        return v.get<std::string>();
    }

    std::vector<double> numbers(const std::string& key, std::vector<double> fallback)
    {
        if (!has(key)) return fallback;
        const json& v = raw(key);
        if (!v.is_array()) throw ConfigError(at(key), "expected a list of numbers");
        std::vector<double> out;
        for (const json& e : v) {
            if (!e.is_number()) throw ConfigError(at(key), "expected a list of numbers");
            out.push_back(e.get<double>());
        }
        return out;
    }

    std::vector<long> integers(const std::string& key, std::vector<long> fallback)
    {
        if (!has(key)) return fallback;
        const json& v = raw(key);
        if (v.is_number_integer()) return {v.get<long>()};
        if (!v.is_array()) throw ConfigError(at(key), "expected a list of integers");
        std::vector<long> out;
        for (const json& e : v) {
            if (!e.is_number_integer()) throw ConfigError(at(key), "expected a list of integers");
            out.push_back(e.get<long>());
        }
        return out;
    }

    std::vector<std::string> strings(const std::string& key, std::vector<std::string> fallback)
    {
        if (!has(key)) return fallback;
        const json& v = raw(key);
        if (!v.is_array()) throw ConfigError(at(key), "expected a list of strings");
        std::vector<std::string> out;
        for (const json& e : v) {
            if (!e.is_string()) throw ConfigError(at(key), "expected a list of strings");
            out.push_back(e.get<std::string>());
        }
        return out;
    }

    /// Rejects keys that were never read.
    void finish() const
    {
        for (const auto& item : j_.items())
            if (!seen_.count(item.key())) throw ConfigError(at(item.key()), "unknown key");
    }

private:
    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

DomainSpec parse_domain(Table t)
{
    DomainSpec d;
    const std::string shape = t.text("shape", "interval");
    if (shape == "interval") {
        d.shape = DomainShape::Interval;
    } else if (shape == "rectangle") {
        d.shape = DomainShape::Rectangle;
        d.lo = {-1.0, -1.0};
        d.hi = {1.0, 1.0};
        d.M = {33, 33};
    } else if (shape == "ball") {
        d.shape = DomainShape::Ball;
        d.M = {33};
    } else {
        throw ConfigError(t.at("shape"), "unknown shape '" + shape + "' (valid: interval, rectangle, ball)");
    }
    if (d.shape == DomainShape::Ball) {
        d.center = t.numbers("center", d.center);
        d.radius = t.number("radius", d.radius);
        if (d.center.size() != 2) throw ConfigError(t.at("center"), "ball centre needs 2 coordinates");
        d.lo = {-1.0};
        d.hi = {1.0};
    } else {
        d.lo = t.numbers("lo", d.lo);
        d.hi = t.numbers("hi", d.hi);
        const std::size_t dim = d.shape == DomainShape::Interval ? 1 : 2;
        if (d.lo.size() != dim) throw ConfigError(t.at("lo"), "expected " + std::to_string(dim) + " coordinate(s)");
        if (d.hi.size() != dim) throw ConfigError(t.at("hi"), "expected " + std::to_string(dim) + " coordinate(s)");
    }
    d.M = t.integers("M", d.M);
    const std::size_t m_len = d.shape == DomainShape::Rectangle ? 2 : 1;
    if (d.shape == DomainShape::Rectangle && d.M.size() == 1) d.M.push_back(d.M.front());
    if (d.M.size() != m_len) throw ConfigError(t.at("M"), "expected " + std::to_string(m_len) + " node count(s)");
    for (long m : d.M)
        if (m < 3) throw ConfigError(t.at("M"), "node counts must be >= 3");
    d.pad = t.number("pad", d.pad);
    t.finish();
    return d;
}

SourceSpec parse_source(Table t)
{
    SourceSpec src;
    const std::string profile = t.text("profile", "constant");
    if (profile == "constant") src.profile = SourceSpec::Profile::Constant;
    else if (profile == "gaussian") src.profile = SourceSpec::Profile::Gaussian;
    else if (profile == "power") src.profile = SourceSpec::Profile::Power;
    else if (profile == "csv") src.profile = SourceSpec::Profile::Csv;
    else throw ConfigError(t.at("profile"), "unknown profile '" + profile + "' (valid: constant, gaussian, power, csv)");

    const std::string variant = t.text("variant", "plain");
    if (variant == "plain") src.variant = SourceSpec::Variant::Plain;
    else if (variant == "even") src.variant = SourceSpec::Variant::Even;
    else if (variant == "odd") src.variant = SourceSpec::Variant::Odd;
    else throw ConfigError(t.at("variant"), "unknown variant '" + variant + "' (valid: plain, even, odd)");

    if (src.profile == SourceSpec::Profile::Csv) {
        src.path = t.text("path", "");
        if (src.path.empty()) throw ConfigError(t.at("path"), "csv profile needs a path");
    } else {
        src.c = t.number("c", src.c);
        if (src.c < 0.0) throw ConfigError(t.at("c"), "amplitude must be >= 0");
    }
    if (src.profile == SourceSpec::Profile::Gaussian) {
        src.mu = t.numbers("mu", src.mu);
        src.sigma = t.number("sigma", src.sigma);
        if (!(src.sigma > 0.0)) throw ConfigError(t.at("sigma"), "must be > 0");
    }
    if (src.profile == SourceSpec::Profile::Power) {
        src.alpha = t.number("alpha", src.alpha);
        if (src.alpha < 0.0) throw ConfigError(t.at("alpha"), "must be >= 0");
    }
    if (src.variant == SourceSpec::Variant::Odd) {
        src.odd_slope = t.number("odd_slope", src.odd_slope);
        if (!(std::abs(src.odd_slope) <= 1.0)) throw ConfigError(t.at("odd_slope"), "must lie in [-1, 1]");
    }
    t.finish();
    return src;
}

SolverConfig parse_solver(Table t)
{
    SolverConfig c;
    c.inner_tol = t.number("inner_tol", c.inner_tol);
    c.outer_tol = t.number("outer_tol", c.outer_tol);
    const long max_inner = t.integer("max_inner_iters", static_cast<long>(c.max_inner_iters));
    const long max_outer = t.integer("max_outer_iters", static_cast<long>(c.max_outer_iters));
    if (max_inner <= 0) throw ConfigError(t.at("max_inner_iters"), "must be > 0");
    if (max_outer <= 0) throw ConfigError(t.at("max_outer_iters"), "must be > 0");
    c.max_inner_iters = static_cast<std::size_t>(max_inner);
    c.max_outer_iters = static_cast<std::size_t>(max_outer);
    c.n_schedule = t.integers("n_schedule", c.n_schedule);
    c.damping = t.number("damping", c.damping);
    const std::string method = t.text("method", "energy");
    if (method == "energy") c.method = FixedPointMethod::Energy;
    else if (method == "picard") c.method = FixedPointMethod::Picard;
    else throw ConfigError(t.at("method"), "unknown method '" + method + "' (valid: energy, picard)");
    const long memory = t.integer("lbfgs_memory", static_cast<long>(c.lbfgs_memory));
    if (memory <= 0) throw ConfigError(t.at("lbfgs_memory"), "must be > 0");
    c.lbfgs_memory = static_cast<std::size_t>(memory);
    t.finish();
    try {
        c.validate();
    } catch (const std::invalid_argument& e) {
        const std::string msg = e.what();
        std::string field = "solver";
        for (const char* key : {"n_schedule", "inner_tol", "outer_tol", "damping"})
            if (msg.find(key) != std::string::npos) field += std::string(".") + key;
        throw ConfigError(field, msg);
    }
    return c;
}

// Keys each check accepts; every value is a number or a list of numbers.
void validate_check_params(const CheckSpec& spec, const std::string& where)
{
    static const std::map<std::string, std::set<std::string>> allowed{
        {"lemma_dino", {"q", "eps", "samples"}},
        {"boundary_datum", {"eps"}},
        {"comparison", {"eps", "factor"}},
        {"convexity_inequality", {"q"}},
        {"exponents", {"q"}},
    };
    const auto it = allowed.find(spec.name);
    for (const auto& item : spec.params.items()) {
        const std::string at = where + "." + item.key();
        if (it == allowed.end() || !it->second.count(item.key()))
            throw ConfigError(at, "unknown parameter for check '" + spec.name + "'");
        const json& v = item.value();
        const bool numeric = v.is_number() ||
                             (v.is_array() && !v.empty() && std::all_of(v.begin(), v.end(), [](const json& e) {
                                  return e.is_number();
                              }));
        if (!numeric) throw ConfigError(at, "expected a number or a list of numbers");
        if (item.key() == "samples" && !(v.is_number_integer() && v.get<long>() >= 0))
            throw ConfigError(at, "expected a nonnegative integer");
    }
}

VerifyBlock parse_verify(Table t)
{
    VerifyBlock v;
    if (t.has("checks")) {
        const json& list = t.raw("checks");
        if (!list.is_array()) throw ConfigError(t.at("checks"), "expected a list");
        for (std::size_t k = 0; k < list.size(); ++k) {
            const std::string where = t.at("checks") + "[" + std::to_string(k) + "]";
            CheckSpec spec;
            if (list[k].is_string()) {
                spec.name = list[k].get<std::string>();
            } else if (list[k].is_object() && list[k].contains("name") && list[k]["name"].is_string()) {
                spec.name = list[k]["name"].get<std::string>();
                spec.params = list[k];
                spec.params.erase("name");
            } else {
                throw ConfigError(where, "expected a check name or a table with a name");
            }
            const auto& names = known_checks();
            if (std::find(names.begin(), names.end(), spec.name) == names.end()) {
                std::string valid;
                for (const auto& n : names) valid += (valid.empty() ? "" : ", ") + n;
                throw ConfigError(where + ".name", "unknown check '" + spec.name + "' (valid: " + valid + ")");
            }
            validate_check_params(spec, where);
            v.checks.push_back(std::move(spec));
        }
    }
    t.finish();
    return v;
}

OutputBlock parse_output(Table t)
{
    OutputBlock o;
    o.directory = t.text("directory", o.directory);
    o.formats = t.strings("formats", o.formats);
    for (const auto& f : o.formats)
        if (f != "json" && f != "csv") throw ConfigError(t.at("formats"), "unknown format '" + f + "' (valid: json, csv)");
    o.seed = t.unsigned_integer("seed", o.seed);
    t.finish();
    return o;
}

SweepBlock parse_sweep(Table t)
{
    SweepBlock s;
    s.p = t.numbers("p", {});
    s.s = t.numbers("s", {});
    s.gamma = t.numbers("gamma", {});
    s.M = t.integers("M", {});
    t.finish();
    return s;
}

std::string line_column(const std::string& text, std::size_t byte)
{
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i < std::min(byte, text.size()); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

Field apply_variant(const SourceSpec& spec, Field f)
{
    if (spec.variant == SourceSpec::Variant::Plain) return f;
    const GridDomain& grid = f.grid();
    const double c1 = grid.center()[0];
    if (spec.variant == SourceSpec::Variant::Even) {
        const auto perm = grid.reflect(Hyperplane::coordinate(0, c1));
        Field even(f.domain());
        for (std::size_t i : grid.interior_indices()) even.set(i, 0.5 * (f[i] + f[perm[i]]));
        return even;
    }
    Field odd(f.domain());
    const double half = grid.half_extent(0);
    for (std::size_t i : grid.interior_indices())
        odd.set(i, f[i] * (1.0 + spec.odd_slope * (grid.node(i)[0] - c1) / half));
    return odd;
}

json domain_json(const DomainSpec& d)
{
    json j;
    j["shape"] = shape_name(d.shape);
    if (d.shape == DomainShape::Ball) {
        j["center"] = d.center;
        j["radius"] = d.radius;
    } else {
        j["lo"] = d.lo;
        j["hi"] = d.hi;
    }
    j["M"] = d.M;
    j["pad"] = d.pad;
    return j;
}

json source_json(const SourceSpec& s)
{
    json j;
    j["profile"] = profile_name(s.profile);
    j["variant"] = variant_name(s.variant);
    if (s.profile == SourceSpec::Profile::Csv) {
        j["path"] = s.path;
    } else {
        j["c"] = s.c;
    }
    if (s.profile == SourceSpec::Profile::Gaussian) {
        j["mu"] = s.mu;
        j["sigma"] = s.sigma;
    }
    if (s.profile == SourceSpec::Profile::Power) j["alpha"] = s.alpha;
    if (s.variant == SourceSpec::Variant::Odd) j["odd_slope"] = s.odd_slope;
    return j;
}

} // namespace

const std::vector<std::string>& known_checks()
{
    static const std::vector<std::string> names{
        "monotonicity", "apriori", "boundary_datum", "lifted_seminorm", "comparison",
        "uniqueness",   "symmetry", "lemma_dino",    "exponents",       "convexity_inequality",
    };
    return names;
}

DomainPtr build_domain(const DomainSpec& d)
{
    try {
        switch (d.shape) {
        case DomainShape::Interval:
            return build_interval(d.lo.at(0), d.hi.at(0), static_cast<std::size_t>(d.M.at(0)), d.pad);
        case DomainShape::Rectangle:
            return build_rectangle({d.lo.at(0), d.lo.at(1)}, {d.hi.at(0), d.hi.at(1)},
                                   {static_cast<std::size_t>(d.M.at(0)), static_cast<std::size_t>(d.M.at(1))}, d.pad);
        case DomainShape::Ball:
            return build_ball({d.center.at(0), d.center.at(1)}, d.radius, static_cast<std::size_t>(d.M.at(0)), d.pad);
        }
    } catch (const std::out_of_range&) {
        throw ConfigError("problem.domain", "incomplete domain description");
    } catch (const std::invalid_argument& e) {
        throw ConfigError("problem.domain", e.what());
    }
    throw ConfigError("problem.domain.shape", "unknown shape");
}

Field build_source(const SourceSpec& spec, const DomainPtr& domain, const std::filesystem::path& base_dir)
{
    const GridDomain& grid = *domain;
    const Point center = grid.center();
    Field f(domain);
    switch (spec.profile) {
    case SourceSpec::Profile::Constant:
        f = Field::from_function(domain, [&](const Point&) { return spec.c; });
        break;
    case SourceSpec::Profile::Gaussian: {
        Point mu = center;
        if (!spec.mu.empty()) {
            if (spec.mu.size() != static_cast<std::size_t>(grid.dim()))
                throw ConfigError("problem.source.mu", "expected " + std::to_string(grid.dim()) + " coordinate(s)");
            for (int d = 0; d < grid.dim(); ++d) mu[d] = spec.mu[d];
        }
        f = Field::from_function(domain, [&](const Point& x) {
            double r2 = 0.0;
            for (int d = 0; d < grid.dim(); ++d) r2 += (x[d] - mu[d]) * (x[d] - mu[d]);
            return spec.c * std::exp(-r2 / (2.0 * spec.sigma * spec.sigma));
        });
        break;
    }
    case SourceSpec::Profile::Power:
        f = Field::from_function(domain, [&](const Point& x) {
            double r2 = 0.0;
            for (int d = 0; d < grid.dim(); ++d) r2 += (x[d] - center[d]) * (x[d] - center[d]);
            return spec.alpha == 0.0 ? spec.c : spec.c * std::pow(std::sqrt(r2), spec.alpha);
        });
        break;
    case SourceSpec::Profile::Csv: {
        const std::filesystem::path path = std::filesystem::path(spec.path).is_absolute()
                                               ? std::filesystem::path(spec.path)
                                               : base_dir / spec.path;
        std::vector<std::vector<double>> rows;
        try {
            rows = read_csv_rows(path);
        } catch (const std::exception& e) {
            throw ConfigError("problem.source.path", e.what());
        }
        const auto& interior = grid.interior_indices();
        if (rows.size() != interior.size())
            throw ConfigError("problem.source.path", "expected " + std::to_string(interior.size()) +
                                                         " rows (one per interior node), got " +
                                                         std::to_string(rows.size()));
        const std::size_t width = static_cast<std::size_t>(grid.dim()) + 1;
        const double h = grid.spacing()[0];
        for (std::size_t a = 0; a < rows.size(); ++a) {
            if (rows[a].size() != width)
                throw ConfigError("problem.source.path", "row " + std::to_string(a + 1) + ": expected " +
                                                             std::to_string(width) + " columns");
            const Point& x = grid.node(interior[a]);
            for (int d = 0; d < grid.dim(); ++d)
                if (std::abs(rows[a][d] - x[d]) > 1e-9 * std::max(1.0, h))
                    throw ConfigError("problem.source.path",
                                      "row " + std::to_string(a + 1) + ": coordinates do not match the grid node");
            f.set(interior[a], rows[a][width - 1]);
        }
        break;
    }
    }
    f = apply_variant(spec, std::move(f));
    if (!f.nonnegative()) throw ConfigError("problem.source", "source must be nonnegative");
    return f;
}

void validate_problem(const ProblemBlock& pb)
{
    if (!(pb.p > 1.0)) throw ConfigError("problem.p", "must be > 1");
    if (!(pb.s > 0.0 && pb.s < 1.0)) throw ConfigError("problem.s", "must lie in (0, 1)");
    if (!(pb.gamma >= 0.0)) throw ConfigError("problem.gamma", "must be >= 0");
    if (pb.N != 1 && pb.N != 2) throw ConfigError("problem.N", "only N = 1 or 2 is supported");
    if (pb.N < pb.s * pb.p) {
        std::ostringstream msg;
        msg << "N>sp violated (N=" << pb.N << ", s=" << pb.s << ", p=" << pb.p << ", sp=" << pb.s * pb.p << ")";
        throw ConfigError("problem.s", msg.str());
    }
}

Materialized materialize(const RunConfig& config)
{
    const ProblemBlock& pb = config.problem;
    validate_problem(pb);
    DomainPtr domain = build_domain(pb.domain);
    if (domain->dim() != pb.N)
        throw ConfigError("problem.N", "N=" + std::to_string(pb.N) + " does not match the " +
                                           shape_name(pb.domain.shape) + " dimension " + std::to_string(domain->dim()));
    Field f = build_source(pb.source, domain, config.base_dir);
    try {
        return {domain, ProblemSpec::make(pb.p, pb.s, pb.gamma, std::move(f))};
    } catch (const std::invalid_argument& e) {
        throw ConfigError("problem", e.what());
    }
}

RunConfig parse_config(const std::string& text, const std::filesystem::path& base_dir)
{
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(line_column(text, e.byte), "syntax error");
    }
    Table top(root, "");
    RunConfig config;
    config.base_dir = base_dir;

    if (!top.has("problem")) throw ConfigError("problem", "missing table");
    {
        Table t(top.raw("problem"), "problem");
        ProblemBlock& pb = config.problem;
        pb.p = t.number("p", pb.p);
        pb.s = t.number("s", pb.s);
        pb.gamma = t.number("gamma", pb.gamma);
        pb.N = static_cast<int>(t.integer("N", pb.N));
        if (t.has("domain")) pb.domain = parse_domain(Table(t.raw("domain"), "problem.domain"));
        else if (pb.N == 2) pb.domain = parse_domain(Table(json{{"shape", "ball"}}, "problem.domain"));
        if (t.has("source")) pb.source = parse_source(Table(t.raw("source"), "problem.source"));
        t.finish();

        validate_problem(pb);
    }
    if (top.has("solver")) config.solver = parse_solver(Table(top.raw("solver"), "solver"));
    if (top.has("verify")) config.verify = parse_verify(Table(top.raw("verify"), "verify"));
    if (top.has("output")) config.output = parse_output(Table(top.raw("output"), "output"));
    if (top.has("sweep")) config.sweep = parse_sweep(Table(top.raw("sweep"), "sweep"));
    top.finish();

    materialize(config);
    return config;
}

RunConfig load_config(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError(path.string(), "cannot open config file");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str(), path.parent_path());
}

json to_json(const RunConfig& c)
{
    json j;
    j["problem"] = {{"p", c.problem.p},
                    {"s", c.problem.s},
                    {"gamma", c.problem.gamma},
                    {"N", c.problem.N},
                    {"domain", domain_json(c.problem.domain)},
                    {"source", source_json(c.problem.source)}};
    j["solver"] = {{"inner_tol", c.solver.inner_tol},
                   {"outer_tol", c.solver.outer_tol},
                   {"max_inner_iters", c.solver.max_inner_iters},
                   {"max_outer_iters", c.solver.max_outer_iters},
                   {"n_schedule", c.solver.n_schedule},
                   {"damping", c.solver.damping},
                   {"method", c.solver.method == FixedPointMethod::Energy ? "energy" : "picard"},
                   {"lbfgs_memory", c.solver.lbfgs_memory}};
    json checks = json::array();
    for (const CheckSpec& spec : c.verify.checks) {
        json e = spec.params;
        e["name"] = spec.name;
        checks.push_back(std::move(e));
    }
    j["verify"] = {{"checks", checks}};
    j["output"] = {{"directory", c.output.directory}, {"formats", c.output.formats}, {"seed", c.output.seed}};
    if (c.sweep) j["sweep"] = {{"p", c.sweep->p}, {"s", c.sweep->s}, {"gamma", c.sweep->gamma}, {"M", c.sweep->M}};
    return j;
}

bool operator==(const RunConfig& a, const RunConfig& b) { return to_json(a) == to_json(b); }

} // namespace fracsing
