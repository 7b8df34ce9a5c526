#include "fracsing/commands.hpp"

#include "fracsing/io.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <thread>

namespace fracsing {

using nlohmann::json;

namespace {

using Clock = std::chrono::steady_clock;

double elapsed(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::vector<double> param_list(const json& params, const char* key, std::vector<double> fallback)
{
    if (!params.contains(key)) return fallback;
    const json& v = params.at(key);
    if (v.is_number()) return {v.get<double>()};
    std::vector<double> out;
    for (const json& e : v) out.push_back(e.get<double>());
    return out;
}

double param_number(const json& params, const char* key, double fallback)
{
    return params.contains(key) ? params.at(key).get<double>() : fallback;
}

CheckResult make_result(std::string name, std::string anchor)
{
    CheckResult r;
    r.name = std::move(name);
    r.anchor = std::move(anchor);
    return r;
}

CheckStatus from_bool(bool ok) { return ok ? CheckStatus::Pass : CheckStatus::Fail; }

// Everything a check may need; the limit run is computed once and shared.
class CheckContext {
public:
    explicit CheckContext(const RunConfig& config)
        : config_(config), mat_(materialize(config)),
          weights_(KernelWeights::assemble(mat_.domain, mat_.problem.s, mat_.problem.p))
    {
    }

    const RunConfig& config() const { return config_; }
    const ProblemSpec& problem() const { return mat_.problem; }
    const KernelWeights& weights() const { return weights_; }

    const SolveReport& limit_run()
    {
        if (!report_) report_ = solve_singular(mat_.problem, weights_, config_.solver);
        return *report_;
    }

private:
    const RunConfig& config_;
    Materialized mat_;
    KernelWeights weights_;
    std::optional<SolveReport> report_;
};

CheckResult check_monotonicity(CheckContext& ctx, const json&)
{
    CheckResult r = make_result("monotonicity", "regularized solutions increase with n and stay positive inside");
    const SolveReport& rep = ctx.limit_run();
    if (rep.degenerate_source) {
        r.status = CheckStatus::PreconditionRejected;
        r.message = "source vanishes identically";
        return r;
    }
    const double tol = ctx.config().solver.outer_tol;
    const MonotonicityVerdict v = monotonicity_check(rep, tol);
    r.status = v.status;
    r.margin = std::min(v.min_increment + 10.0 * tol, 10.0 * tol - v.interior_min_drop);
    r.metrics = {{"min_increment", v.min_increment},
                 {"interior_min_drop", v.interior_min_drop},
                 {"interior_min_first", rep.stages.front().interior_min}};
    if (!v.interior_positive) r.message = "interior minimum not positive";
    return r;
}

CheckResult check_apriori(CheckContext& ctx, const json&)
{
    CheckResult r = make_result("apriori", "uniform energy bound along the regularization");
    const AprioriVerdict v = apriori_check(ctx.limit_run(), ctx.problem());
    r.status = v.status;
    r.margin = v.threshold - v.ratio;
    r.metrics = {{"ratio", v.ratio}, {"threshold", v.threshold}};
    return r;
}

CheckResult check_boundary_datum(CheckContext& ctx, const json& params)
{
    CheckResult r = make_result("boundary_datum", "(u - eps)^+ has finite energy controlled by eps^{1-gamma}");
    const SolveReport& rep = ctx.limit_run();
    const BoundaryDatumReport bd = boundary_datum_check(ctx.weights(), rep.solution, ctx.problem().gamma,
                                                        param_list(params, "eps", {0.05, 0.1, 0.2}));
    r.margin = std::numeric_limits<double>::infinity();
    for (const auto& e : bd.entries) {
        r.margin = std::min(r.margin, e.slack);
        r.metrics["slack_eps_" + format_double(e.eps)] = e.slack;
    }
    r.status = from_bool(bd.holds(1e-8));
    if (!rep.converged) r.status = CheckStatus::Inconclusive;
    return r;
}

CheckResult check_lifted_seminorm(CheckContext& ctx, const json&)
{
    CheckResult r = make_result("lifted_seminorm", "energy at order sp/(gamma+p-1) bounded by the energy of u^{(gamma+p-1)/p}");
    if (!(ctx.problem().gamma > 1.0)) {
        r.status = CheckStatus::PreconditionRejected;
        r.message = "requires gamma > 1";
        return r;
    }
    const SeminormPairReport s = lifted_seminorm_check(ctx.weights(), ctx.limit_run().solution, ctx.problem().gamma);
    r.margin = s.slack;
    r.metrics = {{"lhs", s.lhs}, {"rhs", s.rhs}};
    r.status = from_bool(s.slack >= -1e-8 * std::max(1.0, s.rhs));
    return r;
}

CheckResult check_comparison(CheckContext& ctx, const json& params)
{
    CheckResult r = make_result("comparison", "weak comparison: a subsolution stays below a supersolution");
    const ProblemSpec& prob = ctx.problem();
    const SolverConfig& cfg = ctx.config().solver;
    const double factor = param_number(params, "factor", 2.0);
    const double eps = param_number(params, "eps", 1e-3);
    if (!(factor >= 1.0)) {
        r.status = CheckStatus::PreconditionRejected;
        r.message = "factor must be >= 1 so that f <= factor f";
        return r;
    }
    Field g(prob.f.domain());
    for (std::size_t i : g.grid().interior_indices()) g.set(i, factor * prob.f[i]);
    const ProblemSpec larger = ProblemSpec::make(prob.p, prob.s, prob.gamma, g);
    const SolveReport& below = ctx.limit_run();
    const SolveReport above = solve_singular(larger, ctx.weights(), cfg);
    if (below.degenerate_source) {
        r.status = CheckStatus::PreconditionRejected;
        r.message = "source vanishes identically";
        return r;
    }

    const long n = cfg.n_schedule.back();
    const double k = std::max(std::pow(static_cast<double>(n), prob.gamma), 2.0 * std::pow(eps, -prob.gamma));
    const TruncationKit kit = TruncationKit::make(prob.gamma, k, eps);
    ScreenOptions screen;
    screen.level = n;
    const ComparisonVerdict v = comparison_check(below.solution, above.solution, larger, ctx.weights(), kit, cfg, screen);
    r.status = v.status;
    if (v.status == CheckStatus::Pass && !(below.converged && above.converged)) r.status = CheckStatus::Inconclusive;
    r.message = v.message;
    r.margin = 10.0 * cfg.outer_tol - v.truncated_gap;
    r.metrics = {{"max_violation", v.max_violation},
                 {"truncated_gap", v.truncated_gap},
                 {"sub_residual", v.sub_residual},
                 {"super_residual", v.super_residual}};
    return r;
}

CheckResult check_uniqueness(CheckContext& ctx, const json&)
{
    CheckResult r = make_result("uniqueness", "the limit does not depend on the approximating sequence");
    const UniquenessVerdict v = uniqueness_check(ctx.problem(), ctx.weights(), ctx.config().solver);
    r.status = v.status;
    r.margin = v.tolerance - v.distance;
    r.metrics = {{"distance", v.distance},
                 {"gap", v.gap},
                 {"tolerance", v.tolerance},
                 {"extrapolated_distance", v.extrapolated_distance}};
    return r;
}

CheckResult check_symmetry(CheckContext& ctx, const json&)
{
    CheckResult r = make_result("symmetry", "solutions inherit the reflection symmetries of domain and source");
    const SymmetryVerdict v = symmetry_check(ctx.problem(), ctx.weights(), ctx.config().solver);
    r.status = v.status;
    r.message = v.message;
    r.margin = 10.0 * ctx.config().solver.outer_tol - v.max_asymmetry;
    r.metrics = {{"max_asymmetry", v.max_asymmetry}, {"axes", static_cast<double>(v.asymmetry.size())}};
    return r;
}

CheckResult check_lemma_dino(CheckContext& ctx, const json& params)
{
    CheckResult r = make_result("lemma_dino", "|x^q - y^q| >= eps^{q-1} |x - y| whenever max{x, y} >= eps");
    const auto qs = param_list(params, "q", {1.5, 2.0, 3.7});
    const auto epss = param_list(params, "eps", {0.1, 0.5, 1.0});
    const auto samples = static_cast<std::size_t>(param_number(params, "samples", 1e5));
    std::size_t violations = 0;
    double min_slack = std::numeric_limits<double>::infinity();
    std::uint64_t seed = ctx.config().output.seed;
    for (double q : qs) {
        for (double eps : epss) {
            const PowerGapReport g = lemma_dino_check(q, eps, samples, seed++);
            violations += g.violations;
            min_slack = std::min(min_slack, g.min_slack);
        }
    }
    r.status = from_bool(violations == 0);
    r.margin = min_slack;
    r.metrics = {{"violations", static_cast<double>(violations)},
                 {"samples_per_pair", static_cast<double>(samples)},
                 {"min_slack", min_slack}};
    return r;
}

CheckResult check_exponents(CheckContext& ctx, const json& params)
{
    CheckResult r = make_result("exponents", "(1-gamma) m' = p*, summability exponent r, dual exponent of p*");
    const ProblemSpec& prob = ctx.problem();
    const double q = param_number(params, "q", 1.0);
    ExponentTable t;
    try {
        t = exponents(prob.p, prob.s, prob.dim(), prob.gamma, q);
    } catch (const std::invalid_argument& e) {
        r.status = CheckStatus::PreconditionRejected;
        r.message = e.what();
        return r;
    }
    const double N = t.N, p = t.p, sp = t.s * t.p;
    double defect = 0.0;
    const double dual = N * p / (N * (p - 1.0) + sp);
    defect = std::max(defect, std::abs(t.p_star_dual - dual) / dual);
    defect = std::max(defect, std::abs(1.0 / t.p_star + 1.0 / t.p_star_dual - 1.0));
    if (t.m_prime) defect = std::max(defect, conjugate_identity_defect(t) / t.p_star);
    if (t.r_kind == SummabilityKind::Finite) {
        const double rr = N * (p - 1.0) * q / (N - sp * q);
        defect = std::max(defect, std::abs(t.r - rr) / rr);
    }
    r.status = from_bool(defect <= 1e-12);
    r.margin = 1e-12 - defect;
    r.metrics = {{"p_star", t.p_star}, {"p_star_dual", t.p_star_dual}, {"m", t.m}, {"defect", defect}};
    if (t.m_prime) r.metrics["m_prime"] = *t.m_prime;
    if (t.r_kind == SummabilityKind::Finite) r.metrics["r"] = t.r;
    return r;
}

CheckResult check_convexity(CheckContext& ctx, const json& params)
{
    CheckResult r = make_result("convexity_inequality", "A Phi(u) <= |Phi'(u)|^{p-2} Phi'(u) A u for convex Phi with Phi(0) = 0");
    const double q = param_number(params, "q", 2.0);
    const SolverConfig& cfg = ctx.config().solver;
    const InnerSolve solve = solve_dirichlet(ctx.weights(), ctx.problem().f, cfg);
    Field u = solve.u;
    for (std::size_t i : u.grid().interior_indices())
        if (u[i] < 0.0) u.set(i, 0.0);
    const ConvexMap map = ConvexMap::power(q);
    try {
        const ConvexityReport c =
            convexity_inequality_check(ctx.weights(), u, ctx.problem().f, map, power_field(u, q), cfg.inner_tol);
        r.status = solve.converged ? from_bool(c.holds()) : CheckStatus::Inconclusive;
        r.margin = c.bound - c.slack;
        r.metrics = {{"slack", c.slack}, {"bound", c.bound}};
    } catch (const std::invalid_argument& e) {
        r.status = CheckStatus::PreconditionRejected;
        r.message = e.what();
    }
    return r;
}

using CheckFn = CheckResult (*)(CheckContext&, const json&);

const std::map<std::string, CheckFn>& check_table()
{
    static const std::map<std::string, CheckFn> table{
        {"monotonicity", check_monotonicity},     {"apriori", check_apriori},
        {"boundary_datum", check_boundary_datum}, {"lifted_seminorm", check_lifted_seminorm},
        {"comparison", check_comparison},         {"uniqueness", check_uniqueness},
        {"symmetry", check_symmetry},             {"lemma_dino", check_lemma_dino},
        {"exponents", check_exponents},           {"convexity_inequality", check_convexity},
    };
    return table;
}

void write_outputs(const RunConfig& config, const std::vector<std::pair<std::string, std::string>>& files)
{
    const std::filesystem::path dir(config.output.directory);
    for (const auto& [name, content] : files) write_atomic(dir / name, content);
}

bool wants(const RunConfig& config, const char* format)
{
    return std::find(config.output.formats.begin(), config.output.formats.end(), format) != config.output.formats.end();
}

std::optional<RunConfig> load_or_report(const std::filesystem::path& path, const CommandOptions& options,
                                        std::ostream& err)
{
    try {
        return apply_overrides(load_config(path), options);
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
    }
    return std::nullopt;
}

} // namespace

RunConfig apply_overrides(RunConfig config, const CommandOptions& options)
{
    if (options.out) config.output.directory = options.out->string();
    if (options.seed) config.output.seed = *options.seed;
    return config;
}

const std::vector<std::string>& default_checks()
{
    static const std::vector<std::string> names{"monotonicity", "boundary_datum", "comparison", "uniqueness",
                                                "symmetry",     "lemma_dino",     "exponents",  "convexity_inequality"};
    return names;
}

std::vector<CheckResult> run_checks(const RunConfig& config)
{
    CheckContext ctx(config);
    std::vector<CheckSpec> specs = config.verify.checks;
    if (specs.empty())
        for (const auto& name : default_checks()) specs.push_back({name});
    std::vector<CheckResult> results;
    for (const CheckSpec& spec : specs) results.push_back(check_table().at(spec.name)(ctx, spec.params));
    return results;
}

int verify_exit_code(const std::vector<CheckResult>& results, bool strict)
{
    int code = exit_success;
    for (const CheckResult& r : results) {
        switch (r.status) {
        case CheckStatus::Pass: break;
        case CheckStatus::Fail: code = std::max<int>(code, exit_check_failed); break;
        case CheckStatus::Inconclusive: code = std::max<int>(code, exit_not_converged); break;
        case CheckStatus::PreconditionRejected:
            if (strict) code = std::max<int>(code, exit_check_failed);
            break;
        }
    }
    return code;
}

std::vector<SweepRow> run_sweep(const RunConfig& config, unsigned workers)
{
    std::vector<SweepRow> rows;
    if (!config.sweep) return rows;
    const SweepBlock& sw = *config.sweep;
    for (double p : sw.p)
        for (double s : sw.s)
            for (double g : sw.gamma)
                for (long m : sw.M) {
                    SweepRow row;
                    row.p = p;
                    row.s = s;
                    row.gamma = g;
                    row.M = m;
                    rows.push_back(std::move(row));
                }

    auto run_row = [&config](SweepRow& row) {
        RunConfig c = config;
        c.problem.p = row.p;
        c.problem.s = row.s;
        c.problem.gamma = row.gamma;
        for (long& m : c.problem.domain.M) m = row.M;
        try {
            const Materialized mat = materialize(c);
            const KernelWeights w = KernelWeights::assemble(mat.domain, row.s, row.p);
            const SolveReport rep = solve_singular(mat.problem, w, c.solver);
            const StageRecord& last = rep.stages.back();
            row.seminorm = last.seminorm;
            row.seminorm_qb = last.seminorm_qb;
            row.interior_min = last.interior_min;
            row.residual = rep.residual;
            row.extrapolation_error = rep.extrapolation_error;
            const MonotonicityVerdict mono = monotonicity_check(rep, c.solver.outer_tol);
            row.monotonicity = to_string(mono.status);
            if (!rep.converged) {
                row.status = "not_converged";
                row.exit_code = exit_not_converged;
            } else if (mono.status == CheckStatus::Fail) {
                row.status = "check_failed";
                row.exit_code = exit_check_failed;
            } else {
                row.status = "ok";
            }
            if (!rep.notes.empty()) row.message = rep.notes.front();
        } catch (const ConfigError& e) {
            row.status = "config_error";
            row.exit_code = exit_config_error;
            row.message = e.what();
        } catch (const std::exception& e) {
            row.status = "error";
            row.exit_code = exit_not_converged;
            row.message = e.what();
        }
    };

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t k = next++; k < rows.size(); k = next++) run_row(rows[k]);
    };
    const unsigned n_threads = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(rows.size())));
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < n_threads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
    return rows;
}

std::string sweep_csv(const std::vector<SweepRow>& rows)
{
    std::string out = "p,s,gamma,M,status,exit_code,seminorm,seminorm_qb,interior_min,residual,extrapolation_error,"
                      "monotonicity,message\n";
    for (const SweepRow& r : rows) {
        std::string msg = r.message;
        std::replace(msg.begin(), msg.end(), '"', '\'');
        out += format_double(r.p) + "," + format_double(r.s) + "," + format_double(r.gamma) + "," +
               std::to_string(r.M) + "," + r.status + "," + std::to_string(r.exit_code) + "," +
               format_double(r.seminorm) + "," + format_double(r.seminorm_qb) + "," + format_double(r.interior_min) +
               "," + format_double(r.residual) + "," + format_double(r.extrapolation_error) + "," + r.monotonicity +
               ",\"" + msg + "\"\n";
    }
    return out;
}

int cmd_solve(const std::filesystem::path& config_path, const CommandOptions& options, std::ostream& out,
              std::ostream& err)
{
    const auto config = load_or_report(config_path, options, err);
    if (!config) return exit_config_error;
    const auto t0 = Clock::now();
    const Materialized mat = materialize(*config);
    const SolveReport report = solve_singular(mat.problem, config->solver);
    const int code = report.converged ? exit_success : exit_not_converged;

    std::vector<std::pair<std::string, std::string>> files;
    if (wants(*config, "csv")) {
        std::string m_label;
        for (long m : config->problem.domain.M) m_label += (m_label.empty() ? "" : "x") + std::to_string(m);
        const CsvHeader header{mat.problem.p, mat.problem.s, mat.problem.gamma, config->solver.n_schedule.back(), m_label};
        files.emplace_back("solution.csv", field_csv(report.solution, header));
        files.emplace_back("history.csv", history_csv(report));
    }
    if (wants(*config, "json")) {
        json doc{{"config", to_json(*config)},
                 {"grid", mat.domain->describe()},
                 {"report", report_json(report)},
                 {"exit_code", code}};
        files.emplace_back("report.json", doc.dump(2) + "\n");
    }
    write_outputs(*config, files);

    out << "solve: " << (report.converged ? "converged" : "NOT converged") << ", n_max=" << config->solver.n_schedule.back()
        << ", residual=" << format_double(report.residual) << ", max u=" << format_double(report.solution.max())
        << "\n";
    for (const auto& note : report.notes) out << "note: " << note << "\n";
    err << "elapsed " << elapsed(t0) << " s\n";
    return code;
}

int cmd_verify(const std::filesystem::path& config_path, const CommandOptions& options, std::ostream& out,
               std::ostream& err)
{
    const auto config = load_or_report(config_path, options, err);
    if (!config) return exit_config_error;
    const auto t0 = Clock::now();
    const std::vector<CheckResult> results = run_checks(*config);
    const int code = verify_exit_code(results, options.strict);

    json checks = json::array();
    for (const CheckResult& r : results) {
        checks.push_back(check_json(r));
        out << r.name << ": " << to_string(r.status) << " (margin " << format_double(r.margin) << ")";
        if (!r.message.empty()) out << " - " << r.message;
        out << "\n";
    }
    if (wants(*config, "json")) {
        json doc{{"config", to_json(*config)}, {"strict", options.strict}, {"checks", checks}, {"exit_code", code}};
        write_outputs(*config, {{"verify.json", doc.dump(2) + "\n"}});
    }
    err << "elapsed " << elapsed(t0) << " s\n";
    return code;
}

int cmd_sweep(const std::filesystem::path& config_path, const CommandOptions& options, std::ostream& out,
              std::ostream& err)
{
    const auto config = load_or_report(config_path, options, err);
    if (!config) return exit_config_error;
    const auto t0 = Clock::now();
    const std::vector<SweepRow> rows = run_sweep(*config, options.workers);
    int code = exit_success;
    for (const SweepRow& r : rows) code = std::max(code, r.exit_code);

    const std::string table = sweep_csv(rows);
    std::vector<std::pair<std::string, std::string>> files;
    if (wants(*config, "csv")) files.emplace_back("sweep.csv", table);
    if (wants(*config, "json")) {
        json list = json::array();
        for (const SweepRow& r : rows)
            list.push_back({{"p", r.p},
                            {"s", r.s},
                            {"gamma", r.gamma},
                            {"M", r.M},
                            {"status", r.status},
                            {"exit_code", r.exit_code},
                            {"seminorm", r.seminorm},
                            {"seminorm_qb", r.seminorm_qb},
                            {"interior_min", r.interior_min},
                            {"residual", std::isfinite(r.residual) ? json(r.residual) : json(nullptr)},
                            {"monotonicity", r.monotonicity},
                            {"message", r.message}});
        files.emplace_back("sweep.json", json{{"config", to_json(*config)}, {"rows", list}, {"exit_code", code}}.dump(2) + "\n");
    }
    write_outputs(*config, files);
    out << table;
    err << rows.size() << " runs, elapsed " << elapsed(t0) << " s\n";
    return code;
}

} // namespace fracsing
