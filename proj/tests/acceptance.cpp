// One line per acceptance criterion: "[N] PASS|FAIL name: detail".

#include "fracsing/analysis.hpp"
#include "fracsing/commands.hpp"
#include "fracsing/exponents.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>

using namespace fracsing;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(double x)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", x);
    return buf;
}

double seconds(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

Field constant(const DomainPtr& d, double c)
{
    return Field::from_function(d, [c](const Point&) { return c; });
}

SolverConfig schedule_to(long n_max)
{
    SolverConfig c;
    c.n_schedule.clear();
    for (long n = 1; n <= n_max; n *= 2) c.n_schedule.push_back(n);
    return c;
}

// u(x) = A (1 - x^2)^s solves 2 P.V. int (u(x) - u(y)) |x - y|^{-1-2s} dy = 1 on (-1, 1):
// the classical solution for the normalized fractional Laplacian rescaled by C_{1,s} / 2.
double oracle_amplitude(double s)
{
    const double classical =
        std::tgamma(0.5) / (std::pow(4.0, s) * std::tgamma((1.0 + 2.0 * s) / 2.0) * std::tgamma(1.0 + s));
    const double c1s = s * std::pow(4.0, s) * std::tgamma(0.5 + s) / (std::sqrt(M_PI) * std::tgamma(1.0 - s));
    return 0.5 * c1s * classical;
}

Outcome analytic_oracle()
{
    Outcome out{true, ""};
    for (double s : {0.25, 0.5, 0.75}) {
        const auto t0 = Clock::now();
        const double A = oracle_amplitude(s);
        std::vector<double> errors;
        for (std::size_t M : {65u, 129u, 257u, 513u}) {
            auto d = build_interval(-1.0, 1.0, M, 1.0);
            const auto w = KernelWeights::assemble(d, s, 2.0, AssumptionPolicy::Off);
            const InnerSolve r = solve_dirichlet(w, constant(d, 1.0), SolverConfig{});
            double err = 0.0, peak = 0.0;
            for (std::size_t i : d->interior_indices()) {
                const double x = d->node(i)[0];
                const double exact = A * std::pow(1.0 - x * x, s);
                err = std::max(err, std::abs(r.u[i] - exact));
                peak = std::max(peak, exact);
            }
            errors.push_back(err / peak);
            if (!r.converged) {
                out.pass = false;
                out.detail += " [s=" + fmt(s) + " M=" + std::to_string(M) + " inner solve not converged]";
            }
        }
        const double t = seconds(t0);
        bool decreasing = true;
        for (std::size_t k = 1; k < errors.size(); ++k) decreasing = decreasing && errors[k] < errors[k - 1];
        const bool ok = errors.back() <= 0.05 && decreasing && t <= 60.0;
        out.pass = out.pass && ok;
        out.detail += " s=" + fmt(s) + ": err";
        for (double e : errors) out.detail += " " + fmt(e);
        out.detail += " (" + fmt(t) + " s)";
    }
    return out;
}

Outcome gradient_consistency()
{
    std::mt19937_64 rng(20240611);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    auto d = build_interval(-1.0, 1.0, 65, 1.0);
    double worst = 0.0;
    for (double p : {1.5, 2.0, 3.0}) {
        for (double s : {0.3, 0.5, 0.7}) {
            const auto w = KernelWeights::assemble(d, s, p, AssumptionPolicy::Off);
            for (int trial = 0; trial < 10; ++trial) {
                std::vector<double> x(w.unknowns()), g(w.unknowns());
                for (double& v : x) v = U(rng);
                w.energy_and_gradient(x, g);
                double gmax = 0.0, err = 0.0;
                for (double v : g) gmax = std::max(gmax, std::abs(v));
                std::vector<double> y = x;
                const double h = 1e-5;
                for (std::size_t a = 0; a < x.size(); ++a) {
                    y[a] = x[a] + h;
                    const double fp = w.energy(y) / p;
                    y[a] = x[a] - h;
                    const double fm = w.energy(y) / p;
                    y[a] = x[a];
                    err = std::max(err, std::abs((fp - fm) / (2.0 * h) - g[a]));
                }
                worst = std::max(worst, err / gmax);
            }
        }
    }
    return {worst <= 1e-5, "max relative error " + fmt(worst) + " over 90 fields"};
}

Outcome monotone_regularization()
{
    Outcome out{true, ""};
    auto d = build_interval(-1.0, 1.0, 129, 1.0);
    const SolverConfig cfg = schedule_to(32);
    std::vector<std::size_t> central;
    for (std::size_t i : d->interior_indices())
        if (std::abs(d->node(i)[0]) <= 0.5) central.push_back(i);
    for (double p : {2.0, 3.0}) {
        const auto w = KernelWeights::assemble(d, 0.3, p);
        for (double gamma : {0.5, 1.0, 2.0}) {
            const ProblemSpec prob = ProblemSpec::make(p, 0.3, gamma, constant(d, 1.0));
            const SolveReport rep = solve_singular(prob, w, cfg);
            double min_inc = INFINITY, worst_drop = -INFINITY, min_central = INFINITY, prev = -INFINITY;
            for (std::size_t k = 0; k < rep.stage_solutions.size(); ++k) {
                const Field& u = rep.stage_solutions[k];
                double m = INFINITY;
                for (std::size_t i : central) m = std::min(m, u[i]);
                min_central = std::min(min_central, m);
                if (k > 0) {
                    min_inc = std::min(min_inc, -max_excess(rep.stage_solutions[k - 1], u));
                    worst_drop = std::max(worst_drop, prev - m);
                }
                prev = m;
            }
            const bool ok = rep.converged && rep.stage_solutions.size() == cfg.n_schedule.size() && min_inc >= -1e-6 &&
                            worst_drop <= 1e-6 && min_central > 0.0;
            out.pass = out.pass && ok;
            out.detail += " p=" + fmt(p) + ",g=" + fmt(gamma) + ":" + (ok ? "ok" : "BAD") + "(inc " + fmt(min_inc) + ")";
        }
    }
    return out;
}

Outcome apriori_bounds()
{
    auto d = build_interval(-1.0, 1.0, 129, 1.0);
    const auto w = KernelWeights::assemble(d, 0.3, 2.0);
    const Field f = constant(d, 1.0);
    const double mass = f.integral();

    const ProblemSpec p1 = ProblemSpec::make(2.0, 0.3, 1.0, f);
    const SolveReport r1 = solve_singular(p1, w, schedule_to(64));
    double ratio = 0.0;
    for (const Field& u : r1.stage_solutions) ratio = std::max(ratio, std::sqrt(seminorm_p(w, u)) / std::sqrt(mass));
    const AprioriVerdict v1 = apriori_check(r1, p1);
    const bool ok1 = r1.converged && ratio <= 1.05 && v1.status == CheckStatus::Pass;

    // gamma = 2, p = 2: q_b = 3/2, C_fit = [u^{3/2}]^2 / sum f h
    const ProblemSpec p2 = ProblemSpec::make(2.0, 0.3, 2.0, f);
    const SolveReport r2 = solve_singular(p2, w, schedule_to(1024));
    const std::size_t K = r2.stage_solutions.size();
    double lo = INFINITY, hi = 0.0;
    for (std::size_t k = K - 3; k < K; ++k) {
        const Field& u = r2.stage_solutions[k];
        std::vector<double> v(u.values().begin(), u.values().end());
        for (double& x : v) x = std::pow(std::max(x, 0.0), 1.5);
        const double c = seminorm_p(w, Field::from_values(d, v)) / mass;
        lo = std::min(lo, c);
        hi = std::max(hi, c);
    }
    const AprioriVerdict v2 = apriori_check(r2, p2);
    const bool ok2 = r2.converged && hi <= 1.2 * lo && v2.status == CheckStatus::Pass;
    return {ok1 && ok2, "gamma=1: max [u_n]/(sum f h)^(1/2) = " + fmt(ratio) + "; gamma=2: C_fit in [" + fmt(lo) +
                            ", " + fmt(hi) + "] at n=" + std::to_string(r2.stages[K - 3].n) + ".." +
                            std::to_string(r2.stages[K - 1].n) + "; checker " + to_string(v1.status) + "/" +
                            to_string(v2.status)};
}

Outcome exponent_identities()
{
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    double worst = 0.0;
    int tuples = 0;
    while (tuples < 100) {
        const int N = U(rng) < 0.5 ? 1 : 2;
        const double p = 1.1 + 3.9 * U(rng);
        const double s = 0.02 + 0.96 * U(rng);
        if (!(N > s * p)) continue;
        const double gamma = 0.05 + 0.9 * U(rng);
        const double qmax = N / (s * p);
        const double q = 1.0 + (qmax - 1.0) * (0.05 + 0.9 * U(rng));
        const ExponentTable t = exponents(p, s, N, gamma, q);
        const double pstar = N * p / (N - s * p);
        const double m = N * p / (N * (p - 1.0) + s * p + gamma * (N - s * p));
        const double mp = m / (m - 1.0);
        const double r = N * (p - 1.0) * q / (N - s * p * q);
        const double dual = N * p / (N * (p - 1.0) + s * p);
        auto rel = [](double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); };
        worst = std::max(worst, rel((1.0 - gamma) * mp, pstar));
        worst = std::max(worst, rel((1.0 - gamma) * t.m_prime.value_or(NAN), t.p_star));
        worst = std::max(worst, rel(t.p_star, pstar));
        worst = std::max(worst, rel(t.m, m));
        worst = std::max(worst, t.r_kind == SummabilityKind::Finite ? rel(t.r, r) : INFINITY);
        worst = std::max(worst, rel(t.p_star_dual, dual));
        worst = std::max(worst, rel(1.0 / t.p_star + 1.0 / t.p_star_dual, 1.0));
        ++tuples;
    }
    return {worst <= 1e-12, "100 tuples, worst relative defect " + fmt(worst)};
}

Outcome power_gap_sampling()
{
    const auto t0 = Clock::now();
    std::size_t violations = 0;
    double min_slack = INFINITY;
    for (double q : {1.5, 2.0, 3.7}) {
        for (double eps : {0.1, 0.5, 1.0}) {
            const PowerGapReport r = lemma_dino_check(q, eps, 100000);
            violations += r.violations;
            min_slack = std::min(min_slack, r.min_slack);
        }
    }
    const double t = seconds(t0);
    return {violations == 0 && t <= 5.0,
            std::to_string(violations) + " violations in 9 x 1e5 samples, min slack " + fmt(min_slack) + ", " + fmt(t) +
                " s"};
}

Outcome comparison_and_uniqueness()
{
    auto d = build_interval(-1.0, 1.0, 129, 1.0);
    const SolverConfig cfg = schedule_to(32);
    const double eps = 1e-3;
    const long n = cfg.n_schedule.back();
    Outcome out{true, ""};

    struct Pair {
        double p, gamma;
        std::function<double(const Point&)> f, g;
    };
    const std::vector<Pair> pairs = {
        {2.0, 1.0, [](const Point&) { return 1.0; }, [](const Point&) { return 2.0; }},
        {2.0, 0.5, [](const Point&) { return 1.0; }, [](const Point& x) { return 1.0 + x[0] * x[0]; }},
        {3.0, 2.0, [](const Point& x) { return std::exp(-8.0 * x[0] * x[0]); }, [](const Point&) { return 1.0; }},
        {2.0, 2.0, [](const Point& x) { return 0.5 + 0.5 * x[0]; }, [](const Point& x) { return 1.0 + 0.5 * x[0]; }},
        {3.0, 0.5, [](const Point& x) { return std::abs(x[0]); }, [](const Point& x) { return 0.2 + std::abs(x[0]); }},
    };
    int passed = 0;
    for (const Pair& pr : pairs) {
        const auto w = KernelWeights::assemble(d, 0.3, pr.p);
        const ProblemSpec pf = ProblemSpec::make(pr.p, 0.3, pr.gamma, Field::from_function(d, pr.f));
        const ProblemSpec pg = ProblemSpec::make(pr.p, 0.3, pr.gamma, Field::from_function(d, pr.g));
        const SolveReport uf = solve_singular(pf, w, cfg);
        const SolveReport ug = solve_singular(pg, w, cfg);
        const double k = std::max(std::pow(double(n), pr.gamma), 2.0 * std::pow(eps, -pr.gamma));
        ScreenOptions screen;
        screen.level = n;
        const ComparisonVerdict v = comparison_check(uf.solution, ug.solution, pg, w, TruncationKit::make(pr.gamma, k, eps),
                                                     cfg, screen);
        const double nodal = max_excess(uf.solution, ug.solution);
        const bool ok = uf.converged && ug.converged && v.status == CheckStatus::Pass && nodal <= 10.0 * cfg.outer_tol;
        passed += ok;
        if (!ok) out.detail += " [pair p=" + fmt(pr.p) + " g=" + fmt(pr.gamma) + ": " + to_string(v.status) + " " + v.message + "]";
    }
    out.pass = passed == 5;
    out.detail = "ordering " + std::to_string(passed) + "/5;" + out.detail + " uniqueness";
    for (double p : {2.0, 3.0}) {
        const auto w = KernelWeights::assemble(d, 0.3, p);
        for (double gamma : {0.5, 2.0}) {
            const ProblemSpec prob = ProblemSpec::make(p, 0.3, gamma, constant(d, 1.0));
            const UniquenessVerdict v = uniqueness_check(prob, w, cfg);
            out.pass = out.pass && v.status == CheckStatus::Pass;
            out.detail += " p=" + fmt(p) + ",g=" + fmt(gamma) + ":" + to_string(v.status) + "(" + fmt(v.distance) +
                          "<=" + fmt(v.tolerance) + ")";
        }
    }
    return out;
}

Outcome symmetry()
{
    const SolverConfig cfg = schedule_to(32);
    auto line = build_interval(-1.0, 1.0, 129, 1.0);
    const Field even = Field::from_function(line, [](const Point& x) { return 1.0 + std::cos(3.0 * x[0]) * x[0] * x[0]; });
    const ProblemSpec p1 = ProblemSpec::make(2.0, 0.3, 1.0, even);
    const SymmetryVerdict v1 = symmetry_check(p1, KernelWeights::assemble(line, 0.3, 2.0), cfg);

    const auto t0 = Clock::now();
    auto ball = build_ball({0.0, 0.0}, 1.0, 33, 0.5);
    const Field radial = Field::from_function(ball, [](const Point& x) { return 2.0 - x[0] * x[0] - x[1] * x[1]; });
    const ProblemSpec p2 = ProblemSpec::make(2.0, 0.3, 1.0, radial);
    const SymmetryVerdict v2 = symmetry_check(p2, KernelWeights::assemble(ball, 0.3, 2.0), cfg);
    const double t = seconds(t0);
    const bool ok = v1.status == CheckStatus::Pass && v2.status == CheckStatus::Pass && t <= 300.0;
    return {ok, "interval max asymmetry " + fmt(v1.max_asymmetry) + "; ball (" + std::to_string(ball->interior_count()) +
                    " interior nodes, " + std::to_string(v2.asymmetry.size()) + " axes) " + fmt(v2.max_asymmetry) +
                    " in " + fmt(t) + " s"};
}

Outcome boundary_datum()
{
    auto d = build_interval(-1.0, 1.0, 129, 1.0);
    const auto w = KernelWeights::assemble(d, 0.3, 2.0);
    const ProblemSpec prob = ProblemSpec::make(2.0, 0.3, 2.0, constant(d, 1.0));
    const SolveReport rep = solve_singular(prob, w, schedule_to(64));
    const BoundaryDatumReport r = boundary_datum_check(w, rep.solution, 2.0, {0.05, 0.1, 0.2});
    double worst = INFINITY;
    std::string detail;
    for (const auto& e : r.entries) {
        worst = std::min(worst, e.slack);
        detail += " eps=" + fmt(e.eps) + ": " + fmt(e.lhs) + " <= " + fmt(e.rhs) + ";";
    }
    return {rep.converged && worst >= -1e-8, "min slack " + fmt(worst) + detail};
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Outcome determinism(const std::string& cli, const fs::path& work)
{
    fs::remove_all(work);
    fs::create_directories(work);
    const fs::path cfg = work / "run.json";
    std::ofstream(cfg) << R"({"problem": {"p": 2, "s": 0.5, "gamma": 1, "domain": {"M": 129}},
        "output": {"seed": 4242}})";
    const fs::path out = work / "out";
    const char* names[] = {"solution.csv", "history.csv", "report.json"};
    std::vector<std::string> first;
    for (int run = 0; run < 2; ++run) {
        int code;
        if (!cli.empty()) {
            const std::string cmd = "\"" + cli + "\" solve \"" + cfg.string() + "\" --out \"" + out.string() +
                                    "\" --seed 4242 >/dev/null 2>&1";
            code = std::system(cmd.c_str());
        } else {
            CommandOptions opt;
            opt.out = out;
            opt.seed = 4242;
            std::ostringstream o, e;
            code = cmd_solve(cfg, opt, o, e);
        }
        if (code != 0) return {false, "solve exited with status " + std::to_string(code)};
        std::vector<std::string> now;
        for (const char* n : names) now.push_back(slurp(out / n));
        if (run == 0) {
            first = now;
            continue;
        }
        for (std::size_t k = 0; k < now.size(); ++k)
            if (now[k] != first[k] || now[k].empty()) return {false, std::string(names[k]) + " differs between runs"};
    }
    return {true, std::string("3 artifacts byte-identical across two runs") + (cli.empty() ? " (in-process)" : "")};
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"acceptance criteria"};
    std::string cli;
    std::string work = (fs::temp_directory_path() / "fracsing_acceptance").string();
    std::vector<int> only;
    app.add_option("--cli", cli, "fracsing executable used for the determinism run");
    app.add_option("--work", work, "scratch directory");
    app.add_option("--only", only, "run only these criteria");
    CLI11_PARSE(app, argc, argv);

    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"analytic oracle", analytic_oracle},
        {"gradient consistency", gradient_consistency},
        {"monotone regularization", monotone_regularization},
        {"a-priori bounds", apriori_bounds},
        {"exponent identities", exponent_identities},
        {"power gap inequality", power_gap_sampling},
        {"comparison and uniqueness", comparison_and_uniqueness},
        {"symmetry", symmetry},
        {"boundary datum", boundary_datum},
        {"determinism", [&] { return determinism(cli, fs::path(work)); }},
    };

    int failures = 0;
    for (std::size_t k = 0; k < criteria.size(); ++k) {
        const int id = static_cast<int>(k) + 1;
        if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end()) continue;
        const auto t0 = Clock::now();
        Outcome o;
        try {
            o = criteria[k].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failures += !o.pass;
        std::cout << "[" << id << "] " << (o.pass ? "PASS" : "FAIL") << " " << criteria[k].first << ": " << o.detail
                  << " (" << fmt(seconds(t0)) << " s)" << std::endl;
    }
    return failures == 0 ? 0 : 1;
}
