#include "fracsing/solver.hpp"

#include "fracsing/exponents.hpp"
#include "fracsing/minimize.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace fracsing {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0)
{
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

MinimizeOptions inner_options(const SolverConfig& config, double cell_volume)
{
    MinimizeOptions opts;
    opts.grad_tol = config.inner_tol * cell_volume;
    opts.max_iters = config.max_inner_iters;
    opts.memory = config.lbfgs_memory;
    return opts;
}

// int_0^t (max{tau,0} + 1/n)^{-gamma} dtau, concave in t.
double regularized_primitive(double t, double gamma, double inv_n)
{
    if (t <= 0.0) return std::pow(inv_n, -gamma) * t;
    const double n = 1.0 / inv_n;
    if (gamma == 1.0) return std::log1p(n * t);
    return std::pow(inv_n, 1.0 - gamma) * std::expm1((1.0 - gamma) * std::log1p(n * t)) / (1.0 - gamma);
}

double regularized_quotient(double f, double u, double gamma, double inv_n)
{
    if (gamma == 0.0) return f;
    return f / std::pow(std::max(u, 0.0) + inv_n, gamma);
}

double regularized_residual(const ProblemSpec& prob, const RegularizedProblem& reg, const KernelWeights& weights,
                            const Field& u)
{
    const Field Au = apply_operator(weights, u);
    const double vol = weights.grid().cell_volume();
    double r = 0.0;
    for (std::size_t i : weights.grid().interior_indices())
        r = std::max(r, std::abs(Au[i] / vol - regularized_quotient(reg.f_n[i], u[i], prob.gamma, reg.shift)));
    return r;
}

double subset_min(const Field& u, const CompactSubset& subset)
{
    double m = std::numeric_limits<double>::infinity();
    for (std::size_t i : subset.node_indices) m = std::min(m, u[i]);
    return m;
}

} // namespace

ProblemSpec ProblemSpec::make(double p, double s, double gamma, Field f)
{
    if (!(gamma >= 0.0) || !std::isfinite(gamma)) throw std::invalid_argument("problem: gamma must be >= 0");
    check_standing_assumption(f.grid().dim(), s, p, AssumptionPolicy::Borderline);
    if (!f.nonnegative()) throw std::invalid_argument("problem: source f must be nonnegative");
    return ProblemSpec{p, s, gamma, std::move(f)};
}

double ProblemSpec::boundary_exponent() const { return std::max((gamma + p - 1.0) / p, 1.0); }

double ProblemSpec::p_star() const
{
    const double n = dim();
    return n > s * p ? n * p / (n - s * p) : std::numeric_limits<double>::infinity();
}

RegularizedProblem RegularizedProblem::make(const ProblemSpec& prob, long n)
{
    if (n < 1) throw std::invalid_argument("regularized problem: n must be a positive integer");
    RegularizedProblem reg{n, prob.f, 1.0 / static_cast<double>(n)};
    const double cap = static_cast<double>(n);
    for (std::size_t i : prob.f.grid().interior_indices()) reg.f_n.set(i, std::min(prob.f[i], cap));
    return reg;
}

void SolverConfig::validate() const
{
    if (!(inner_tol > 0.0)) throw std::invalid_argument("solver: inner_tol must be > 0");
    if (!(outer_tol > 0.0)) throw std::invalid_argument("solver: outer_tol must be > 0");
    if (!(damping > 0.0 && damping <= 1.0)) throw std::invalid_argument("solver: damping must lie in (0,1]");
    if (max_inner_iters == 0 || max_outer_iters == 0) throw std::invalid_argument("solver: iteration budgets must be > 0");
    if (n_schedule.empty()) throw std::invalid_argument("solver: n_schedule must not be empty");
    for (std::size_t k = 0; k < n_schedule.size(); ++k) {
        if (n_schedule[k] < 1) throw std::invalid_argument("solver: n_schedule entries must be positive");
        if (k > 0 && n_schedule[k] <= n_schedule[k - 1])
            throw std::invalid_argument("solver: n_schedule must be strictly increasing");
    }
}

InnerSolve solve_dirichlet(const KernelWeights& weights, const Field& F, const SolverConfig& config,
                           const std::optional<Field>& warm)
{
    if (F.domain() != weights.domain()) throw std::invalid_argument("solve_dirichlet: domain mismatch");
    if (!F.nonnegative()) throw std::invalid_argument("solve_dirichlet: right-hand side has negative entries");
    if (warm && warm->domain() != weights.domain())
        throw std::invalid_argument("solve_dirichlet: warm start on a different domain");

    const double vol = weights.grid().cell_volume();
    const double inv_p = 1.0 / weights.p();
    const std::vector<double> load = F.interior_values();
    Objective objective = [&](std::span<const double> x, std::span<double> g) {
        double value = inv_p * weights.energy_and_gradient(x, g);
        for (std::size_t a = 0; a < x.size(); ++a) {
            value -= vol * load[a] * x[a];
            g[a] -= vol * load[a];
        }
        return value;
    };

    std::vector<double> x0 = warm ? warm->interior_values() : std::vector<double>(weights.unknowns(), 0.0);
    const MinimizeResult res = lbfgs_minimize(objective, std::move(x0), inner_options(config, vol));

    InnerSolve out{Field::from_interior(weights.domain(), res.x)};
    out.converged = res.converged;
    out.iterations = res.iterations;
    out.residual = res.grad_norm / vol;
    const double scale = std::max(out.u.sup_norm(), 1.0);
    out.nonnegative = out.u.min() >= -1e-12 * scale;
    return out;
}

Field regularized_rhs(const ProblemSpec& prob, const RegularizedProblem& reg, const Field& u)
{
    require_same_domain(prob.f, u, "regularized_rhs");
    Field F(u.domain());
    for (std::size_t i : u.grid().interior_indices())
        F.set(i, regularized_quotient(reg.f_n[i], u[i], prob.gamma, reg.shift));
    return F;
}

FixedPointResult fixed_point(const ProblemSpec& prob, const RegularizedProblem& reg, const KernelWeights& weights,
                             const SolverConfig& config, const Field& init)
{
    require_same_domain(prob.f, init, "fixed_point");
    if (!init.nonnegative()) throw std::invalid_argument("fixed_point: initial field must be nonnegative");

    FixedPointResult res{init, false, 0, 0, config.damping, {}, 0.0};
    double theta = config.damping;
    for (int attempt = 0; attempt < 2; ++attempt) {
        Field u = init;
        res.increments.clear();
        int growth_streak = 0;
        for (std::size_t k = 0; k < config.max_outer_iters; ++k) {
            const Field F = regularized_rhs(prob, reg, u);
            const InnerSolve inner = solve_dirichlet(weights, F, config, u);
            res.inner_iterations += inner.iterations;
            Field next(u.domain());
            for (std::size_t i : u.grid().interior_indices())
                next.set(i, (1.0 - theta) * u[i] + theta * inner.u[i]);
            const double inc = sup_distance(next, u);
            res.increments.push_back(inc);
            u = std::move(next);
            res.iterations = k + 1;
            if (inc <= config.outer_tol && inner.converged) {
                res.converged = true;
                break;
            }
            // oscillation guard: halve damping after three consecutive increases
            const std::size_t m = res.increments.size();
            growth_streak = (m >= 2 && res.increments[m - 1] > res.increments[m - 2]) ? growth_streak + 1 : 0;
            if (growth_streak >= 3 && theta > 1e-4) {
                theta *= 0.5;
                growth_streak = 0;
            }
        }
        res.u = std::move(u);
        res.damping = theta;
        if (res.converged) break;
        theta *= 0.5;
    }
    res.residual = regularized_residual(prob, reg, weights, res.u);
    return res;
}

FixedPointResult solve_regularized(const ProblemSpec& prob, const RegularizedProblem& reg,
                                   const KernelWeights& weights, const SolverConfig& config, const Field& init)
{
    if (config.method == FixedPointMethod::Picard) return fixed_point(prob, reg, weights, config, init);

    // The regularized equation is the Euler-Lagrange equation of
    //   E_n(u) = (1/p)[u]^p - sum_i f_{n,i} G_n(u_i) h^N,  G_n' = (u^+ + 1/n)^{-gamma},
    // and G_n is concave, so E_n is convex with a unique minimizer.
    require_same_domain(prob.f, init, "solve_regularized");
    const double vol = weights.grid().cell_volume();
    const double inv_p = 1.0 / weights.p();
    const std::vector<double> fn = reg.f_n.interior_values();
    const double gamma = prob.gamma;
    const double inv_n = reg.shift;
    Objective objective = [&](std::span<const double> x, std::span<double> g) {
        double value = inv_p * weights.energy_and_gradient(x, g);
        for (std::size_t a = 0; a < x.size(); ++a) {
            if (fn[a] == 0.0) continue;
            const double G = gamma == 0.0 ? x[a] : regularized_primitive(x[a], gamma, inv_n);
            value -= vol * fn[a] * G;
            g[a] -= vol * regularized_quotient(fn[a], x[a], gamma, inv_n);
        }
        return value;
    };
    const MinimizeResult res = lbfgs_minimize(objective, init.interior_values(), inner_options(config, vol));

    Field start = Field::from_interior(weights.domain(), res.x);
    // Clamp rounding-level negatives so the Picard precondition holds.
    for (std::size_t i : start.grid().interior_indices())
        if (start[i] < 0.0) start.set(i, 0.0);
    FixedPointResult cert = fixed_point(prob, reg, weights, config, start);
    cert.inner_iterations += res.iterations;
    cert.converged = cert.converged && res.converged;
    return cert;
}

Field power_field(const Field& u, double q)
{
    Field out(u.domain());
    for (std::size_t i : u.grid().interior_indices()) out.set(i, std::pow(std::max(u[i], 0.0), q));
    return out;
}

double geometric_tail_estimate(const std::vector<double>& increments)
{
    if (increments.empty()) return std::numeric_limits<double>::infinity();
    const double last = increments.back();
    if (last == 0.0) return 0.0;
    if (increments.size() < 2) return std::numeric_limits<double>::infinity();
    const double prev = increments[increments.size() - 2];
    if (!(prev > 0.0)) return std::numeric_limits<double>::infinity();
    const double rho = last / prev;
    if (!(rho < 1.0)) return std::numeric_limits<double>::infinity();
    return last * rho / (1.0 - rho);
}

SolveReport solve_singular(const ProblemSpec& prob, const KernelWeights& weights, const SolverConfig& config,
                           const std::optional<Field>& init)
{
    config.validate();
    if (prob.f.domain() != weights.domain()) throw std::invalid_argument("solve_singular: domain mismatch");
    if (weights.p() != prob.p || weights.s() != prob.s)
        throw std::invalid_argument("solve_singular: kernel assembled for different (s, p)");

    const auto t0 = Clock::now();
    const GridDomain& grid = weights.grid();
    SolveReport report{Field(weights.domain()), {}, {}, {}, 1.0, 0.0, 0.0, std::nullopt, true, false, {}, 0.0};
    report.subset = inner_subset(grid);
    report.boundary_exponent = prob.boundary_exponent();

    if (prob.f.max() == 0.0) {
        report.degenerate_source = true;
        report.notes.push_back("source vanishes identically: u = 0 and the positivity constraint u > 0 fails");
        for (long n : config.n_schedule) {
            StageRecord rec;
            rec.n = n;
            rec.converged = true;
            rec.fixed_point_iterations = 1;
            report.stages.push_back(rec);
            report.stage_solutions.push_back(report.solution);
        }
        report.residual = std::numeric_limits<double>::quiet_NaN();
        report.extrapolation_error = 0.0;
        report.extrapolated = report.solution;
        report.seconds = seconds_since(t0);
        return report;
    }

    Field current = init ? *init : Field(weights.domain());
    std::vector<double> increments;
    for (std::size_t k = 0; k < config.n_schedule.size(); ++k) {
        const auto ts = Clock::now();
        const long n = config.n_schedule[k];
        const RegularizedProblem reg = RegularizedProblem::make(prob, n);
        FixedPointResult fp = solve_regularized(prob, reg, weights, config, current);

        StageRecord rec;
        rec.n = n;
        rec.converged = fp.converged;
        rec.inner_iterations = fp.inner_iterations;
        rec.fixed_point_iterations = fp.iterations;
        if (k > 0) {
            rec.sup_increment = sup_distance(fp.u, current);
            rec.min_increment = -max_excess(current, fp.u);
            increments.push_back(rec.sup_increment);
        }
        rec.seminorm = seminorm_p(weights, fp.u);
        rec.seminorm_qb = seminorm_p(weights, power_field(fp.u, report.boundary_exponent));
        rec.interior_min = subset_min(fp.u, report.subset);
        rec.residual = fp.residual;
        rec.seconds = seconds_since(ts);
        if (!fp.converged) {
            report.converged = false;
            report.notes.push_back("stage n=" + std::to_string(n) + " did not converge");
        }
        report.stages.push_back(rec);
        report.stage_solutions.push_back(fp.u);
        current = std::move(fp.u);
    }
    report.solution = current;

    report.extrapolation_error = geometric_tail_estimate(increments);
    const std::size_t K = report.stage_solutions.size();
    if (K >= 3 && std::isfinite(report.extrapolation_error) && increments.size() >= 2) {
        const double rho = increments.back() / increments[increments.size() - 2];
        const Field& a = report.stage_solutions[K - 2];
        const Field& b = report.stage_solutions[K - 1];
        Field ext(b.domain());
        for (std::size_t i : b.grid().interior_indices()) ext.set(i, b[i] + (b[i] - a[i]) * rho / (1.0 - rho));
        report.extrapolated = std::move(ext);
    }

    if (subset_min(report.solution, report.subset) > 0.0) {
        report.residual = weak_residual(weights, report.solution, prob.f, prob.gamma, report.subset);
    } else {
        report.residual = std::numeric_limits<double>::quiet_NaN();
        report.notes.push_back("solution vanishes on the interior test set");
    }
    report.seconds = seconds_since(t0);
    return report;
}

SolveReport solve_singular(const ProblemSpec& prob, const SolverConfig& config)
{
    const KernelWeights weights = KernelWeights::assemble(prob.f.domain(), prob.s, prob.p, AssumptionPolicy::Borderline);
    return solve_singular(prob, weights, config);
}

} // namespace fracsing
