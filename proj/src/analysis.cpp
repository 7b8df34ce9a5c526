#include "fracsing/analysis.hpp"

#include "fracsing/minimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>

namespace fracsing {

namespace {

double signed_pow(double t, double e)
{
    return t >= 0.0 ? std::pow(t, e) : -std::pow(-t, e);
}

void require_weights_domain(const KernelWeights& weights, const Field& u, const char* what)
{
    if (u.domain() != weights.domain()) throw std::invalid_argument(std::string(what) + ": domain mismatch");
}

Field positive_part_shift(const Field& u, double eps)
{
    Field out(u.domain());
    for (std::size_t i : u.grid().interior_indices()) out.set(i, std::max(u[i] - eps, 0.0));
    return out;
}

} // namespace

const char* to_string(CheckStatus status)
{
    switch (status) {
    case CheckStatus::Pass: return "pass";
    case CheckStatus::Fail: return "fail";
    case CheckStatus::Inconclusive: return "inconclusive";
    case CheckStatus::PreconditionRejected: return "rejected";
    }
    return "unknown";
}

double power_gap_slack(double q, double eps, double x, double y)
{
    return std::abs(std::pow(x, q) - std::pow(y, q)) - std::pow(eps, q - 1.0) * std::abs(x - y);
}

PowerGapReport lemma_dino_check(double q, double eps, std::size_t samples, std::uint64_t seed)
{
    if (!(q >= 1.0) || !std::isfinite(q)) throw std::invalid_argument("power gap: q must be >= 1");
    if (!(eps > 0.0) || !std::isfinite(eps)) throw std::invalid_argument("power gap: eps must be > 0");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(0.0, 10.0 * eps);
    PowerGapReport report;
    report.samples = samples;
    report.min_slack = std::numeric_limits<double>::infinity();
    const double c = std::pow(eps, q - 1.0);
    for (std::size_t k = 0; k < samples; ++k) {
        double x = 0.0, y = 0.0;
        do {
            x = dist(rng);
            y = dist(rng);
        } while (x < eps && y < eps);
        const double lhs = std::abs(std::pow(x, q) - std::pow(y, q));
        const double rhs = c * std::abs(x - y);
        const double slack = lhs - rhs;
        report.min_slack = std::min(report.min_slack, slack);
        if (slack < -1e-12 * (lhs + rhs)) ++report.violations;
    }
    if (samples == 0) report.min_slack = 0.0;
    return report;
}

double ConvexMap::value(double t) const
{
    if (kind == Kind::Power) return std::pow(std::max(t, 0.0), parameter);
    return std::expm1(parameter * t) / parameter;
}

double ConvexMap::derivative(double t) const
{
    if (kind == Kind::Power) {
        if (parameter == 1.0) return 1.0;
        return parameter * std::pow(std::max(t, 0.0), parameter - 1.0);
    }
    return std::exp(parameter * t);
}

void ConvexMap::require_convex_on(double lo, double hi) const
{
    if (kind == Kind::Power) {
        if (!(parameter >= 1.0)) throw std::invalid_argument("convex map: t^q needs q >= 1");
        if (lo < 0.0) throw std::invalid_argument("convex map: t^q is only used on t >= 0");
    } else if (!(parameter > 0.0)) {
        throw std::invalid_argument("convex map: exponential rate must be > 0");
    }
    if (!(lo <= hi)) throw std::invalid_argument("convex map: empty range");
}

ConvexityReport convexity_inequality_check(const KernelWeights& weights, const Field& u, const Field& F,
                                           const ConvexMap& map, const Field& phi, double inner_tol)
{
    require_weights_domain(weights, u, "convexity check");
    require_same_domain(u, F, "convexity check");
    require_same_domain(u, phi, "convexity check");
    if (!phi.nonnegative()) throw std::invalid_argument("convexity check: test function must be nonnegative");
    const double scale = std::max(1.0, u.sup_norm());
    map.require_convex_on(std::max(u.min(), u.min() >= -1e-12 * scale ? 0.0 : u.min()), u.max());

    Field mapped(u.domain());
    for (std::size_t i : u.grid().interior_indices()) mapped.set(i, map.value(u[i]));
    const Field A_mapped = apply_operator(weights, mapped);
    const double vol = u.grid().cell_volume();
    const double p = weights.p();

    ConvexityReport report;
    double weight_sum = 0.0;
    for (std::size_t i : u.grid().interior_indices()) {
        const double d = map.derivative(u[i]);
        report.slack += A_mapped[i] / vol * phi[i] - F[i] * signed_pow(d, p - 1.0) * phi[i];
        weight_sum += std::pow(std::abs(d), p - 1.0) * phi[i];
    }
    report.bound = 10.0 * inner_tol * weight_sum;
    return report;
}

bool BoundaryDatumReport::holds(double tol) const
{
    return std::all_of(entries.begin(), entries.end(),
                       [tol](const BoundaryDatumEntry& e) { return e.slack >= -tol * std::max(1.0, e.rhs); });
}

BoundaryDatumReport boundary_datum_check(const KernelWeights& weights, const Field& u, double gamma,
                                         const std::vector<double>& eps_list)
{
    require_weights_domain(weights, u, "boundary datum check");
    if (!(gamma >= 0.0)) throw std::invalid_argument("boundary datum check: gamma must be >= 0");
    if (!u.nonnegative()) throw std::invalid_argument("boundary datum check: u must be nonnegative");
    const double p = weights.p();
    const double base = gamma > 1.0 ? seminorm_p(weights, power_field(u, (gamma + p - 1.0) / p))
                                     : seminorm_p(weights, u);
    BoundaryDatumReport report;
    for (double eps : eps_list) {
        if (!(eps > 0.0) || !std::isfinite(eps)) throw std::invalid_argument("boundary datum check: eps must be > 0");
        BoundaryDatumEntry e;
        e.eps = eps;
        e.lhs = seminorm_p(weights, positive_part_shift(u, eps));
        e.rhs = gamma > 1.0 ? std::pow(eps, 1.0 - gamma) * base : base;
        e.slack = e.rhs - e.lhs;
        report.entries.push_back(e);
    }
    return report;
}

SeminormPairReport lifted_seminorm_check(const KernelWeights& weights, const Field& u, double gamma)
{
    require_weights_domain(weights, u, "lifted seminorm check");
    if (!(gamma > 1.0)) throw std::invalid_argument("lifted seminorm check: requires gamma > 1");
    if (!u.nonnegative()) throw std::invalid_argument("lifted seminorm check: u must be nonnegative");
    const double p = weights.p();
    const double p_lift = gamma + p - 1.0;
    const double s_lift = weights.s() * p / p_lift;
    const KernelWeights lifted = KernelWeights::assemble(weights.domain(), s_lift, p_lift, AssumptionPolicy::Off);
    SeminormPairReport report;
    report.lhs = seminorm_p(lifted, u);
    report.rhs = seminorm_p(weights, power_field(u, p_lift / p));
    report.slack = report.rhs - report.lhs;
    return report;
}

TruncationKit TruncationKit::make(double gamma, double k, double eps, double tau)
{
    TruncationKit kit{k, gamma, eps, tau};
    kit.validate();
    return kit;
}

void TruncationKit::validate() const
{
    if (!(k > 0.0) || !std::isfinite(k)) throw std::invalid_argument("truncation: k must be > 0");
    if (!(beta >= 0.0) || !std::isfinite(beta)) throw std::invalid_argument("truncation: beta must be >= 0");
    if (!(eps > 0.0)) throw std::invalid_argument("truncation: eps must be > 0");
    if (!(tau > 0.0)) throw std::invalid_argument("truncation: tau must be > 0");
}

bool TruncationKit::eps_below_kink() const { return std::pow(eps, -beta) < k; }

double truncation_g(const TruncationKit& kit, double s)
{
    if (s <= 0.0) return kit.k;
    return std::min(std::pow(s, -kit.beta), kit.k);
}

double truncation_Phi(const TruncationKit& kit, double s)
{
    // g_k = k below the kink s_k = k^{-1/beta} and s^{-beta} above it.
    const double beta = kit.beta;
    const double kink = beta > 0.0 ? std::pow(kit.k, -1.0 / beta) : 0.0;
    auto power_part = [beta](double t) {
        return beta == 1.0 ? std::log(t) : (std::pow(t, 1.0 - beta) - 1.0) / (1.0 - beta);
    };
    auto antiderivative = [&](double t) {
        if (beta == 0.0) return std::min(kit.k, 1.0) * t;
        return t <= kink ? kit.k * t : kit.k * kink + power_part(t) - power_part(kink);
    };
    return antiderivative(s) - antiderivative(1.0);
}

double truncation_T(const TruncationKit& kit, double s)
{
    return s >= 0.0 ? std::min(s, kit.tau) : -std::min(-s, kit.tau);
}

TruncatedResult truncated_minimize(const KernelWeights& weights, const Field& f, const Field& v,
                                   const TruncationKit& kit, const SolverConfig& config)
{
    require_weights_domain(weights, f, "truncated minimize");
    require_same_domain(f, v, "truncated minimize");
    kit.validate();
    if (!f.nonnegative()) throw std::invalid_argument("truncated minimize: f must be nonnegative");
    if (!v.nonnegative()) throw std::invalid_argument("truncated minimize: upper obstacle must be nonnegative");

    const double vol = weights.grid().cell_volume();
    const double inv_p = 1.0 / weights.p();
    const std::vector<double> load = f.interior_values();
    Objective objective = [&](std::span<const double> x, std::span<double> g) {
        double value = inv_p * weights.energy_and_gradient(x, g);
        for (std::size_t a = 0; a < x.size(); ++a) {
            if (load[a] == 0.0) continue;
            value -= vol * load[a] * truncation_Phi(kit, x[a]);
            g[a] -= vol * load[a] * truncation_g(kit, x[a]);
        }
        return value;
    };

    const std::vector<double> upper = v.interior_values();
    const std::vector<double> lower(upper.size(), 0.0);
    MinimizeOptions opts;
    opts.grad_tol = config.inner_tol * vol;
    opts.max_iters = config.max_inner_iters;
    const MinimizeResult res = projected_gradient_minimize(objective, upper, lower, upper, opts);

    TruncatedResult out{Field::from_interior(weights.domain(), res.x)};
    out.converged = res.converged;
    out.iterations = res.iterations;
    out.projected_residual = res.grad_norm / vol;
    return out;
}

double variational_inequality_defect(const KernelWeights& weights, const Field& f, const TruncationKit& kit,
                                     const Field& w, const Field& psi)
{
    require_weights_domain(weights, w, "variational inequality");
    require_same_domain(w, f, "variational inequality");
    require_same_domain(w, psi, "variational inequality");
    const Field Aw = apply_operator(weights, w);
    const double vol = w.grid().cell_volume();
    double total = 0.0;
    for (std::size_t i : w.grid().interior_indices())
        total += (Aw[i] / vol - f[i] * truncation_g(kit, w[i])) * (psi[i] - w[i]);
    return total;
}

ResidualSpread screen_residual(const KernelWeights& weights, const ProblemSpec& prob, const Field& u,
                               const ScreenOptions& screen)
{
    require_weights_domain(weights, u, "screen");
    require_same_domain(prob.f, u, "screen");
    const CompactSubset subset = screen.subset ? *screen.subset : inner_subset(u.grid());
    if (subset.node_indices.empty()) throw std::invalid_argument("screen: empty test set");
    const Field Au = apply_operator(weights, u);
    const double vol = u.grid().cell_volume();
    const double inf = std::numeric_limits<double>::infinity();
    ResidualSpread spread{0.0, -inf, inf};
    for (std::size_t i : subset.node_indices) {
        double rhs = 0.0;
        if (screen.level > 0) {
            const double n = static_cast<double>(screen.level);
            rhs = std::min(prob.f[i], n) * std::pow(std::max(u[i], 0.0) + 1.0 / n, -prob.gamma);
        } else if (prob.f[i] > 0.0) {
            rhs = u[i] > 0.0 ? prob.f[i] * std::pow(u[i], -prob.gamma) : inf;
        }
        const double r = Au[i] / vol - rhs;
        spread.max = std::max(spread.max, r);
        spread.min = std::min(spread.min, r);
        spread.max_abs = std::max(spread.max_abs, std::abs(r));
    }
    return spread;
}

ComparisonVerdict comparison_check(const Field& u_sub, const Field& v_super, const ProblemSpec& prob,
                                   const KernelWeights& weights, const TruncationKit& kit,
                                   const SolverConfig& config, const ScreenOptions& screen)
{
    require_same_domain(u_sub, v_super, "comparison");
    kit.validate();
    ComparisonVerdict verdict;
    verdict.status = CheckStatus::PreconditionRejected;
    verdict.max_violation = max_excess(u_sub, v_super);
    if (!kit.eps_below_kink()) {
        verdict.message = "truncation level too low: eps^{-beta} must be below k";
        return verdict;
    }
    if (!v_super.nonnegative()) {
        verdict.message = "supersolution must be nonnegative";
        return verdict;
    }
    verdict.sub_residual = screen_residual(weights, prob, u_sub, screen).max;
    verdict.super_residual = screen_residual(weights, prob, v_super, screen).min;
    if (verdict.sub_residual > screen.tol) {
        verdict.message = "not a subsolution: residual " + std::to_string(verdict.sub_residual);
        return verdict;
    }
    if (verdict.super_residual < -screen.tol) {
        verdict.message = "not a supersolution: residual " + std::to_string(verdict.super_residual);
        return verdict;
    }

    TruncatedResult tr = truncated_minimize(weights, prob.f, v_super, kit, config);
    double gap = -std::numeric_limits<double>::infinity();
    for (std::size_t i : u_sub.grid().interior_indices()) gap = std::max(gap, u_sub[i] - tr.w[i] - kit.eps);
    verdict.truncated_gap = gap;
    if (!tr.converged) {
        verdict.status = CheckStatus::Inconclusive;
        verdict.message = "truncated minimization did not converge";
    } else if (gap <= 10.0 * config.outer_tol) {
        verdict.status = CheckStatus::Pass;
    } else {
        verdict.status = CheckStatus::Fail;
        verdict.message = "u_sub exceeds w + eps by " + std::to_string(gap);
    }
    verdict.w = std::move(tr.w);
    return verdict;
}

UniquenessVerdict uniqueness_check(const ProblemSpec& prob, const KernelWeights& weights, const SolverConfig& config)
{
    config.validate();
    UniquenessVerdict verdict;
    verdict.schedule_a = config.n_schedule;
    const long n_max = config.n_schedule.back();
    for (long n : config.n_schedule)
        if (3 * n <= 2 * n_max || verdict.schedule_b.empty()) verdict.schedule_b.push_back(3 * n);

    const SolveReport a = solve_singular(prob, weights, config);

    SolverConfig config_b = config;
    config_b.n_schedule = verdict.schedule_b;
    // Start the second run from above: the solve for the largest admissible right-hand side.
    const RegularizedProblem first = RegularizedProblem::make(prob, verdict.schedule_b.front());
    Field top(first.f_n.domain());
    const double lift = std::pow(static_cast<double>(first.n), prob.gamma);
    for (std::size_t i : top.grid().interior_indices()) top.set(i, first.f_n[i] * lift);
    Field init = solve_dirichlet(weights, top, config_b).u;
    for (std::size_t i : init.grid().interior_indices())
        if (init[i] < 0.0) init.set(i, 0.0);
    const SolveReport b = solve_singular(prob, weights, config_b, init);

    verdict.distance = sup_distance(a.solution, b.solution);
    verdict.gap = a.extrapolation_error + b.extrapolation_error;
    verdict.tolerance = 10.0 * (config.outer_tol + verdict.gap);
    verdict.extrapolated_distance = (a.extrapolated && b.extrapolated)
                                        ? sup_distance(*a.extrapolated, *b.extrapolated)
                                        : std::numeric_limits<double>::quiet_NaN();
    if (a.degenerate_source) {
        verdict.status = verdict.distance == 0.0 ? CheckStatus::Pass : CheckStatus::Fail;
    } else if (!a.converged || !b.converged || !std::isfinite(verdict.gap)) {
        verdict.status = CheckStatus::Inconclusive;
    } else {
        verdict.status = verdict.distance <= verdict.tolerance ? CheckStatus::Pass : CheckStatus::Fail;
    }
    return verdict;
}

SymmetryVerdict symmetry_check(const ProblemSpec& prob, const KernelWeights& weights, const SolverConfig& config,
                               std::vector<Hyperplane> axes)
{
    const GridDomain& grid = weights.grid();
    if (axes.empty()) axes = grid.symmetry_axes();
    SymmetryVerdict verdict;
    if (axes.empty()) {
        verdict.status = CheckStatus::PreconditionRejected;
        verdict.message = "no symmetry axes declared";
        return verdict;
    }
    std::vector<std::vector<std::size_t>> perms;
    const double ftol = 1e-12 * std::max(1.0, prob.f.max());
    for (const Hyperplane& axis : axes) {
        perms.push_back(grid.reflect(axis));
        const auto& perm = perms.back();
        for (std::size_t i = 0; i < perm.size(); ++i) {
            if (std::abs(prob.f[i] - prob.f[perm[i]]) > ftol) {
                verdict.status = CheckStatus::PreconditionRejected;
                verdict.message = "source not symmetric about " + axis.describe();
                return verdict;
            }
        }
    }
    const SolveReport report = solve_singular(prob, weights, config);
    for (const auto& perm : perms) {
        double a = 0.0;
        for (std::size_t i = 0; i < perm.size(); ++i)
            a = std::max(a, std::abs(report.solution[i] - report.solution[perm[i]]));
        verdict.asymmetry.push_back(a);
        verdict.max_asymmetry = std::max(verdict.max_asymmetry, a);
    }
    if (!report.converged) {
        verdict.status = CheckStatus::Inconclusive;
        verdict.message = "limit run did not converge";
    } else {
        verdict.status = verdict.max_asymmetry <= 10.0 * config.outer_tol ? CheckStatus::Pass : CheckStatus::Fail;
    }
    return verdict;
}

MonotonicityVerdict monotonicity_check(const SolveReport& report, double outer_tol)
{
    MonotonicityVerdict verdict;
    if (report.stages.size() < 2) return verdict;
    verdict.min_increment = std::numeric_limits<double>::infinity();
    verdict.interior_min_drop = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 1; k < report.stages.size(); ++k) {
        verdict.min_increment = std::min(verdict.min_increment, report.stages[k].min_increment);
        verdict.interior_min_drop = std::max(verdict.interior_min_drop,
                                             report.stages[k - 1].interior_min - report.stages[k].interior_min);
    }
    verdict.interior_positive = report.stages.front().interior_min > 0.0;
    const bool all_converged = std::all_of(report.stages.begin(), report.stages.end(),
                                           [](const StageRecord& r) { return r.converged; });
    if (!all_converged) {
        verdict.status = CheckStatus::Inconclusive;
    } else {
        const double tol = 10.0 * outer_tol;
        const bool ok = verdict.min_increment >= -tol && verdict.interior_min_drop <= tol &&
                        verdict.interior_positive;
        verdict.status = ok ? CheckStatus::Pass : CheckStatus::Fail;
    }
    return verdict;
}

AprioriVerdict apriori_check(const SolveReport& report, const ProblemSpec& prob)
{
    AprioriVerdict verdict;
    const double mass = prob.f.integral();
    if (report.degenerate_source || !(mass > 0.0) || report.stages.empty()) return verdict;
    const double inv_p = 1.0 / prob.p;
    const std::size_t K = report.stages.size();

    if (prob.gamma == 1.0) {
        const double scale = std::pow(mass, inv_p);
        for (const StageRecord& r : report.stages) {
            verdict.constants.push_back(std::pow(r.seminorm, inv_p));
            verdict.ratio = std::max(verdict.ratio, verdict.constants.back() / scale);
        }
        verdict.threshold = 1.05;
    } else if (prob.gamma < 1.0) {
        if (K < 2) return verdict;
        for (const StageRecord& r : report.stages) verdict.constants.push_back(std::pow(r.seminorm, inv_p));
        verdict.ratio = std::abs(verdict.constants[K - 1] / verdict.constants[K - 2] - 1.0);
        verdict.threshold = 0.05;
    } else {
        if (K < 3) return verdict;
        for (const StageRecord& r : report.stages) verdict.constants.push_back(r.seminorm_qb / mass);
        const auto first = verdict.constants.end() - 3;
        const auto [lo, hi] = std::minmax_element(first, verdict.constants.end());
        verdict.ratio = *lo > 0.0 ? *hi / *lo : std::numeric_limits<double>::infinity();
        verdict.threshold = 1.2;
    }
    verdict.status = verdict.ratio <= verdict.threshold ? CheckStatus::Pass : CheckStatus::Fail;
    return verdict;
}

} // namespace fracsing
