#ifndef FRACSING_SOLVER_HPP
#define FRACSING_SOLVER_HPP

#include "fracsing/field.hpp"
#include "fracsing/kernel.hpp"

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace fracsing {

/// (p, s, gamma) and a nonnegative source on a grid.
struct ProblemSpec {
    double p = 2.0;
    double s = 0.5;
    double gamma = 1.0;
    Field f;

    /// Validates ranges, N > sp and f >= 0. gamma = 0 is accepted as the
    /// non-singular limiting case.
    static ProblemSpec make(double p, double s, double gamma, Field f);

    int dim() const { return f.grid().dim(); }
    /// max{(gamma + p - 1)/p, 1}
    double boundary_exponent() const;
    double p_star() const;
};

/// Truncation level n with source min{f, n} and shift 1/n.
struct RegularizedProblem {
    long n = 1;
    Field f_n;
    double shift = 1.0;

    static RegularizedProblem make(const ProblemSpec& prob, long n);
};

enum class FixedPointMethod {
    /// Damped Picard iteration u <- (1-theta) u + theta S(u) from the given start.
    Picard,
    /// Minimize the convex regularized energy, then certify with Picard steps.
    Energy,
};

struct SolverConfig {
    /// Nodal residual tolerance: ||Au - F h^N||_inf <= inner_tol h^N.
    double inner_tol = 1e-10;
    /// Sup-norm tolerance between successive fixed-point iterates.
    double outer_tol = 1e-7;
    std::size_t max_inner_iters = 50000;
    std::size_t max_outer_iters = 400;
    std::vector<long> n_schedule{1, 2, 4, 8, 16, 32, 64};
    double damping = 1.0;
    FixedPointMethod method = FixedPointMethod::Energy;
    std::size_t lbfgs_memory = 12;

    /// Throws std::invalid_argument on nonpositive tolerances, bad damping or a non-increasing schedule.
    void validate() const;
};

struct InnerSolve {
    Field u;
    bool converged = false;
    bool nonnegative = true;
    std::size_t iterations = 0;
    /// ||Au - F h^N||_inf / h^N at return.
    double residual = 0.0;
};

/// Minimizes (1/p)[u]^p - sum F_i u_i h^N over exterior-zero fields.
InnerSolve solve_dirichlet(const KernelWeights& weights, const Field& F, const SolverConfig& config,
                           const std::optional<Field>& warm = std::nullopt);

/// F_i = f_{n,i} / (max{u_i, 0} + 1/n)^gamma.
Field regularized_rhs(const ProblemSpec& prob, const RegularizedProblem& reg, const Field& u);

struct FixedPointResult {
    Field u;
    bool converged = false;
    std::size_t iterations = 0;
    std::size_t inner_iterations = 0;
    double damping = 1.0;
    /// ||u^{k+1} - u^k||_inf per iteration.
    std::vector<double> increments;
    /// Residual of the regularized equation, ||Au/h^N - F(u)||_inf.
    double residual = 0.0;
};

/// Damped Picard iteration for the regularized problem. On budget exhaustion
/// the damping is halved once and the iteration restarted from `init`.
FixedPointResult fixed_point(const ProblemSpec& prob, const RegularizedProblem& reg, const KernelWeights& weights,
                             const SolverConfig& config, const Field& init);

/// Solves the regularized problem with config.method.
FixedPointResult solve_regularized(const ProblemSpec& prob, const RegularizedProblem& reg,
                                   const KernelWeights& weights, const SolverConfig& config, const Field& init);

struct StageRecord {
    long n = 0;
    bool converged = false;
    std::size_t inner_iterations = 0;
    std::size_t fixed_point_iterations = 0;
    /// ||u_n - u_prev||_inf (0 for the first stage).
    double sup_increment = 0.0;
    /// min_i (u_n - u_prev)_i (0 for the first stage).
    double min_increment = 0.0;
    double seminorm = 0.0;
    /// [u_n^{q_b}]^p
    double seminorm_qb = 0.0;
    double interior_min = 0.0;
    double residual = 0.0;
    double seconds = 0.0;
};

struct SolveReport {
    Field solution;
    std::vector<StageRecord> stages;
    std::vector<Field> stage_solutions;
    CompactSubset subset;
    double boundary_exponent = 1.0;
    /// Residual of the singular equation on the subset (NaN when u vanishes there).
    double residual = 0.0;
    /// Estimated ||u_inf - u_{n_max}||_inf from the last three stages (inf if not contracting).
    double extrapolation_error = 0.0;
    std::optional<Field> extrapolated;
    bool converged = true;
    bool degenerate_source = false;
    std::vector<std::string> notes;
    double seconds = 0.0;
};

/// Runs the regularized problems along config.n_schedule, warm-starting each
/// stage from the previous solution (or from `init` for the first stage).
SolveReport solve_singular(const ProblemSpec& prob, const KernelWeights& weights, const SolverConfig& config,
                           const std::optional<Field>& init = std::nullopt);

SolveReport solve_singular(const ProblemSpec& prob, const SolverConfig& config);

/// Tail estimate delta_K rho / (1 - rho) from successive stage distances.
double geometric_tail_estimate(const std::vector<double>& increments);

/// Pointwise u^q for nonnegative u (negative values clamp to 0).
Field power_field(const Field& u, double q);

} // namespace fracsing

#endif
