#ifndef FRACSING_ANALYSIS_HPP
#define FRACSING_ANALYSIS_HPP

#include "fracsing/exponents.hpp"
#include "fracsing/field.hpp"
#include "fracsing/kernel.hpp"
#include "fracsing/solver.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace fracsing {

enum class CheckStatus { Pass, Fail, Inconclusive, PreconditionRejected };

const char* to_string(CheckStatus status);

/// One line of a verification report.
struct CheckResult {
    std::string name;
    /// Short statement of the property being checked.
    std::string anchor;
    CheckStatus status = CheckStatus::Inconclusive;
    /// Signed distance from the pass threshold; >= 0 means inside.
    double margin = 0.0;
    std::string message;
    std::map<std::string, double> metrics;
};

// ---------------------------------------------------------------------------
// Elementary inequality |x^q - y^q| >= eps^{q-1} |x - y| when max{x, y} >= eps.

struct PowerGapReport {
    std::size_t samples = 0;
    std::size_t violations = 0;
    /// Smallest observed |x^q - y^q| - eps^{q-1}|x - y|.
    double min_slack = 0.0;
};

/// Slack |x^q - y^q| - eps^{q-1}|x - y| for a single pair.
double power_gap_slack(double q, double eps, double x, double y);

/// Uniform samples from [0, 10 eps]^2 restricted to {x >= eps or y >= eps}.
PowerGapReport lemma_dino_check(double q, double eps, std::size_t samples, std::uint64_t seed = 0x5eed);

// ---------------------------------------------------------------------------
// Convex transformations of solutions.

/// Convex map with Phi(0) = 0: t^q (q >= 1) or (e^{a t} - 1)/a (a > 0).
struct ConvexMap {
    enum class Kind { Power, Exponential } kind = Kind::Power;
    double parameter = 1.0;

    static ConvexMap power(double q) { return {Kind::Power, q}; }
    static ConvexMap exponential(double a) { return {Kind::Exponential, a}; }

    double value(double t) const;
    double derivative(double t) const;
    /// Throws std::invalid_argument if the map is not convex on [lo, hi].
    void require_convex_on(double lo, double hi) const;
};

struct ConvexityReport {
    /// (<A Phi(u), phi> - sum F_i J(Phi'(u_i)) phi_i h^N) / h^N
    double slack = 0.0;
    /// 10 * inner_tol * sum |Phi'(u_i)|^{p-1} phi_i
    double bound = 0.0;
    bool holds() const { return slack <= bound; }
};

/// Discrete form of <A Phi(u), phi> <= <A u, J(Phi'(u)) phi> for a converged solve u of A u = F h^N.
ConvexityReport convexity_inequality_check(const KernelWeights& weights, const Field& u, const Field& F,
                                           const ConvexMap& map, const Field& phi, double inner_tol);

// ---------------------------------------------------------------------------
// Boundary datum: [(u - eps)^+]^p <= eps^{1-gamma} [u^{(gamma+p-1)/p}]^p for gamma > 1.

struct BoundaryDatumEntry {
    double eps = 0.0;
    double lhs = 0.0;
    double rhs = 0.0;
    double slack = 0.0;
};

struct BoundaryDatumReport {
    std::vector<BoundaryDatumEntry> entries;
    bool holds(double tol = 1e-8) const;
};

/// For gamma <= 1 the right-hand side is [u]^p (finite, and (.-eps)^+ is 1-Lipschitz).
BoundaryDatumReport boundary_datum_check(const KernelWeights& weights, const Field& u, double gamma,
                                         const std::vector<double>& eps_list);

/// Seminorm at order s' = sp/(gamma+p-1), exponent p' = gamma+p-1 versus [u^{(gamma+p-1)/p}]^p (gamma > 1).
struct SeminormPairReport {
    double lhs = 0.0;
    double rhs = 0.0;
    double slack = 0.0;
};

SeminormPairReport lifted_seminorm_check(const KernelWeights& weights, const Field& u, double gamma);

// ---------------------------------------------------------------------------
// Truncated singular nonlinearity.

/// Parameters of g_k(s) = min{s^{-beta}, k}, its primitive Phi_k and the cut T_tau.
struct TruncationKit {
    double k = 1.0;
    double beta = 1.0;
    double eps = 0.1;
    double tau = 1.0;

    /// beta defaults to gamma.
    static TruncationKit make(double gamma, double k, double eps, double tau = 1.0);
    void validate() const;
    /// eps^{-beta} < k, needed on the comparison path.
    bool eps_below_kink() const;
};

double truncation_g(const TruncationKit& kit, double s);
/// Primitive of g_k with Phi_k(1) = 0.
double truncation_Phi(const TruncationKit& kit, double s);
/// min{s, tau} for s >= 0, extended as an odd function.
double truncation_T(const TruncationKit& kit, double s);

struct TruncatedResult {
    Field w;
    bool converged = false;
    std::size_t iterations = 0;
    /// ||P(w - grad) - w||_inf / h^N
    double projected_residual = 0.0;
};

/// Minimizes (1/p)[phi]^p - sum f_i Phi_k(phi_i) h^N over 0 <= phi <= v.
TruncatedResult truncated_minimize(const KernelWeights& weights, const Field& f, const Field& v,
                                   const TruncationKit& kit, const SolverConfig& config);

/// <Aw, psi - w> - sum f_i g_k(w_i) (psi_i - w_i) h^N, in units of h^N; >= 0 at the constrained minimizer.
double variational_inequality_defect(const KernelWeights& weights, const Field& f, const TruncationKit& kit,
                                     const Field& w, const Field& psi);

// ---------------------------------------------------------------------------
// Comparison, uniqueness, symmetry.

/// Which equation sub/supersolutions are screened against.
struct ScreenOptions {
    /// Regularization level of the screened equation; 0 screens against f / u^gamma.
    long level = 0;
    /// One-sided tolerance on the nodal residual.
    double tol = 1e-8;
    /// Screening nodes; defaults to the inner half of the domain.
    std::optional<CompactSubset> subset;
};

struct ComparisonVerdict {
    CheckStatus status = CheckStatus::Inconclusive;
    /// max_i (u_sub - v_super)
    double max_violation = 0.0;
    /// max_i (u_sub - w - eps)
    double truncated_gap = 0.0;
    double sub_residual = 0.0;
    double super_residual = 0.0;
    std::optional<Field> w;
    std::string message;
};

/// Signed residual max / min of A u / h^N minus the screened right-hand side.
ResidualSpread screen_residual(const KernelWeights& weights, const ProblemSpec& prob, const Field& u,
                               const ScreenOptions& screen);

ComparisonVerdict comparison_check(const Field& u_sub, const Field& v_super, const ProblemSpec& prob,
                                   const KernelWeights& weights, const TruncationKit& kit,
                                   const SolverConfig& config, const ScreenOptions& screen = {});

struct UniquenessVerdict {
    CheckStatus status = CheckStatus::Inconclusive;
    double distance = 0.0;
    double gap = 0.0;
    double tolerance = 0.0;
    /// Distance between the two extrapolated limits (NaN if unavailable).
    double extrapolated_distance = 0.0;
    std::vector<long> schedule_a;
    std::vector<long> schedule_b;
};

/// Two independent limit runs with interleaved n-schedules and different starting fields.
UniquenessVerdict uniqueness_check(const ProblemSpec& prob, const KernelWeights& weights, const SolverConfig& config);

struct SymmetryVerdict {
    CheckStatus status = CheckStatus::Inconclusive;
    std::vector<double> asymmetry;
    double max_asymmetry = 0.0;
    std::string message;
};

/// Solves once and compares u with its mirror images. An empty axis list uses
/// every symmetry axis declared by the grid.
SymmetryVerdict symmetry_check(const ProblemSpec& prob, const KernelWeights& weights, const SolverConfig& config,
                               std::vector<Hyperplane> axes = {});

// ---------------------------------------------------------------------------
// Checks on a finished limit run.

struct MonotonicityVerdict {
    CheckStatus status = CheckStatus::Inconclusive;
    /// Smallest min_i(u_{n'} - u_n) over consecutive stages.
    double min_increment = 0.0;
    /// Largest drop of the interior minimum between consecutive stages (<= 0 when nondecreasing).
    double interior_min_drop = 0.0;
    bool interior_positive = false;
};

/// Increments and interior-minimum drops are allowed down to -10 outer_tol.
MonotonicityVerdict monotonicity_check(const SolveReport& report, double outer_tol);

struct AprioriVerdict {
    CheckStatus status = CheckStatus::Inconclusive;
    /// gamma <= 1: max_n [u_n] / (sum f h^N)^{1/p}. gamma > 1: max/min of C_fit over the last three stages.
    double ratio = 0.0;
    double threshold = 0.0;
    std::vector<double> constants;
};

/// gamma == 1: [u_n] <= 1.05 (sum f h^N)^{1/p} for every stage.
/// gamma < 1: successive ratios of [u_n] within 5% at the last two stages.
/// gamma > 1: C_fit = [u_n^{q_b}]^p / sum f h^N stable within 20% over the last three stages.
AprioriVerdict apriori_check(const SolveReport& report, const ProblemSpec& prob);

} // namespace fracsing

#endif
