#ifndef FRACSING_KERNEL_HPP
#define FRACSING_KERNEL_HPP

#include "fracsing/field.hpp"
#include "fracsing/geometry.hpp"

#include <span>
#include <vector>

namespace fracsing {

/// How strictly the standing assumption N > sp is enforced.
enum class AssumptionPolicy {
    /// N > sp, needed wherever p*_s = Np/(N - sp) enters.
    Strict,
    /// N >= sp; the discrete problem stays well posed on the borderline.
    Borderline,
    /// Only 0 < s < 1 and p > 1; for discretization studies of the operator alone.
    Off,
};

/// Throws std::invalid_argument("standing assumption violated: ...") when the policy rejects (N, s, p).
void check_standing_assumption(int N, double s, double p, AssumptionPolicy policy);

/// Integral of |y|^{-(N+sp)} over {|y| > R} in dimension N (1 or 2).
double ball_tail_integral(int dim, double sp, double R);

/// Integral of |x - y|^{-(N+sp)} over y outside the box [lo, hi] (x strictly inside).
double box_complement_integral(int dim, double sp, const Point& x, const Point& lo, const Point& hi);

/// Discrete Gagliardo form on a grid.
///
/// Pair weights are w_ij = h^{2N} / |x_i - x_j|^{N+sp}. Since fields vanish on
/// exterior nodes, only interior-interior pairs are stored densely; every
/// interior node additionally carries the aggregated exterior weight
///
///     e_i = sum_{j exterior} w_ij + d_i,
///
/// where d_i = h^N * (kernel integral over the region beyond the explicit grid).
/// The discrete seminorm is then
///
///     [u]^p = sum_{i != j} w_ij |u_i - u_j|^p + 2 sum_i e_i |u_i|^p.
class KernelWeights {
public:
    static KernelWeights assemble(DomainPtr domain, double s, double p,
                                  AssumptionPolicy policy = AssumptionPolicy::Borderline);

    double s() const { return s_; }
    double p() const { return p_; }
    const DomainPtr& domain() const { return domain_; }
    const GridDomain& grid() const { return *domain_; }
    std::size_t unknowns() const { return n_; }

    /// w_ij for arbitrary nodes; 0 on the diagonal.
    double pair_weight(std::size_t i, std::size_t j) const;
    /// d_i for arbitrary nodes.
    double tail_weight(std::size_t i) const;
    /// Dense row-major interior-interior weights.
    std::span<const double> interior_pairs() const { return pairs_; }
    std::span<const double> exterior_weights() const { return exterior_; }
    std::span<const double> tail_weights() const { return tail_; }

    /// [u]^p on interior values.
    double energy(std::span<const double> x) const;
    /// Returns [u]^p and writes grad = gradient of [u]^p / p, i.e. the discrete operator applied to x.
    double energy_and_gradient(std::span<const double> x, std::span<double> grad) const;
    void apply(std::span<const double> x, std::span<double> out) const;
    /// Diagonal of the Hessian of [u]^p / p for p = 2 (2 sum_j w_ij + 2 e_i); p-independent row mass.
    std::vector<double> row_mass() const;

private:
    DomainPtr domain_;
    double s_ = 0.0;
    double p_ = 0.0;
    std::size_t n_ = 0;
    std::vector<double> pairs_;
    std::vector<double> exterior_;
    std::vector<double> tail_;
};

double seminorm_p(const KernelWeights& weights, const Field& u);

/// (Au)_i = 2 sum_j w_ij J(u_i - u_j) + 2 e_i J(u_i) at interior nodes, J(t) = |t|^{p-2} t.
Field apply_operator(const KernelWeights& weights, const Field& u);

/// Signed nodal residual (Au)_i / h^N - f_i u_i^{-gamma} over the test set.
struct ResidualSpread {
    double max_abs = 0.0;
    double max = 0.0;
    double min = 0.0;
};

ResidualSpread weak_residual_spread(const KernelWeights& weights, const Field& u, const Field& f, double gamma,
                                    const CompactSubset& testset);

/// Largest |<Au, phi> - sum f u^{-gamma} phi h^N| / ||phi||_1 over nodal hats phi in the test set.
double weak_residual(const KernelWeights& weights, const Field& u, const Field& f, double gamma,
                     const CompactSubset& testset);

} // namespace fracsing

#endif
