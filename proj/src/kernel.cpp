#include "fracsing/kernel.hpp"

#include <boost/math/special_functions/beta.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace fracsing {

namespace {

// |t|^{q} for the exponents that show up constantly; pow is the slow path.
inline double abs_pow(double t, double q)
{
    const double a = std::abs(t);
    if (q == 1.0) return a;
    if (q == 2.0) return a * a;
    if (q == 0.5) return std::sqrt(a);
    return std::pow(a, q);
}

// int_0^phi cos^a(t) dt for |phi| < pi/2.
double cos_power_integral(double a, double phi)
{
    if (phi == 0.0) return 0.0;
    const double sn = std::sin(phi);
    const double v = 0.5 * boost::math::beta(0.5, 0.5 * (a + 1.0), sn * sn);
    return phi > 0.0 ? v : -v;
}

// Angular contribution of one box face at perpendicular distance delta whose
// tangential extent relative to the foot point is [t_lo, t_hi].
double face_integral(double sp, double delta, double t_lo, double t_hi)
{
    const double phi_lo = std::atan(t_lo / delta);
    const double phi_hi = std::atan(t_hi / delta);
    return std::pow(delta, -sp) / sp * (cos_power_integral(sp, phi_hi) - cos_power_integral(sp, phi_lo));
}

} // namespace

double ball_tail_integral(int dim, double sp, double R)
{
    if (!(R > 0.0)) throw std::invalid_argument("ball_tail_integral: radius must be positive");
    const double base = std::pow(R, -sp) / sp;
    return dim == 1 ? 2.0 * base : 2.0 * std::numbers::pi * base;
}

double box_complement_integral(int dim, double sp, const Point& x, const Point& lo, const Point& hi)
{
    if (dim == 1) {
        const double left = x[0] - lo[0];
        const double right = hi[0] - x[0];
        if (!(left > 0.0 && right > 0.0)) throw std::invalid_argument("box_complement_integral: point outside box");
        return (std::pow(left, -sp) + std::pow(right, -sp)) / sp;
    }
    const double dl = x[0] - lo[0];
    const double dr = hi[0] - x[0];
    const double db = x[1] - lo[1];
    const double dt = hi[1] - x[1];
    if (!(dl > 0.0 && dr > 0.0 && db > 0.0 && dt > 0.0))
        throw std::invalid_argument("box_complement_integral: point outside box");
    return face_integral(sp, dr, -db, dt) + face_integral(sp, dl, -db, dt) + face_integral(sp, dt, -dl, dr) +
           face_integral(sp, db, -dl, dr);
}

void check_standing_assumption(int N, double s, double p, AssumptionPolicy policy)
{
    if (!(s > 0.0 && s < 1.0)) throw std::invalid_argument("fractional order s must lie in (0,1)");
    if (!(p > 1.0) || !std::isfinite(p)) throw std::invalid_argument("exponent p must be finite and > 1");
    const double n = N;
    const bool ok = policy == AssumptionPolicy::Off || (policy == AssumptionPolicy::Strict ? n > s * p : n >= s * p);
    if (!ok)
        throw std::invalid_argument("standing assumption violated: N > s p required (N=" + std::to_string(N) +
                                    ", s p=" + std::to_string(s * p) + ")");
}

KernelWeights KernelWeights::assemble(DomainPtr domain, double s, double p, AssumptionPolicy policy)
{
    if (!domain) throw std::invalid_argument("assemble: null domain");
    const int N = domain->dim();
    check_standing_assumption(N, s, p, policy);

    KernelWeights k;
    k.domain_ = std::move(domain);
    k.s_ = s;
    k.p_ = p;
    const GridDomain& g = *k.domain_;
    const auto& idx = g.interior_indices();
    k.n_ = idx.size();

    k.tail_.resize(g.node_count());
    const double vol = g.cell_volume();
    for (std::size_t i = 0; i < g.node_count(); ++i)
        k.tail_[i] = vol * box_complement_integral(N, s * p, g.node(i), g.coverage_lo(), g.coverage_hi());

    k.pairs_.assign(k.n_ * k.n_, 0.0);
    for (std::size_t a = 0; a < k.n_; ++a) {
        for (std::size_t b = a + 1; b < k.n_; ++b) {
            const double w = k.pair_weight(idx[a], idx[b]);
            k.pairs_[a * k.n_ + b] = w;
            k.pairs_[b * k.n_ + a] = w;
        }
    }

    k.exterior_.assign(k.n_, 0.0);
    for (std::size_t a = 0; a < k.n_; ++a) {
        double sum = 0.0;
        for (std::size_t j = 0; j < g.node_count(); ++j)
            if (!g.is_interior(j)) sum += k.pair_weight(idx[a], j);
        k.exterior_[a] = sum + k.tail_[idx[a]];
    }
    return k;
}

double KernelWeights::pair_weight(std::size_t i, std::size_t j) const
{
    if (i == j) return 0.0;
    const GridDomain& g = *domain_;
    const auto ki = g.lattice_index(i);
    const auto kj = g.lattice_index(j);
    const int N = g.dim();
    double dist2 = 0.0;
    for (int d = 0; d < N; ++d) {
        const double delta = static_cast<double>(ki[d] - kj[d]) * g.spacing()[d];
        dist2 += delta * delta;
    }
    const double vol = g.cell_volume();
    return vol * vol * std::pow(dist2, -0.5 * (N + s_ * p_));
}

double KernelWeights::tail_weight(std::size_t i) const { return tail_.at(i); }

double KernelWeights::energy(std::span<const double> x) const
{
    if (x.size() != n_) throw std::invalid_argument("energy: wrong number of unknowns");
    double total = 0.0;
    for (std::size_t a = 0; a < n_; ++a) {
        const double* row = pairs_.data() + a * n_;
        double acc = 0.0;
        for (std::size_t b = a + 1; b < n_; ++b) acc += row[b] * abs_pow(x[a] - x[b], p_);
        total += 2.0 * acc + 2.0 * exterior_[a] * abs_pow(x[a], p_);
    }
    return total;
}

double KernelWeights::energy_and_gradient(std::span<const double> x, std::span<double> grad) const
{
    if (x.size() != n_ || grad.size() != n_)
        throw std::invalid_argument("energy_and_gradient: wrong number of unknowns");
    const double q = p_ - 1.0;
    std::fill(grad.begin(), grad.end(), 0.0);
    double total = 0.0;
    for (std::size_t a = 0; a < n_; ++a) {
        const double* row = pairs_.data() + a * n_;
        const double xa = x[a];
        double acc = 0.0;
        double ga = 0.0;
        for (std::size_t b = a + 1; b < n_; ++b) {
            const double t = xa - x[b];
            // J(t) = |t|^{p-2} t, extended by 0 at t = 0
            const double r = abs_pow(t, q);
            const double flux = row[b] * (t >= 0.0 ? r : -r);
            acc += row[b] * r * std::abs(t);
            ga += flux;
            grad[b] -= 2.0 * flux;
        }
        const double r = abs_pow(xa, q);
        total += 2.0 * acc + 2.0 * exterior_[a] * r * std::abs(xa);
        grad[a] += 2.0 * ga + 2.0 * exterior_[a] * (xa >= 0.0 ? r : -r);
    }
    return total;
}

void KernelWeights::apply(std::span<const double> x, std::span<double> out) const
{
    energy_and_gradient(x, out);
}

std::vector<double> KernelWeights::row_mass() const
{
    std::vector<double> m(n_);
    for (std::size_t a = 0; a < n_; ++a) {
        double sum = 0.0;
        const double* row = pairs_.data() + a * n_;
        for (std::size_t b = 0; b < n_; ++b) sum += row[b];
        m[a] = 2.0 * sum + 2.0 * exterior_[a];
    }
    return m;
}

namespace {

void require_bound(const KernelWeights& weights, const Field& u, const char* what)
{
    if (u.domain() != weights.domain()) throw std::invalid_argument(std::string(what) + ": domain mismatch");
}

} // namespace

double seminorm_p(const KernelWeights& weights, const Field& u)
{
    require_bound(weights, u, "seminorm_p");
    const auto x = u.interior_values();
    return weights.energy(x);
}

Field apply_operator(const KernelWeights& weights, const Field& u)
{
    require_bound(weights, u, "apply_operator");
    const auto x = u.interior_values();
    std::vector<double> out(x.size());
    weights.apply(x, out);
    return Field::from_interior(weights.domain(), out);
}

ResidualSpread weak_residual_spread(const KernelWeights& weights, const Field& u, const Field& f, double gamma,
                                    const CompactSubset& testset)
{
    require_bound(weights, u, "weak_residual");
    require_bound(weights, f, "weak_residual");
    if (testset.node_indices.empty()) throw std::invalid_argument("weak_residual: empty test set");
    for (std::size_t i : testset.node_indices)
        if (!(u[i] > 0.0)) throw std::invalid_argument("singular quotient on test set");
    const Field Au = apply_operator(weights, u);
    const double vol = weights.grid().cell_volume();
    ResidualSpread spread;
    spread.max = -std::numeric_limits<double>::infinity();
    spread.min = std::numeric_limits<double>::infinity();
    for (std::size_t i : testset.node_indices) {
        const double r = Au[i] / vol - f[i] * std::pow(u[i], -gamma);
        spread.max = std::max(spread.max, r);
        spread.min = std::min(spread.min, r);
        spread.max_abs = std::max(spread.max_abs, std::abs(r));
    }
    return spread;
}

double weak_residual(const KernelWeights& weights, const Field& u, const Field& f, double gamma,
                     const CompactSubset& testset)
{
    return weak_residual_spread(weights, u, f, gamma, testset).max_abs;
}

} // namespace fracsing
