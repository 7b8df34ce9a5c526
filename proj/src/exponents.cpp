#include "fracsing/exponents.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace fracsing {

ExponentTable exponents(double p, double s, int N, double gamma, double q)
{
    if (!(s > 0.0 && s < 1.0)) throw std::invalid_argument("exponents: s must lie in (0,1)");
    if (!(p > 1.0) || !std::isfinite(p)) throw std::invalid_argument("exponents: p must be finite and > 1");
    if (!(gamma > 0.0)) throw std::invalid_argument("exponents: gamma must be > 0");
    if (!(q >= 1.0)) throw std::invalid_argument("exponents: q must be >= 1");
    if (N < 1 || !(N > s * p)) throw std::invalid_argument("standing assumption violated: N > s p required");

    ExponentTable t;
    t.p = p;
    t.s = s;
    t.N = N;
    t.gamma = gamma;
    t.q = q;
    const double n = N;
    const double sp = s * p;
    t.p_star = n * p / (n - sp);
    t.p_star_dual = n * p / (n * (p - 1.0) + sp);
    t.m = n * p / (n * (p - 1.0) + sp + gamma * (n - sp));
    if (t.m > 1.0) t.m_prime = t.m / (t.m - 1.0);
    t.q_b = std::max((gamma + p - 1.0) / p, 1.0);

    const double critical = n / sp;
    if (q <= 1.0) {
        t.r_kind = SummabilityKind::Undefined;
        t.r_note = "q must exceed 1";
    } else if (q < critical) {
        t.r_kind = SummabilityKind::Finite;
        t.r = n * (p - 1.0) * q / (n - sp * q);
    } else if (q > critical) {
        t.r_kind = SummabilityKind::Infinite;
        t.r = std::numeric_limits<double>::infinity();
    } else {
        t.r_kind = SummabilityKind::Undefined;
        t.r_note = "q = N/(sp) is excluded";
    }
    return t;
}

double conjugate_identity_defect(const ExponentTable& t)
{
    if (!(t.gamma < 1.0) || !t.m_prime) return 0.0;
    return std::abs((1.0 - t.gamma) * *t.m_prime - t.p_star);
}

} // namespace fracsing
