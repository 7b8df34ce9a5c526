#ifndef FRACSING_EXPONENTS_HPP
#define FRACSING_EXPONENTS_HPP

#include <optional>
#include <string>

namespace fracsing {

enum class SummabilityKind { Finite, Infinite, Undefined };

/// Integrability exponents attached to (p, s, N, gamma) and a source exponent q.
struct ExponentTable {
    double p = 0.0;
    double s = 0.0;
    int N = 1;
    double gamma = 0.0;
    double q = 1.0;

    /// Fractional Sobolev exponent Np / (N - sp).
    double p_star = 0.0;
    /// Conjugate of p_star, Np / (N(p-1) + sp).
    double p_star_dual = 0.0;
    /// Source integrability for the gamma <= 1 existence regime.
    double m = 0.0;
    /// m / (m - 1); present only when m > 1 (gamma < 1).
    std::optional<double> m_prime;
    /// Boundary exponent max{(gamma+p-1)/p, 1}.
    double q_b = 1.0;

    /// Summability exponent r of solutions to the problem with L^q data.
    SummabilityKind r_kind = SummabilityKind::Undefined;
    double r = 0.0;
    std::string r_note;

    bool gamma_le_one() const { return gamma <= 1.0; }
};

/// Throws std::invalid_argument for s outside (0,1), p <= 1, gamma <= 0, q < 1 or N <= sp.
ExponentTable exponents(double p, double s, int N, double gamma, double q = 1.0);

/// |(1 - gamma) m' - p_star| (0 when the identity does not apply).
double conjugate_identity_defect(const ExponentTable& t);

} // namespace fracsing

#endif
