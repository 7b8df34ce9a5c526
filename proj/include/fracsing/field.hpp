#ifndef FRACSING_FIELD_HPP
#define FRACSING_FIELD_HPP

#include "fracsing/geometry.hpp"

#include <functional>
#include <span>
#include <vector>

namespace fracsing {

/// Nodal values on a GridDomain. Exterior nodes are always exactly zero;
/// construction from raw values that break this is rejected.
class Field {
public:
    explicit Field(DomainPtr domain);

    static Field from_values(DomainPtr domain, std::vector<double> values);
    static Field from_interior(DomainPtr domain, std::span<const double> interior);
    /// Evaluates g at interior nodes; exterior nodes stay zero.
    static Field from_function(DomainPtr domain, const std::function<double(const Point&)>& g);

    const DomainPtr& domain() const { return domain_; }
    const GridDomain& grid() const { return *domain_; }
    std::size_t size() const { return values_.size(); }
    std::span<const double> values() const { return values_; }
    double operator[](std::size_t i) const { return values_[i]; }

    /// Sets node i; exterior nodes accept only 0.
    void set(std::size_t i, double v);

    std::vector<double> interior_values() const;
    void assign_interior(std::span<const double> interior);

    double min() const;
    double max() const;
    double sup_norm() const;
    bool nonnegative(double tol = 0.0) const { return min() >= -tol; }
    /// Sum of values times the cell volume (discrete integral over the domain).
    double integral() const;

    bool same_domain(const Field& other) const { return domain_ == other.domain_; }

private:
    DomainPtr domain_;
    std::vector<double> values_;
};

/// Throws std::invalid_argument unless both fields live on the same grid object.
void require_same_domain(const Field& a, const Field& b, const char* what);

double sup_distance(const Field& a, const Field& b);

/// max_i (a_i - b_i); negative when a < b everywhere.
double max_excess(const Field& a, const Field& b);

} // namespace fracsing

#endif
