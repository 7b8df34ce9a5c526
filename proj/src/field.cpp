#include "fracsing/field.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace fracsing {

Field::Field(DomainPtr domain) : domain_(std::move(domain))
{
    if (!domain_) throw std::invalid_argument("Field: null domain");
    values_.assign(domain_->node_count(), 0.0);
}

Field Field::from_values(DomainPtr domain, std::vector<double> values)
{
    Field f(std::move(domain));
    if (values.size() != f.values_.size())
        throw std::invalid_argument("Field: expected " + std::to_string(f.values_.size()) + " values, got " +
                                    std::to_string(values.size()));
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!std::isfinite(values[i])) throw std::invalid_argument("Field: non-finite value");
        if (!f.domain_->is_interior(i) && values[i] != 0.0)
            throw std::invalid_argument("Field: exterior-zero invariant violated at node " + std::to_string(i));
    }
    f.values_ = std::move(values);
    return f;
}

Field Field::from_interior(DomainPtr domain, std::span<const double> interior)
{
    Field f(std::move(domain));
    f.assign_interior(interior);
    return f;
}

Field Field::from_function(DomainPtr domain, const std::function<double(const Point&)>& g)
{
    Field f(std::move(domain));
    for (std::size_t i : f.domain_->interior_indices()) f.values_[i] = g(f.domain_->node(i));
    return f;
}

void Field::set(std::size_t i, double v)
{
    if (i >= values_.size()) throw std::out_of_range("Field::set: node index out of range");
    if (!domain_->is_interior(i) && v != 0.0)
        throw std::invalid_argument("Field: exterior-zero invariant violated at node " + std::to_string(i));
    values_[i] = v;
}

std::vector<double> Field::interior_values() const
{
    const auto& idx = domain_->interior_indices();
    std::vector<double> out(idx.size());
    for (std::size_t a = 0; a < idx.size(); ++a) out[a] = values_[idx[a]];
    return out;
}

void Field::assign_interior(std::span<const double> interior)
{
    const auto& idx = domain_->interior_indices();
    if (interior.size() != idx.size())
        throw std::invalid_argument("Field: interior vector has wrong length");
    for (std::size_t a = 0; a < idx.size(); ++a) values_[idx[a]] = interior[a];
}

double Field::min() const { return *std::min_element(values_.begin(), values_.end()); }

double Field::max() const { return *std::max_element(values_.begin(), values_.end()); }

double Field::sup_norm() const
{
    double m = 0.0;
    for (double v : values_) m = std::max(m, std::abs(v));
    return m;
}

double Field::integral() const
{
    double sum = 0.0;
    for (std::size_t i : domain_->interior_indices()) sum += values_[i];
    return sum * domain_->cell_volume();
}

void require_same_domain(const Field& a, const Field& b, const char* what)
{
    if (!a.same_domain(b)) throw std::invalid_argument(std::string(what) + ": domain mismatch");
}

double sup_distance(const Field& a, const Field& b)
{
    require_same_domain(a, b, "sup_distance");
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

double max_excess(const Field& a, const Field& b)
{
    require_same_domain(a, b, "max_excess");
    double m = -std::numeric_limits<double>::infinity();
    for (std::size_t i : a.grid().interior_indices()) m = std::max(m, a[i] - b[i]);
    return m;
}

} // namespace fracsing
