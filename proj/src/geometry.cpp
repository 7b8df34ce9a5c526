#include "fracsing/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace fracsing {

namespace {

bool finite(double v) { return std::isfinite(v); }

std::size_t padding_cells(double pad, double h)
{
    if (pad <= 0.0) return 0;
    // pad that is an exact multiple of h must not round up
    return static_cast<std::size_t>(std::ceil(pad / h - 1e-9));
}

} // namespace

Hyperplane Hyperplane::coordinate(int axis, double offset)
{
    if (axis < 0 || axis > 1) throw std::invalid_argument("hyperplane axis must be 0 or 1");
    Hyperplane hp;
    hp.normal = axis == 0 ? Point{1.0, 0.0} : Point{0.0, 1.0};
    hp.offset = offset;
    return hp;
}

Hyperplane Hyperplane::diagonal(const Point& center)
{
    const double c = 1.0 / std::sqrt(2.0);
    Hyperplane hp;
    hp.normal = {c, -c};
    hp.offset = c * (center[0] - center[1]);
    return hp;
}

Hyperplane Hyperplane::anti_diagonal(const Point& center)
{
    const double c = 1.0 / std::sqrt(2.0);
    Hyperplane hp;
    hp.normal = {c, c};
    hp.offset = c * (center[0] + center[1]);
    return hp;
}

Point Hyperplane::reflect(const Point& x) const
{
    const double dist = normal[0] * x[0] + normal[1] * x[1] - offset;
    return {x[0] - 2.0 * dist * normal[0], x[1] - 2.0 * dist * normal[1]};
}

std::string Hyperplane::describe() const
{
    std::ostringstream os;
    os << "n=(" << normal[0] << "," << normal[1] << ") offset=" << offset;
    return os.str();
}

double GridDomain::cell_volume() const
{
    return dim_ == 1 ? spacing_[0] : spacing_[0] * spacing_[1];
}

double GridDomain::boundary_distance(const Point& x) const
{
    switch (shape_) {
    case DomainShape::Interval:
        return std::min(x[0] - domain_lo_[0], domain_hi_[0] - x[0]);
    case DomainShape::Rectangle:
        return std::min({x[0] - domain_lo_[0], domain_hi_[0] - x[0], x[1] - domain_lo_[1],
                         domain_hi_[1] - x[1]});
    case DomainShape::Ball:
        return radius_ - std::hypot(x[0] - center_[0], x[1] - center_[1]);
    }
    return 0.0;
}

std::string GridDomain::describe() const
{
    std::ostringstream os;
    switch (shape_) {
    case DomainShape::Interval:
        os << "interval[" << domain_lo_[0] << "," << domain_hi_[0] << "]";
        break;
    case DomainShape::Rectangle:
        os << "rectangle[" << domain_lo_[0] << "," << domain_hi_[0] << "]x[" << domain_lo_[1] << ","
           << domain_hi_[1] << "]";
        break;
    case DomainShape::Ball:
        os << "ball(c=(" << center_[0] << "," << center_[1] << "),r=" << radius_ << ")";
        break;
    }
    os << " nodes=" << node_count() << " interior=" << interior_count() << " pad=" << pad_;
    return os.str();
}

void GridDomain::finalize()
{
    interior_indices_.clear();
    slot_.assign(nodes_.size(), npos);
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        if (interior_[i]) {
            slot_[i] = interior_indices_.size();
            interior_indices_.push_back(i);
        }
    }
    for (int d = 0; d < dim_; ++d) {
        coverage_lo_[d] = origin_[d] - 0.5 * spacing_[d];
        coverage_hi_[d] = origin_[d] + (static_cast<double>(lattice_[d]) - 0.5) * spacing_[d];
    }
    truncation_radius_ = std::numeric_limits<double>::infinity();
    for (int d = 0; d < dim_; ++d) {
        truncation_radius_ = std::min({truncation_radius_, center_[d] - coverage_lo_[d],
                                       coverage_hi_[d] - center_[d]});
    }
}

std::vector<std::size_t> GridDomain::reflect(const Hyperplane& axis) const
{
    if (dim_ == 1 && std::abs(axis.normal[1]) > 0.0)
        throw std::invalid_argument("axis not a grid symmetry: 1D grids only admit x-hyperplanes");
    std::vector<std::size_t> perm(nodes_.size());
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        const Point y = axis.reflect(nodes_[i]);
        std::size_t index = 0;
        std::size_t stride = 1;
        for (int d = 0; d < dim_; ++d) {
            const double k = (y[d] - origin_[d]) / spacing_[d];
            const double kr = std::round(k);
            if (std::abs(k - kr) > 1e-8 || kr < 0.0 || kr >= static_cast<double>(lattice_[d]))
                throw std::invalid_argument("axis not a grid symmetry");
            index += static_cast<std::size_t>(kr) * stride;
            stride *= lattice_[d];
        }
        if (interior_[index] != interior_[i])
            throw std::invalid_argument("axis not a grid symmetry: interior mask not preserved");
        perm[i] = index;
    }
    return perm;
}

DomainPtr build_interval(double a, double b, std::size_t M, double pad)
{
    if (!finite(a) || !finite(b) || !finite(pad))
        throw std::invalid_argument("build_interval: bounds and pad must be finite");
    if (!(a < b)) throw std::invalid_argument("build_interval: need a < b");
    if (M < 3)
        throw std::invalid_argument("build_interval: need at least 3 nodes so that one node is interior");
    if (pad < 0.0) throw std::invalid_argument("build_interval: pad must be >= 0");

    std::shared_ptr<GridDomain> g(new GridDomain());
    const double h = (b - a) / static_cast<double>(M - 1);
    const std::size_t extra = padding_cells(pad, h);
    const std::size_t total = M + 2 * extra;
    g->dim_ = 1;
    g->shape_ = DomainShape::Interval;
    g->spacing_ = {h, 0.0};
    g->domain_lo_ = {a, 0.0};
    g->domain_hi_ = {b, 0.0};
    g->center_ = {0.5 * (a + b), 0.0};
    g->pad_ = pad;
    g->origin_ = {a - static_cast<double>(extra) * h, 0.0};
    g->lattice_ = {total, 1};
    g->nodes_.resize(total);
    g->interior_.assign(total, false);
    for (std::size_t k = 0; k < total; ++k) {
        const double offset = static_cast<double>(k) - static_cast<double>(extra);
        g->nodes_[k] = {a + offset * h, 0.0};
        g->interior_[k] = k > extra && k < extra + M - 1;
    }
    g->symmetry_axes_ = {Hyperplane::coordinate(0, g->center_[0])};
    g->finalize();
    return g;
}

DomainPtr build_rectangle(Point lo, Point hi, std::array<std::size_t, 2> M, double pad)
{
    for (int d = 0; d < 2; ++d) {
        if (!finite(lo[d]) || !finite(hi[d])) throw std::invalid_argument("build_rectangle: non-finite bounds");
        if (!(lo[d] < hi[d])) throw std::invalid_argument("build_rectangle: need lo < hi on every axis");
        if (M[d] < 3) throw std::invalid_argument("build_rectangle: need at least 3 nodes per axis");
    }
    if (!finite(pad) || pad < 0.0) throw std::invalid_argument("build_rectangle: pad must be finite and >= 0");

    std::shared_ptr<GridDomain> g(new GridDomain());
    g->dim_ = 2;
    g->shape_ = DomainShape::Rectangle;
    g->domain_lo_ = lo;
    g->domain_hi_ = hi;
    g->center_ = {0.5 * (lo[0] + hi[0]), 0.5 * (lo[1] + hi[1])};
    g->pad_ = pad;
    std::array<std::size_t, 2> extra{};
    for (int d = 0; d < 2; ++d) {
        g->spacing_[d] = (hi[d] - lo[d]) / static_cast<double>(M[d] - 1);
        extra[d] = padding_cells(pad, g->spacing_[d]);
        g->lattice_[d] = M[d] + 2 * extra[d];
        g->origin_[d] = lo[d] - static_cast<double>(extra[d]) * g->spacing_[d];
    }
    const std::size_t total = g->lattice_[0] * g->lattice_[1];
    g->nodes_.resize(total);
    g->interior_.assign(total, false);
    for (std::size_t j = 0; j < g->lattice_[1]; ++j) {
        for (std::size_t i = 0; i < g->lattice_[0]; ++i) {
            const std::size_t k = i + j * g->lattice_[0];
            const double oi = static_cast<double>(i) - static_cast<double>(extra[0]);
            const double oj = static_cast<double>(j) - static_cast<double>(extra[1]);
            g->nodes_[k] = {lo[0] + oi * g->spacing_[0], lo[1] + oj * g->spacing_[1]};
            g->interior_[k] = i > extra[0] && i < extra[0] + M[0] - 1 && j > extra[1] && j < extra[1] + M[1] - 1;
        }
    }
    g->symmetry_axes_ = {Hyperplane::coordinate(0, g->center_[0]), Hyperplane::coordinate(1, g->center_[1])};
    g->finalize();
    return g;
}

DomainPtr build_ball(Point center, double radius, std::size_t M, double pad)
{
    if (!finite(center[0]) || !finite(center[1]) || !finite(radius) || !(radius > 0.0))
        throw std::invalid_argument("build_ball: need finite centre and radius > 0");
    if (M < 3) throw std::invalid_argument("build_ball: need at least 3 nodes per axis");
    if (!finite(pad) || pad < 0.0) throw std::invalid_argument("build_ball: pad must be finite and >= 0");

    std::shared_ptr<GridDomain> g(new GridDomain());
    g->dim_ = 2;
    g->shape_ = DomainShape::Ball;
    g->center_ = center;
    g->radius_ = radius;
    g->domain_lo_ = {center[0] - radius, center[1] - radius};
    g->domain_hi_ = {center[0] + radius, center[1] + radius};
    g->pad_ = pad;
    const double h = 2.0 * radius / static_cast<double>(M - 1);
    const std::size_t extra = padding_cells(pad, h);
    const std::size_t n = M + 2 * extra;
    g->spacing_ = {h, h};
    g->lattice_ = {n, n};
    g->origin_ = {g->domain_lo_[0] - static_cast<double>(extra) * h, g->domain_lo_[1] - static_cast<double>(extra) * h};
    g->nodes_.resize(n * n);
    g->interior_.assign(n * n, false);
    // integer offsets from the centre keep the mask exactly symmetric
    const double half = 0.5 * static_cast<double>(n - 1);
    const double r_cells = radius / h;
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t k = i + j * n;
            const double di = static_cast<double>(i) - half;
            const double dj = static_cast<double>(j) - half;
            g->nodes_[k] = {center[0] + di * h, center[1] + dj * h};
            g->interior_[k] = di * di + dj * dj < r_cells * r_cells * (1.0 - 1e-12);
        }
    }
    g->symmetry_axes_ = {Hyperplane::coordinate(0, center[0]), Hyperplane::coordinate(1, center[1]),
                         Hyperplane::diagonal(center), Hyperplane::anti_diagonal(center)};
    g->finalize();
    return g;
}

CompactSubset make_subset(const GridDomain& domain, std::vector<std::size_t> indices)
{
    if (indices.empty()) throw std::invalid_argument("compact subset must not be empty");
    CompactSubset subset;
    subset.margin = std::numeric_limits<double>::infinity();
    for (std::size_t i : indices) {
        if (i >= domain.node_count() || !domain.is_interior(i))
            throw std::invalid_argument("compact subset contains a non-interior node");
        subset.margin = std::min(subset.margin, domain.boundary_distance(domain.node(i)));
    }
    if (!(subset.margin > 0.0)) throw std::invalid_argument("compact subset touches the boundary");
    subset.node_indices = std::move(indices);
    return subset;
}

CompactSubset inner_subset(const GridDomain& domain, double fraction)
{
    if (!(fraction > 0.0 && fraction < 1.0)) throw std::invalid_argument("inner_subset: fraction must lie in (0,1)");
    std::vector<std::size_t> picked;
    const Point& c = domain.center();
    const double slack = 1.0 + 1e-12;
    for (std::size_t i : domain.interior_indices()) {
        const Point& x = domain.node(i);
        bool inside = true;
        if (domain.shape() == DomainShape::Ball) {
            inside = std::hypot(x[0] - c[0], x[1] - c[1]) <= fraction * domain.half_extent(0) * slack;
        } else {
            for (int d = 0; d < domain.dim(); ++d)
                inside = inside && std::abs(x[d] - c[d]) <= fraction * domain.half_extent(d) * slack;
        }
        if (inside) picked.push_back(i);
    }
    return make_subset(domain, std::move(picked));
}

} // namespace fracsing
