#ifndef FRACSING_GEOMETRY_HPP
#define FRACSING_GEOMETRY_HPP

#include <array>
#include <cstddef>
#include <memory>
#include <string>
#include <vector>

namespace fracsing {

using Point = std::array<double, 2>;

/// Hyperplane {x : normal . x = offset}; normal is unit length.
struct Hyperplane {
    Point normal{1.0, 0.0};
    double offset = 0.0;

    static Hyperplane coordinate(int axis, double offset);
    /// Mirror line through `center` swapping the two coordinates (normal (1,-1)/sqrt 2).
    static Hyperplane diagonal(const Point& center);
    static Hyperplane anti_diagonal(const Point& center);

    Point reflect(const Point& x) const;
    std::string describe() const;
};

enum class DomainShape { Interval, Rectangle, Ball };

class GridDomain;
using DomainPtr = std::shared_ptr<const GridDomain>;

/// Uniform tensor grid covering a bounded domain plus an explicit exterior layer.
/// Nodes outside the domain are Dirichlet nodes: any Field bound to the domain
/// holds exactly zero there.
class GridDomain {
public:
    int dim() const { return dim_; }
    std::size_t node_count() const { return nodes_.size(); }
    std::size_t interior_count() const { return interior_indices_.size(); }
    const std::vector<Point>& nodes() const { return nodes_; }
    const Point& node(std::size_t i) const { return nodes_[i]; }
    const std::array<double, 2>& spacing() const { return spacing_; }
    /// h^N, the volume of one node cell.
    double cell_volume() const;
    const std::vector<bool>& interior_mask() const { return interior_; }
    bool is_interior(std::size_t i) const { return interior_[i]; }
    const std::vector<std::size_t>& interior_indices() const { return interior_indices_; }
    /// Position of node i in interior_indices(), or npos for exterior nodes.
    std::size_t interior_slot(std::size_t i) const { return slot_[i]; }
    const std::vector<Hyperplane>& symmetry_axes() const { return symmetry_axes_; }
    double truncation_radius() const { return truncation_radius_; }

    DomainShape shape() const { return shape_; }
    const Point& center() const { return center_; }
    /// Lower/upper corners of the union of node cells (explicitly represented region).
    const Point& coverage_lo() const { return coverage_lo_; }
    const Point& coverage_hi() const { return coverage_hi_; }
    /// Lattice extents per axis (1 for the unused axis in 1D).
    const std::array<std::size_t, 2>& lattice() const { return lattice_; }

    /// Integer lattice coordinates of node i (second entry 0 in 1D).
    std::array<long, 2> lattice_index(std::size_t i) const
    {
        return {static_cast<long>(i % lattice_[0]), static_cast<long>(i / lattice_[0])};
    }

    /// Half the width of the continuous domain along axis d (the radius for balls).
    double half_extent(int d) const { return 0.5 * (domain_hi_[d] - domain_lo_[d]); }
    /// Distance from x to the boundary of the continuous domain (positive inside).
    double boundary_distance(const Point& x) const;
    /// Short human-readable summary, e.g. "interval[-1,1] M=129 pad=0".
    std::string describe() const;

    /// Node permutation of the mirror map; throws if the hyperplane does not map the node set onto itself.
    std::vector<std::size_t> reflect(const Hyperplane& axis) const;

    static constexpr std::size_t npos = static_cast<std::size_t>(-1);

private:
    friend DomainPtr build_interval(double, double, std::size_t, double);
    friend DomainPtr build_rectangle(Point, Point, std::array<std::size_t, 2>, double);
    friend DomainPtr build_ball(Point, double, std::size_t, double);

    GridDomain() = default;
    void finalize();

    int dim_ = 1;
    DomainShape shape_ = DomainShape::Interval;
    std::vector<Point> nodes_;
    std::array<double, 2> spacing_{0.0, 0.0};
    std::vector<bool> interior_;
    std::vector<std::size_t> interior_indices_;
    std::vector<std::size_t> slot_;
    std::vector<Hyperplane> symmetry_axes_;
    double truncation_radius_ = 0.0;

    Point center_{0.0, 0.0};
    Point domain_lo_{0.0, 0.0};
    Point domain_hi_{0.0, 0.0};
    double radius_ = 0.0;
    double pad_ = 0.0;
    Point origin_{0.0, 0.0};
    std::array<std::size_t, 2> lattice_{1, 1};
    Point coverage_lo_{0.0, 0.0};
    Point coverage_hi_{0.0, 0.0};
};

/// Uniform grid on [a-pad, b+pad] with M nodes on [a, b]; nodes in (a, b) are interior.
DomainPtr build_interval(double a, double b, std::size_t M, double pad);

/// Axis-aligned rectangle lo..hi with M[k] nodes per axis on the closed rectangle.
DomainPtr build_rectangle(Point lo, Point hi, std::array<std::size_t, 2> M, double pad);

/// Square grid on [c-r, c+r]^2 with M nodes per axis; interior = nodes strictly inside the ball.
DomainPtr build_ball(Point center, double radius, std::size_t M, double pad);

/// Interior nodes well inside the domain, together with their distance to the boundary.
struct CompactSubset {
    std::vector<std::size_t> node_indices;
    double margin = 0.0;
};

/// Interior nodes in the inner half of the domain (half-width / half-radius around the centre).
CompactSubset inner_subset(const GridDomain& domain, double fraction = 0.5);

/// Subset from explicit node indices; validates interiority and computes the margin.
CompactSubset make_subset(const GridDomain& domain, std::vector<std::size_t> indices);

} // namespace fracsing

#endif
