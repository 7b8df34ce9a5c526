#ifndef FRACSING_MINIMIZE_HPP
#define FRACSING_MINIMIZE_HPP

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace fracsing {

/// Writes the gradient and returns the objective value.
using Objective = std::function<double(std::span<const double> x, std::span<double> grad)>;

struct MinimizeOptions {
    /// Stop once the (projected) gradient satisfies ||g||_inf <= grad_tol.
    double grad_tol = 1e-10;
    std::size_t max_iters = 20000;
    std::size_t memory = 10;
    double armijo = 1e-4;
    std::size_t max_backtracks = 60;
    /// Give up after this many iterations without halving the best gradient norm (0 disables).
    std::size_t stall_window = 2000;
};

struct MinimizeResult {
    std::vector<double> x;
    double value = 0.0;
    double grad_norm = 0.0;
    std::size_t iterations = 0;
    std::size_t evaluations = 0;
    bool converged = false;
    bool stalled = false;
    /// Gradient change under rounding-level perturbations of x, measured when the run stalls.
    double noise_floor = 0.0;
};

/// Limited-memory quasi-Newton descent with Armijo backtracking.
/// Falls back to the steepest-descent direction whenever the two-loop
/// direction is not a descent direction.
/// A stalled run still counts as converged when its gradient is within
/// 10x the measured noise floor.
MinimizeResult lbfgs_minimize(const Objective& objective, std::vector<double> x0, const MinimizeOptions& options);

/// Spectral projected gradient on the box lower <= x <= upper with a
/// nonmonotone Armijo line search along the projection arc.
MinimizeResult projected_gradient_minimize(const Objective& objective, std::vector<double> x0,
                                           std::span<const double> lower, std::span<const double> upper,
                                           const MinimizeOptions& options);

} // namespace fracsing

#endif
