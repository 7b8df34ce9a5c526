#include "fracsing/minimize.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace fracsing {

namespace {

double dot(std::span<const double> a, std::span<const double> b)
{
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double inf_norm(std::span<const double> a)
{
    double m = 0.0;
    for (double v : a) m = std::max(m, std::abs(v));
    return m;
}

struct Pair {
    std::vector<double> s;
    std::vector<double> y;
    double rho;
};

// Hager-Zhang style acceptance once the objective change drowns in rounding:
// the value may not rise beyond the noise band and the slope must have shrunk.
bool approximately_wolfe(double f0, double f1, double slope0, double slope1)
{
    const double noise = 1e-12 * std::abs(f0) + std::numeric_limits<double>::min();
    return f1 <= f0 + noise && slope1 <= 0.8 * std::abs(slope0) && slope1 >= 0.9 * slope0;
}

double gradient_noise(const Objective& objective, std::span<const double> x, std::span<const double> g)
{
    constexpr double eps = std::numeric_limits<double>::epsilon();
    std::vector<double> xp(x.begin(), x.end()), gp(x.size());
    for (std::size_t i = 0; i < xp.size(); ++i) xp[i] *= 1.0 + ((i * 2654435761u) % 5 - 2.0) * eps;
    objective(xp, gp);
    double m = 0.0;
    for (std::size_t i = 0; i < gp.size(); ++i) m = std::max(m, std::abs(gp[i] - g[i]));
    return m;
}

} // namespace

MinimizeResult lbfgs_minimize(const Objective& objective, std::vector<double> x0, const MinimizeOptions& options)
{
    const std::size_t n = x0.size();
    MinimizeResult res;
    res.x = std::move(x0);
    std::vector<double> g(n), d(n), xn(n), gn(n), alpha_buf(options.memory);
    double f = objective(res.x, g);
    res.evaluations = 1;
    std::deque<Pair> hist;
    double best = std::numeric_limits<double>::infinity();
    std::size_t best_at = 0;

    for (res.iterations = 0; res.iterations < options.max_iters; ++res.iterations) {
        res.grad_norm = inf_norm(g);
        if (res.grad_norm <= options.grad_tol || n == 0) {
            res.converged = true;
            break;
        }
        if (res.grad_norm < 0.5 * best) {
            best = res.grad_norm;
            best_at = res.iterations;
        } else if (options.stall_window > 0 && res.iterations - best_at >= options.stall_window) {
            res.stalled = true;
            break;
        }

        // two-loop recursion
        for (std::size_t i = 0; i < n; ++i) d[i] = -g[i];
        for (std::size_t k = hist.size(); k-- > 0;) {
            const Pair& p = hist[k];
            const double a = p.rho * dot(p.s, d);
            alpha_buf[k] = a;
            for (std::size_t i = 0; i < n; ++i) d[i] -= a * p.y[i];
        }
        double scale;
        if (!hist.empty()) {
            const Pair& last = hist.back();
            scale = dot(last.s, last.y) / dot(last.y, last.y);
        } else {
            scale = 1.0 / std::max(res.grad_norm, 1e-300) * std::min(1.0, std::max(1e-3, inf_norm(res.x)));
        }
        for (std::size_t i = 0; i < n; ++i) d[i] *= scale;
        for (std::size_t k = 0; k < hist.size(); ++k) {
            const Pair& p = hist[k];
            const double b = p.rho * dot(p.y, d);
            for (std::size_t i = 0; i < n; ++i) d[i] += (alpha_buf[k] - b) * p.s[i];
        }

        double slope = dot(g, d);
        if (!(slope < 0.0)) {
            hist.clear();
            const double sd = std::min(1.0, std::max(1e-3, inf_norm(res.x))) / res.grad_norm;
            for (std::size_t i = 0; i < n; ++i) d[i] = -g[i] * sd;
            slope = dot(g, d);
        }

        double step = 1.0;
        bool accepted = false;
        double fn = f;
        for (std::size_t bt = 0; bt < options.max_backtracks; ++bt) {
            for (std::size_t i = 0; i < n; ++i) xn[i] = res.x[i] + step * d[i];
            fn = objective(xn, gn);
            ++res.evaluations;
            if (std::isfinite(fn)) {
                if (fn <= f + options.armijo * step * slope ||
                    approximately_wolfe(f, fn, slope, dot(gn, d))) {
                    accepted = true;
                    break;
                }
            }
            step *= 0.5;
        }
        if (!accepted) {
            if (!hist.empty()) {
                hist.clear();
                continue;
            }
            break;
        }

        Pair p{std::vector<double>(n), std::vector<double>(n), 0.0};
        for (std::size_t i = 0; i < n; ++i) {
            p.s[i] = xn[i] - res.x[i];
            p.y[i] = gn[i] - g[i];
        }
        const double sy = dot(p.s, p.y);
        res.x.swap(xn);
        g.swap(gn);
        f = fn;
        if (sy > 1e-300 && sy > 1e-14 * std::sqrt(dot(p.s, p.s) * dot(p.y, p.y))) {
            p.rho = 1.0 / sy;
            hist.push_back(std::move(p));
            if (hist.size() > options.memory) hist.pop_front();
        }
    }
    res.value = f;
    res.grad_norm = inf_norm(g);
    res.converged = res.converged || res.grad_norm <= options.grad_tol;
    if (res.stalled) {
        res.noise_floor = gradient_noise(objective, res.x, g);
        ++res.evaluations;
        res.converged = res.grad_norm <= 10.0 * res.noise_floor;
    }
    return res;
}

MinimizeResult projected_gradient_minimize(const Objective& objective, std::vector<double> x0,
                                           std::span<const double> lower, std::span<const double> upper,
                                           const MinimizeOptions& options)
{
    const std::size_t n = x0.size();
    if (lower.size() != n || upper.size() != n) throw std::invalid_argument("projected gradient: bound size mismatch");
    for (std::size_t i = 0; i < n; ++i)
        if (lower[i] > upper[i]) throw std::invalid_argument("projected gradient: empty box");

    auto project = [&](std::vector<double>& v) {
        for (std::size_t i = 0; i < n; ++i) v[i] = std::clamp(v[i], lower[i], upper[i]);
    };
    auto projected_gradient_norm = [&](const std::vector<double>& x, const std::vector<double>& g) {
        double m = 0.0;
        for (std::size_t i = 0; i < n; ++i) m = std::max(m, std::abs(std::clamp(x[i] - g[i], lower[i], upper[i]) - x[i]));
        return m;
    };

    MinimizeResult res;
    res.x = std::move(x0);
    project(res.x);
    std::vector<double> g(n), d(n), xn(n), gn(n);
    double f = objective(res.x, g);
    res.evaluations = 1;
    constexpr std::size_t window = 10;
    std::deque<double> recent{f};
    double lambda = 1.0 / std::max(inf_norm(g), 1e-300);

    for (res.iterations = 0; res.iterations < options.max_iters; ++res.iterations) {
        res.grad_norm = projected_gradient_norm(res.x, g);
        if (res.grad_norm <= options.grad_tol || n == 0) {
            res.converged = true;
            break;
        }
        for (std::size_t i = 0; i < n; ++i) d[i] = std::clamp(res.x[i] - lambda * g[i], lower[i], upper[i]) - res.x[i];
        const double slope = dot(g, d);
        const double fmax = *std::max_element(recent.begin(), recent.end());

        double step = 1.0;
        bool accepted = false;
        double fn = f;
        for (std::size_t bt = 0; bt < options.max_backtracks; ++bt) {
            for (std::size_t i = 0; i < n; ++i) xn[i] = res.x[i] + step * d[i];
            fn = objective(xn, gn);
            ++res.evaluations;
            if (std::isfinite(fn) && (fn <= fmax + options.armijo * step * slope ||
                                      approximately_wolfe(f, fn, slope, dot(gn, d)))) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) break;

        double ss = 0.0;
        double sy = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double si = xn[i] - res.x[i];
            const double yi = gn[i] - g[i];
            ss += si * si;
            sy += si * yi;
        }
        res.x.swap(xn);
        g.swap(gn);
        f = fn;
        recent.push_back(f);
        if (recent.size() > window) recent.pop_front();
        lambda = sy > 0.0 ? std::clamp(ss / sy, 1e-30, 1e30) : 1e3 * lambda;
    }
    res.value = f;
    res.grad_norm = projected_gradient_norm(res.x, g);
    res.converged = res.converged || res.grad_norm <= options.grad_tol;
    return res;
}

} // namespace fracsing
