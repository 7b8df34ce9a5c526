#include "fracsing/kernel.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace fracsing;

namespace {

std::vector<double> random_interior(std::size_t n, std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    std::vector<double> x(n);
    for (double& v : x) v = U(rng);
    return x;
}

double fd_relative_error(const KernelWeights& w, const std::vector<double>& x)
{
    std::vector<double> g(x.size());
    w.energy_and_gradient(x, g);
    double gmax = 0.0, err = 0.0;
    for (double v : g) gmax = std::max(gmax, std::abs(v));
    std::vector<double> y = x;
    const double step = 1e-5;
    for (std::size_t a = 0; a < x.size(); ++a) {
        y[a] = x[a] + step;
        const double fp = w.energy(y);
        y[a] = x[a] - step;
        const double fm = w.energy(y);
        y[a] = x[a];
        const double fd = (fp - fm) / (2.0 * step) / w.p();
        err = std::max(err, std::abs(fd - g[a]));
    }
    return err / gmax;
}

} // namespace

TEST(Kernel, PairWeightExample)
{
    auto d = build_interval(-1.0, 1.0, 5, 0.0);
    const auto w = KernelWeights::assemble(d, 0.5, 2.0);
    EXPECT_DOUBLE_EQ(w.pair_weight(1, 2), 1.0);
    EXPECT_DOUBLE_EQ(w.pair_weight(2, 1), 1.0);
    EXPECT_EQ(w.pair_weight(2, 2), 0.0);
    EXPECT_DOUBLE_EQ(w.pair_weight(1, 3), 0.25 / std::pow(1.0, 2.0));
}

TEST(Kernel, TailIntegralExample)
{
    EXPECT_NEAR(ball_tail_integral(1, 1.0, 10.0), 0.2, 1e-15);
    EXPECT_NEAR(ball_tail_integral(2, 0.5, 4.0), 2.0 * M_PI * std::pow(4.0, -0.5) / 0.5, 1e-14);
}

TEST(Kernel, BoxComplementMatchesIntervalClosedForm)
{
    const double sp = 0.6, x = 0.3;
    const double expect = (std::pow(x + 1.0, -sp) + std::pow(1.0 - x, -sp)) / sp;
    EXPECT_NEAR(box_complement_integral(1, sp, {x, 0.0}, {-1.0, 0.0}, {1.0, 0.0}), expect, 1e-13);
}

TEST(Kernel, BoxComplementSquareBoundedByBalls)
{
    const double sp = 0.7;
    const double v = box_complement_integral(2, sp, {0.0, 0.0}, {-1.0, -1.0}, {1.0, 1.0});
    EXPECT_LT(v, ball_tail_integral(2, sp, 1.0));
    EXPECT_GT(v, ball_tail_integral(2, sp, std::sqrt(2.0)));
}

TEST(Kernel, StandingAssumption)
{
    auto d = build_interval(-1.0, 1.0, 9, 0.0);
    try {
        KernelWeights::assemble(d, 0.9, 2.0);
        FAIL() << "expected rejection";
    } catch (const std::invalid_argument& e) {
        EXPECT_NE(std::string(e.what()).find("standing assumption violated"), std::string::npos);
    }
    EXPECT_THROW(KernelWeights::assemble(d, 0.5, 2.0, AssumptionPolicy::Strict), std::invalid_argument);
    EXPECT_NO_THROW(KernelWeights::assemble(d, 0.5, 2.0, AssumptionPolicy::Borderline));
    EXPECT_NO_THROW(KernelWeights::assemble(d, 0.9, 2.0, AssumptionPolicy::Off));
    EXPECT_THROW(KernelWeights::assemble(d, 1.0, 2.0, AssumptionPolicy::Off), std::invalid_argument);
    EXPECT_THROW(KernelWeights::assemble(d, 0.5, 1.0, AssumptionPolicy::Off), std::invalid_argument);
}

TEST(Kernel, WeightsSymmetricNonnegative)
{
    auto d = build_rectangle({-1.0, -1.0}, {1.0, 1.0}, {7, 7}, 0.5);
    const auto w = KernelWeights::assemble(d, 0.4, 2.0);
    const auto pairs = w.interior_pairs();
    const std::size_t n = w.unknowns();
    for (std::size_t a = 0; a < n; ++a) {
        EXPECT_EQ(pairs[a * n + a], 0.0);
        for (std::size_t b = 0; b < n; ++b) {
            EXPECT_EQ(pairs[a * n + b], pairs[b * n + a]);
            EXPECT_GE(pairs[a * n + b], 0.0);
            EXPECT_TRUE(std::isfinite(pairs[a * n + b]));
        }
    }
    for (double t : w.tail_weights()) EXPECT_GE(t, 0.0);
}

TEST(Kernel, TailNonincreasingInPad)
{
    double prev = INFINITY;
    for (double pad : {0.0, 0.5, 1.0, 2.0, 4.0}) {
        auto d = build_interval(-1.0, 1.0, 17, pad);
        const auto w = KernelWeights::assemble(d, 0.5, 1.5);
        std::size_t mid = d->interior_indices()[7];
        EXPECT_LE(w.tail_weight(mid), prev);
        prev = w.tail_weight(mid);
    }
}

TEST(Seminorm, ZeroAndSingleton)
{
    auto d = build_interval(-1.0, 1.0, 17, 0.5);
    const auto w = KernelWeights::assemble(d, 0.3, 2.0);
    EXPECT_EQ(seminorm_p(w, Field(d)), 0.0);
    const std::size_t i = d->interior_indices()[4];
    Field u(d);
    u.set(i, 1.0);
    double expect = 2.0 * w.tail_weight(i);
    for (std::size_t j = 0; j < d->node_count(); ++j) expect += 2.0 * w.pair_weight(i, j);
    EXPECT_NEAR(seminorm_p(w, u), expect, 1e-13 * expect);
}

TEST(Seminorm, Homogeneity)
{
    std::mt19937_64 rng(7);
    auto d = build_interval(-1.0, 1.0, 33, 1.0);
    for (double p : {1.5, 2.0, 3.0}) {
        const auto w = KernelWeights::assemble(d, 0.3, p);
        const auto x = random_interior(w.unknowns(), rng);
        const double base = w.energy(x);
        for (double alpha : {-2.5, 0.1, 3.0}) {
            std::vector<double> y = x;
            for (double& v : y) v *= alpha;
            EXPECT_NEAR(w.energy(y), std::pow(std::abs(alpha), p) * base, 1e-12 * std::pow(std::abs(alpha), p) * base);
        }
    }
}

TEST(Seminorm, RefinementConverges)
{
    std::vector<double> values;
    for (std::size_t M : {65u, 129u, 257u}) {
        auto d = build_interval(-1.0, 1.0, M, 1.0);
        const auto w = KernelWeights::assemble(d, 0.3, 2.0);
        values.push_back(seminorm_p(w, Field::from_function(d, [](const Point& x) { return 1.0 - x[0] * x[0]; })));
    }
    const double d1 = std::abs(values[1] - values[0]);
    const double d2 = std::abs(values[2] - values[1]);
    EXPECT_LT(d2, d1);
    const double rate = std::log2(d1 / d2);
    EXPECT_GT(rate, 0.5);
    const double extrapolated = values[2] + d2 * d2 / (d1 - d2);
    EXPECT_LT(std::abs(extrapolated - values[2]), 0.05 * values[2]);
}

TEST(Seminorm, TailConsistencyAcrossPads)
{
    auto near = build_interval(-1.0, 1.0, 33, 0.5);
    auto far = build_interval(-1.0, 1.0, 33, 2.0);
    auto g = [](const Point& x) { return std::cos(0.5 * M_PI * x[0]) + 0.3 * x[0]; };
    for (double p : {1.5, 2.0, 3.0}) {
        const auto wn = KernelWeights::assemble(near, 0.4, p, AssumptionPolicy::Off);
        const auto wf = KernelWeights::assemble(far, 0.4, p, AssumptionPolicy::Off);
        const Field un = Field::from_function(near, g);
        const Field uf = Field::from_function(far, g);
        const auto in = near->interior_indices();
        const auto jf = far->interior_indices();
        double tail_gap = 0.0;
        for (std::size_t a = 0; a < in.size(); ++a)
            tail_gap += 2.0 * std::pow(std::abs(un[in[a]]), p) * (wn.tail_weight(in[a]) - wf.tail_weight(jf[a]));
        EXPECT_LE(std::abs(seminorm_p(wn, un) - seminorm_p(wf, uf)), tail_gap + 1e-8) << "p=" << p;
    }
}

TEST(Operator, ZeroFieldAndLinearity)
{
    std::mt19937_64 rng(11);
    auto d = build_interval(-1.0, 1.0, 33, 0.5);
    const auto w2 = KernelWeights::assemble(d, 0.5, 2.0);
    const Field zero(d);
    EXPECT_EQ(apply_operator(w2, zero).sup_norm(), 0.0);
    const Field u = Field::from_interior(d, random_interior(w2.unknowns(), rng));
    const Field v = Field::from_interior(d, random_interior(w2.unknowns(), rng));
    std::vector<double> comb(w2.unknowns());
    const auto ui = u.interior_values(), vi = v.interior_values();
    for (std::size_t a = 0; a < comb.size(); ++a) comb[a] = 2.5 * ui[a] - 0.7 * vi[a];
    const Field Au = apply_operator(w2, u), Av = apply_operator(w2, v);
    const Field Ac = apply_operator(w2, Field::from_interior(d, comb));
    for (std::size_t i : d->interior_indices()) EXPECT_NEAR(Ac[i], 2.5 * Au[i] - 0.7 * Av[i], 1e-13);
}

TEST(Operator, EqualNeighboursBelowTwo)
{
    auto d = build_interval(-1.0, 1.0, 9, 0.0);
    const auto w = KernelWeights::assemble(d, 0.3, 1.5);
    Field u = Field::from_function(d, [](const Point&) { return 1.0; });
    const Field Au = apply_operator(w, u);
    for (std::size_t i : d->interior_indices()) EXPECT_TRUE(std::isfinite(Au[i]));
}

TEST(Operator, GradientMatchesFiniteDifferences)
{
    std::mt19937_64 rng(3);
    auto d = build_interval(-1.0, 1.0, 33, 0.5);
    for (double p : {1.5, 2.0, 3.0}) {
        for (double s : {0.3, 0.7}) {
            const auto w = KernelWeights::assemble(d, s, p, AssumptionPolicy::Off);
            for (int trial = 0; trial < 3; ++trial)
                EXPECT_LE(fd_relative_error(w, random_interior(w.unknowns(), rng)), 1e-5) << "p=" << p << " s=" << s;
        }
    }
}

TEST(Operator, GradientMatchesFiniteDifferences2D)
{
    std::mt19937_64 rng(5);
    auto d = build_ball({0.0, 0.0}, 1.0, 9, 0.3);
    const auto w = KernelWeights::assemble(d, 0.5, 2.5);
    EXPECT_LE(fd_relative_error(w, random_interior(w.unknowns(), rng)), 1e-5);
}

TEST(WeakResidual, PerturbationGrowsAndZeroRejected)
{
    auto d = build_interval(-1.0, 1.0, 33, 0.5);
    const auto w = KernelWeights::assemble(d, 0.5, 2.0);
    const Field u = Field::from_function(d, [](const Point& x) { return 1.0 - x[0] * x[0]; });
    // source for which u is an exact discrete solution with gamma = 1
    const Field Au = apply_operator(w, u);
    Field f(d);
    for (std::size_t i : d->interior_indices()) f.set(i, Au[i] / d->cell_volume() * u[i]);
    const CompactSubset k = inner_subset(*d);
    const std::size_t node = k.node_indices[k.node_indices.size() / 2];
    double prev = -1.0;
    for (double delta : {0.0, 0.01, 0.02, 0.05, 0.1}) {
        Field v = u;
        v.set(node, u[node] + delta);
        const double r = weak_residual(w, v, f, 1.0, k);
        if (delta == 0.0) EXPECT_LT(r, 1e-10);
        else EXPECT_GT(r, prev);
        prev = r;
    }
    Field z = u;
    z.set(node, 0.0);
    EXPECT_THROW(weak_residual(w, z, f, 1.0, k), std::invalid_argument);
}
