#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "hjlab/variational.hpp"
#include "oracles.hpp"

namespace hjlab {
namespace {

const Hamiltonian kHalfSquare = Hamiltonian::quadratic(0.0);
const Hamiltonian kDrift = Hamiltonian::quadratic(1.0);

SampledFn abs_fn() { return SampledFn::sample(Grid1D(-10, 10, 401), [](double y) { return std::abs(y); }); }

TEST(HopfLax, ConstantsInvariant) {
    auto zero = SampledFn::sample(Grid1D(-5, 5, 11), [](double) { return 0.0; });
    for (double x : {-3.0, 0.0, 7.5})
        for (double t : {0.1, 2.0, 50.0}) EXPECT_NEAR(hopf_lax_evaluate(kHalfSquare, zero, x, t), 0.0, 1e-12);
}

TEST(HopfLax, HuberEnvelopeAgainstDenseOracle) {
    auto u0 = abs_fn();
    auto o0 = oracle::hopf_lax_quadratic([](double y) { return std::abs(y); }, 0.0, 0.0, 2.0, -20, 20);
    auto o3 = oracle::hopf_lax_quadratic([](double y) { return std::abs(y); }, 0.0, 3.0, 2.0, -20, 20);
    EXPECT_NEAR(o0.value, 0.0, 1e-9);
    EXPECT_NEAR(o3.value, 2.0, 1e-9);
    EXPECT_NEAR(hopf_lax_evaluate(kHalfSquare, u0, 0.0, 2.0), o0.value, 1e-9);
    EXPECT_NEAR(hopf_lax_evaluate(kHalfSquare, u0, 3.0, 2.0), o3.value, 1e-9);
    for (double x = -6.0; x <= 6.0; x += 0.37)
        EXPECT_NEAR(hopf_lax_evaluate(kHalfSquare, u0, x, 2.0), oracle::huber(x, 2.0), 1e-9) << x;
}

TEST(HopfLax, RandomDataMatchesDenseOracle) {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    Grid1D g(-4, 4, 33);
    for (int trial = 0; trial < 10; ++trial) {
        std::vector<double> v(g.size());
        v[0] = U(rng);
        for (std::size_t i = 1; i < v.size(); ++i) v[i] = v[i - 1] + 0.25 * U(rng);
        SampledFn u0(g, v);
        for (double e : {0.0, 1.0}) {
            auto h = Hamiltonian::quadratic(e);
            for (double x : {-1.5, 0.0, 2.2}) {
                double t = 0.5 + trial * 0.3;
                auto o = oracle::hopf_lax_quadratic([&](double y) { return u0(y); }, e, x, t, -30, 30);
                EXPECT_NEAR(hopf_lax_evaluate(h, u0, x, t), o.value, 1e-8);
            }
        }
    }
}

TEST(HopfLax, NumericLagrangianPathMatchesClosedForm) {
    // tabulated p^2/2 exercises the golden-section path
    Grid1D pg(-6.0, 6.0, 1201);
    std::vector<double> vals;
    for (std::size_t i = 0; i < pg.size(); ++i) vals.push_back(0.5 * pg.node(i) * pg.node(i));
    auto tab = Hamiltonian::tabulated({std::nullopt, pg, vals});
    auto u0 = SampledFn::sample(Grid1D(-4, 4, 17), [](double y) { return std::abs(y); });
    for (double x : {0.0, 1.0, 3.0})
        EXPECT_NEAR(hopf_lax_evaluate(tab, u0, x, 2.0), oracle::huber(x, 2.0), 1e-4);
}

TEST(HopfLax, EikonalIsSlopeLimitedMinimum) {
    // H = |p|: u(x,t) = min over |y - x| <= t of u0(y)
    auto h = Hamiltonian::eikonal_shift(0.0);
    auto u0 = SampledFn::sample(Grid1D(-5, 5, 101), [](double y) { return std::cos(y); });
    for (double x : {-1.0, 0.5, 2.0}) {
        double t = 0.7;
        auto o = oracle::dense_min([&](double y) { return u0(y); }, x - t, x + t);
        EXPECT_NEAR(hopf_lax_evaluate(h, u0, x, t), o.value, 1e-9);
    }
}

TEST(HopfLax, Preconditions) {
    auto u0 = abs_fn();
    EXPECT_THROW(hopf_lax_evaluate(kHalfSquare, u0, 0.0, 0.0), Error);
    auto f = SampledFn::sample(Grid1D(-1, 1, 3), [](double) { return -1.0; });
    EXPECT_THROW(hopf_lax_evaluate(Hamiltonian::quad_potential(0.1, f), u0, 0.0, 1.0), Error);
}

TEST(HopfLax, ContractionMonotonicityStationarity) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    Grid1D g(-6, 6, 49);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> a(g.size()), b(g.size());
        a[0] = U(rng);
        for (std::size_t i = 1; i < a.size(); ++i) a[i] = a[i - 1] + 0.4 * U(rng);
        for (std::size_t i = 0; i < a.size(); ++i) b[i] = a[i] + 0.5 * (1.0 + U(rng));
        SampledFn ua(g, a, Extension::constant), ub(g, b, Extension::constant);
        double gap = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) gap = std::max(gap, std::abs(a[i] - b[i]));
        for (double x : {-2.0, 0.3, 1.7}) {
            for (double t : {0.5, 3.0}) {
                double va = hopf_lax_evaluate(kDrift, ua, x, t), vb = hopf_lax_evaluate(kDrift, ub, x, t);
                EXPECT_LE(va, vb + 1e-12);
                EXPECT_LE(std::abs(va - vb), gap + 1e-12);
            }
        }
    }
    // affine phi with H(phi') = lambda is stationary up to -lambda t
    for (double slope : {-0.5, 0.0, 1.0, 2.0}) {
        auto phi = SampledFn::sample(Grid1D(-1, 1, 3), [=](double y) { return slope * y + 0.3; });
        double lambda = kDrift(0.0, slope);
        for (double x : {-5.0, 0.0, 4.0})
            for (double t : {1.0, 10.0})
                EXPECT_NEAR(hopf_lax_evaluate(kDrift, phi, x, t), phi(x) - lambda * t,
                            1e-9 * std::max(1.0, std::abs(phi(x) - lambda * t)));
    }
}

TEST(HopfLax, Semigroup) {
    auto u0 = SampledFn::sample(Grid1D(-8, 8, 161), [](double y) { return std::abs(y) + 0.5 * std::sin(2 * y); });
    Grid1D fine(-30, 30, 6001);
    for (double t : {0.5, 1.5}) {
        auto ut = hopf_lax_on_grid(kHalfSquare, u0, fine, t);
        for (double s : {0.25, 1.0})
            for (double x : {-1.0, 0.2, 2.5}) {
                double direct = hopf_lax_evaluate(kHalfSquare, u0, x, t + s);
                double composed = hopf_lax_evaluate(kHalfSquare, ut, x, s);
                // the intermediate level is resampled on a grid of spacing 0.01
                EXPECT_NEAR(direct, composed, 2e-4) << "t=" << t << " s=" << s << " x=" << x;
            }
    }
}

TEST(Backtrack, ConstantDataStaysPut) {
    auto zero = SampledFn::sample(Grid1D(-10, 10, 21), [](double) { return 0.0; });
    auto tr = backtrack_minimizer(kHalfSquare, zero, 5.0, 3.0);
    EXPECT_NEAR(tr.start_point, 5.0, 1e-9);
    EXPECT_NEAR(tr.action, 0.0, 1e-12);
    for (double p : tr.positions) EXPECT_NEAR(p, 5.0, 1e-9);
    EXPECT_EQ(tr.positions.back(), 5.0);
}

TEST(Backtrack, CharacteristicOfAffineSolution) {
    auto phi = SampledFn::sample(Grid1D(-1, 1, 3), [](double y) { return y; });
    auto o = oracle::hopf_lax_quadratic([](double y) { return y; }, 0.0, 0.0, 4.0, -20, 20);
    EXPECT_NEAR(o.x, -4.0, 1e-6);
    auto tr = backtrack_minimizer(kHalfSquare, phi, 0.0, 4.0);
    EXPECT_NEAR(tr.start_point, o.x, 1e-6);
    EXPECT_NEAR(tr.action, -2.0, 1e-9);
    EXPECT_NEAR(tr.action, hopf_lax_evaluate(kHalfSquare, phi, 0.0, 4.0), 1e-6 * 2.0);
    EXPECT_TRUE(tr.unique);
    EXPECT_NEAR(tr.positions[50], -2.0, 1e-9);  // midpoint of the straight line
}

TEST(Backtrack, RequiresStrictConvexity) {
    auto u0 = abs_fn();
    EXPECT_THROW(backtrack_minimizer(Hamiltonian::eikonal_shift(0.0), u0, 0.0, 1.0), Error);
}

TEST(Backtrack, NonUniqueReportsSmallest) {
    // u0 = -|y| with H = p^2/2: at x = 0 minimizers +-t are symmetric
    auto u0 = SampledFn::sample(Grid1D(-10, 10, 201), [](double y) { return -std::abs(y); });
    auto tr = backtrack_minimizer(kHalfSquare, u0, 0.0, 2.0);
    EXPECT_FALSE(tr.unique);
    EXPECT_NEAR(tr.start_point, -2.0, 1e-6);
}

TEST(Staircase, CornerValuesMatchDefinition) {
    auto spec = StaircaseSpec::default_sequence();
    ASSERT_EQ(spec.a.size(), 6u);
    EXPECT_EQ(spec.a[5], 1e15);
    auto u0 = build_staircase_u0(spec.a, Grid1D(0.0, spec.a.back(), 2));
    EXPECT_EQ(u0(spec.a[2]), oracle::staircase(spec.a, spec.a[2]));
    EXPECT_EQ(u0(spec.a[2]), 0.0);
    EXPECT_EQ(oracle::staircase(spec.a, spec.a[3]), -999000.0);
    EXPECT_EQ(u0(spec.a[3]), -999000.0);
    EXPECT_DOUBLE_EQ(u0.lipschitz(), 1.0);
    for (double a : spec.a) {
        // every sequence point is a node
        bool found = false;
        for (double x : u0.nodes()) found = found || x == a;
        EXPECT_TRUE(found) << a;
    }
    for (double y : {-5.0, 0.5, 5.0, 500.0, 5e5, 3e8, 5e12, 2e15})
        EXPECT_NEAR(u0(y), oracle::staircase(spec.a, y), 1e-9 * std::max(1.0, std::abs(u0(y)))) << y;
}

TEST(Staircase, NonincreasingAndOneLipschitz) {
    StaircaseSpec s{{2.0, 5.0, 20.0, 120.0, 1000.0, 12000.0, 300000.0}};
    auto u0 = build_staircase_u0(s.a, Grid1D(0.0, 300000.0, 301));
    EXPECT_DOUBLE_EQ(u0.lipschitz(), 1.0);
    auto v = u0.values();
    for (std::size_t i = 1; i < v.size(); ++i) EXPECT_LE(v[i], v[i - 1]);
}

TEST(Staircase, RejectsBadSequences) {
    Grid1D g(0.0, 1e15, 2);
    try {
        build_staircase_u0(std::vector<double>{1, 10, 100, 1000, 1e4, 1e5}, g);  // constant ratio
        FAIL();
    } catch (const Error& e) {
        EXPECT_STREQ(e.what(), "sequence violates growth-ratio condition");
    }
    EXPECT_THROW(build_staircase_u0(std::vector<double>{1, 10, 1000}, g), Error);
    EXPECT_THROW(build_staircase_u0(StaircaseSpec::default_sequence().a, Grid1D(0.0, 1e10, 2)), Error);
}

TEST(Staircase, HopfLaxOnPlateauAndSlope) {
    auto spec = StaircaseSpec::default_sequence();
    const auto& a = spec.a;
    auto u0 = build_staircase_u0(a, Grid1D(0.0, a.back(), 2));
    // t = a_4 / 4 lies in (a_3, a_4 / 2): value u0(a_3), minimizer y = t
    double t = a[4] / 4;
    auto hl = hopf_lax(kDrift, u0, 0.0, t);
    EXPECT_NEAR(hl.value, oracle::staircase(a, a[3]), 1e-6);
    EXPECT_NEAR(hl.argmin, t, 1e-6 * t);
    // t in (a_2, a_3 / 2): minimizer 2t on the descending piece
    for (double tt : {2e3, 1e5, 4.9e5}) {
        auto tr = backtrack_minimizer(kDrift, u0, 0.0, tt);
        EXPECT_NEAR(tr.start_point, 2 * tt, 1e-9 * tt);
        double expect = oracle::staircase(a, 2 * tt) + tt / 2;
        EXPECT_NEAR(tr.action, expect, 1e-6 * std::abs(expect));
    }
}

}  // namespace
}  // namespace hjlab
