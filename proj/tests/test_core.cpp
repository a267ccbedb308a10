#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "hjlab/core.hpp"
#include "oracles.hpp"

namespace hjlab {
namespace {

TEST(Grid1D, NodesAndSpacing) {
    Grid1D g(-1.0, 3.0, 5);
    EXPECT_DOUBLE_EQ(g.dx(), 1.0);
    EXPECT_EQ(g.node(0), -1.0);
    EXPECT_EQ(g.node(3), -1.0 + 3 * 1.0);
    EXPECT_THROW(Grid1D(1.0, 1.0, 3), Error);
    EXPECT_THROW(Grid1D(0.0, 1.0, 1), Error);
}

TEST(Grid1D, SymmetricHasOriginNode) {
    auto g = Grid1D::symmetric(2.0, 0.02);
    EXPECT_EQ(g.size() % 2, 1u);
    EXPECT_NEAR(g.node(g.size() / 2), 0.0, 1e-15);
    EXPECT_NEAR(g.x_max(), 2.0, 1e-12);
}

TEST(Interpolate, LinearBetweenNodes) {
    SampledFn f(Grid1D(0.0, 2.0, 3), {0.0, 1.0, 2.0});
    EXPECT_DOUBLE_EQ(interpolate(f, 0.5), 0.5);
    EXPECT_EQ(interpolate(f, 2.0), 2.0);
    EXPECT_EQ(interpolate(f, 1.0), 1.0);
}

TEST(Interpolate, ConstantExtension) {
    SampledFn f(Grid1D(0.0, 1.0, 4), {7.0, 7.0, 7.0, 7.0}, Extension::constant);
    EXPECT_EQ(interpolate(f, -100.0), 7.0);
}

TEST(Interpolate, LinearExtensionKeepsEndSlope) {
    SampledFn f(Grid1D(0.0, 1.0, 3), {0.0, 0.5, 2.0});
    EXPECT_DOUBLE_EQ(f(2.0), 2.0 + 3.0);
    EXPECT_DOUBLE_EQ(f(-1.0), -1.0);
}

TEST(Interpolate, RejectsNonFinite) {
    SampledFn f(Grid1D(0.0, 1.0, 2), {0.0, 1.0});
    EXPECT_THROW(f(std::nan("")), Error);
    EXPECT_THROW(SampledFn(Grid1D(0.0, 1.0, 2), {0.0, INFINITY}), Error);
}

TEST(SupNormWindow, Identity) {
    auto f = SampledFn::sample(Grid1D(-2, 2, 41), [](double x) { return std::sin(x); });
    EXPECT_EQ(sup_norm_window(f, f, Window(-1.0, 1.5)), 0.0);
}

TEST(SupNormWindow, ZeroAgainstIdentityMap) {
    Grid1D g(-1.0, 2.0, 31);
    auto f = SampledFn::sample(g, [](double) { return 0.0; });
    auto id = SampledFn::sample(g, [](double x) { return x; });
    EXPECT_NEAR(sup_norm_window(f, id, Window(-1.0, 2.0)), 2.0, 1e-14);
}

TEST(SupNormWindow, SquareMatchesDenseSampling) {
    Grid1D g(-3.0, 1.0, 41);
    auto sq = SampledFn::sample(g, [](double x) { return x * x; });
    auto zero = SampledFn::sample(g, [](double) { return 0.0; });
    // dense-sampling oracle on the same interpolant
    double dense = 0.0;
    for (int i = 0; i <= 40000; ++i) dense = std::max(dense, std::abs(sq(-3.0 + 4.0 * i / 40000)));
    EXPECT_NEAR(dense, 9.0, 1e-12);
    EXPECT_NEAR(sup_norm_window(sq, zero, Window(-3.0, 1.0)), dense, 1e-12);
}

TEST(SupNormWindow, OutsideDomain) {
    auto f = SampledFn::sample(Grid1D(0, 1, 3), [](double x) { return x; });
    EXPECT_THROW(sup_norm_window(f, f, Window(5.0, 6.0)), Error);
}

TEST(CoreProperties, MonotoneInterpolationAndMetric) {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    Grid1D g(-2.0, 2.0, 33);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> a(g.size()), b(g.size()), c(g.size());
        for (std::size_t i = 0; i < g.size(); ++i) {
            a[i] = U(rng);
            b[i] = a[i] + std::abs(U(rng));
            c[i] = U(rng);
        }
        SampledFn fa(g, a), fb(g, b), fc(g, c);
        for (int k = 0; k <= 200; ++k) {
            double x = -2.0 + 4.0 * k / 200.0;
            EXPECT_LE(fa(x), fb(x));
        }
        Window w(-1.3, 1.7);
        double ab = sup_norm_window(fa, fb, w), ba = sup_norm_window(fb, fa, w);
        EXPECT_EQ(ab, ba);
        EXPECT_LE(sup_norm_window(fa, fc, w), ab + sup_norm_window(fb, fc, w) + 1e-15);

        // Lipschitz estimate of the interpolant equals the discrete one
        double dense = 0.0;
        for (int k = 0; k < 4000; ++k) {
            double x0 = -3.0 + 6.0 * k / 4000, x1 = -3.0 + 6.0 * (k + 1) / 4000;
            dense = std::max(dense, std::abs(fa(x1) - fa(x0)) / (x1 - x0));
        }
        EXPECT_NEAR(dense, fa.lipschitz(), 1e-9 * fa.lipschitz());
    }
}

TEST(Window, RejectsInverted) {
    EXPECT_THROW(Window(1.0, 0.0), Error);
    EXPECT_THROW(Window(0.0, 1.0).shrunk(0.6), Error);
}

}  // namespace
}  // namespace hjlab
