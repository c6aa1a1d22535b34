#include <gtest/gtest.h>

#include <cmath>

#include "negcurv/errors.hpp"
#include "negcurv/instability.hpp"

using namespace negcurv;

TEST(Cutoff, PlateauSupportAndMonotone) {
    EXPECT_EQ(cutoff_chi(0.5), 1.0);
    EXPECT_EQ(cutoff_chi(1.0), 1.0);
    EXPECT_EQ(cutoff_chi(-4.0), 1.0);
    EXPECT_EQ(cutoff_chi(2.0), 0.0);
    EXPECT_EQ(cutoff_chi(3.0), 0.0);
    EXPECT_GT(cutoff_chi(1.5), 0.0);
    EXPECT_LT(cutoff_chi(1.5), 1.0);
    EXPECT_NEAR(cutoff_chi(1.5), 0.5, 1e-15);
    double prev = 1.0;
    for (int k = 0; k <= 1000; ++k) {
        const double c = cutoff_chi(1.0 + k / 1000.0);
        EXPECT_LE(c, prev);
        EXPECT_GE(c, 0.0);
        prev = c;
    }
}

TEST(Cutoff, DerivativesVanishAtPlateauEdges) {
    // A smooth transition is flat to all orders at 1 and 2; check the first two numerically.
    for (double x : {1.0, 2.0}) {
        const double h = 1e-2;
        const double d1 = (cutoff_chi(x + h) - cutoff_chi(x - h)) / (2 * h);
        const double d2 = (cutoff_chi(x + h) - 2 * cutoff_chi(x) + cutoff_chi(x - h)) / (h * h);
        EXPECT_LT(std::abs(d1), 1e-30);
        EXPECT_LT(std::abs(d2), 1e-30);
    }
}

TEST(DoubleNull, DataOnBothAxesIsExact) {
    const NullGrid g = solve_double_null(1.0 / 100, 3.0, 4.0);
    for (std::size_t j = 0; j < g.nzeta; ++j) EXPECT_EQ(g(0, j), g.zeta(j) * cutoff_chi(g.zeta(j)));
    for (std::size_t i = 0; i < g.nbar; ++i) EXPECT_EQ(g(i, 0), 0.0);
    EXPECT_EQ(g(0, g.index(0.5)), 0.5);
}

TEST(DoubleNull, GrowthBoundHoldsOnRegionC) {
    const NullGrid g = solve_double_null(1.0 / 200, 1.0, 8.0);
    EXPECT_GE(g(g.index(2.0), g.index(1.0)), 4.0 / 3.0 * (1 - 1e-2));
    EXPECT_GE(g(g.index(8.0), g.index(1.0)), 64.0 / 3.0 * (1 - 1e-2));
    const GrowthReport r = verify_growth_bound(g, 1e-2);
    EXPECT_TRUE(r.ok());
    EXPECT_TRUE(r.signs_ok);
    EXPECT_EQ(r.violations, 0u);
    EXPECT_GE(r.min_ratio, 1.0);
    EXPECT_EQ(r.points_checked, g.nbar * (g.index(1.0) + 1));
}

TEST(DoubleNull, SecondOrderInDelta) {
    std::vector<double> v;
    for (double d : {1.0 / 25, 1.0 / 50, 1.0 / 100}) {
        const NullGrid g = solve_double_null(d, 1.0, 4.0);
        v.push_back(g(g.index(4.0), g.index(1.0)));
    }
    const double ratio = (v[0] - v[1]) / (v[1] - v[2]);
    EXPECT_NEAR(ratio, 4.0, 0.4);
}

TEST(DoubleNull, CoarseStepIsRejected) {
    try {
        solve_double_null(1.5, 6.0, 6.0);
        FAIL() << "expected StepTooLarge";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::StepTooLarge);
    }
}

TEST(DoubleNull, ViolatedBoundIsReported) {
    NullGrid g = solve_double_null(1.0 / 50, 1.0, 2.0);
    g(g.index(2.0), g.index(0.5)) = 0.0;
    const GrowthReport r = verify_growth_bound(g, 1e-2);
    EXPECT_FALSE(r.bound_ok);
    EXPECT_FALSE(r.ok());
    EXPECT_GT(r.violations, 0u);
}

TEST(TxCoords, CharacteristicTraceAndZetaOneLine) {
    const NullGrid g = solve_double_null(1.0 / 100, 8.0, 8.0);
    const TxResample tx = to_txcoords(g, tx_grid_for(g, 4.0));
    const GridSpec& s = tx.v.grid();
    for (std::size_t a = 0; a < s.points[0]; ++a) {
        const double t = s.coord(0, a);
        // x = -t is the zeta_bar = 0 axis carrying v = zeta chi(zeta), zeta = 2t.
        const std::size_t left = s.flat({a, static_cast<std::size_t>(std::llround((-t + 4.0) / g.delta))});
        ASSERT_TRUE(tx.covered[left]);
        EXPECT_NEAR(tx.v[left], 2 * t * cutoff_chi(2 * t), 1e-12);
        if (t >= 0.5 && t <= 4.0) {
            const std::size_t on = s.flat({a, static_cast<std::size_t>(std::llround((t - 1.0 + 4.0) / g.delta))});
            const double zb = 2 * t - 1;
            EXPECT_GE(tx.v[on], zb * zb / 3.0 * (1 - 1e-2));
        }
    }
    // Outside the quadrant |x| <= t nothing is covered.
    EXPECT_FALSE(tx.covered[s.flat({10, 0})]);
}

TEST(TxCoords, SupGrowsOnUnitToFour) {
    const NullGrid g = solve_double_null(1.0 / 200, 8.0, 8.0);
    const TxResample tx = to_txcoords(g, tx_grid_for(g, 4.0));
    EXPECT_TRUE(tx.strictly_increasing(1.0, 4.0));
    EXPECT_GT(tx.sup_abs.back(), 3.0 * tx.sup_abs[tx.sup_abs.size() / 4]);
}

TEST(TxCoords, InterpolationIsBilinear) {
    NullGrid g;
    g.delta = 0.5;
    g.nbar = 3;
    g.nzeta = 3;
    g.v.resize(9);
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j) g(i, j) = 1.0 + 2.0 * g.zeta_bar(i) - g.zeta(j) + 0.5 * g.zeta_bar(i) * g.zeta(j);
    for (double zb : {0.0, 0.3, 0.75, 1.0})
        for (double z : {0.0, 0.1, 0.5, 0.9})
            EXPECT_NEAR(g.interpolate(zb, z), 1.0 + 2.0 * zb - z + 0.5 * zb * z, 1e-14);
}

TEST(CrossCheck, LinearSolverAgreesAtSecondOrder) {
    const NullGrid g = solve_double_null(1.0 / 200, 8.0, 8.0);
    const CrossCheckReport coarse = cross_check_linear(g, 2.0, 3.5, 65);
    const CrossCheckReport fine = cross_check_linear(g, 2.0, 3.5, 129);
    EXPECT_LT(fine.relative(), 1e-3);
    EXPECT_GT(coarse.max_abs_diff / fine.max_abs_diff, 3.0);
}
