#include <gtest/gtest.h>

#include <cmath>

#include "negcurv/errors.hpp"
#include "negcurv/nonlinear_solver.hpp"

using namespace negcurv;

namespace {

// u* = u_S + 0.01 bump on the n = 2 paraboloid, bump vanishing near the first leaves.
struct Manufactured {
    GridSpec grid;
    GraphSurface base;
    GraphSurface star;
    FoliatedDomain domain;
    ScalarField eta;
};

BumpFunction interior_bump() { return BumpFunction{2, {0.5, 0.0}, {0.44, 1.2}, 4}; }

Manufactured manufactured(std::size_t nx, double eps = 0.01) {
    const GridSpec grid = cfl_grid(0.0, 1.0, {-2.0}, {2.0}, nx, 1.5);
    GraphSurface base = GraphSurface::analytic(grid, CatalogSurface::hyperbolic_paraboloid(2));
    GraphSurface star = GraphSurface::analytic(grid, CatalogSurface::perturbed_paraboloid(2, eps, interior_bump()));
    FoliatedDomain domain = build_slab_domain(grid, hessian(base));
    // Both curvatures in closed form, so eta is exactly zero off the bump.
    const ScalarField kt = psi(star);
    const ScalarField ks = psi(base);
    ScalarField eta(grid);
    for (std::size_t p = 0; p < grid.size(); ++p) eta[p] = kt[p] - ks[p];
    return {grid, base, star, domain, eta};
}

NonlinearProblem problem_for(const Manufactured& m) {
    NonlinearProblem p{m.base, m.eta, m.domain, 1e-10, 10, {}, std::nullopt};
    p.admissibility_bound = 1.0;
    p.tol = 1e-9;
    return p;
}

double domain_sup_diff(const ScalarField& a, const ScalarField& b, const FoliatedDomain& d) {
    double e = 0.0;
    for (std::size_t p = 0; p < a.size(); ++p)
        if (d.contains(p)) e = std::max(e, std::abs(a[p] - b[p]));
    return e;
}

}  // namespace

TEST(Residual, BaseSurfaceSolvesItsOwnEquation) {
    const Manufactured m = manufactured(64);
    const ScalarField r = residual(GraphSurface::finite_difference(m.base.u()), base_curvature(m.base));
    for (double x : r.values()) EXPECT_EQ(x, 0.0);
}

TEST(Residual, BumpTargetGivesMinusBump) {
    const Manufactured m = manufactured(64);
    const BumpFunction b = interior_bump();
    ScalarField target = base_curvature(m.base);
    for (std::size_t p = 0; p < target.size(); ++p) target[p] += b(m.grid.position(p));
    const ScalarField r = residual(GraphSurface::finite_difference(m.base.u()), target);
    for (std::size_t p = 0; p < r.size(); ++p) EXPECT_NEAR(r[p], -b(m.grid.position(p)), 1e-15);
}

TEST(Residual, ManufacturedTargetVanishesAtStarOnly) {
    const Manufactured m = manufactured(64);
    const ScalarField target = psi(m.star);
    const ScalarField at_star = residual(m.star, target);
    for (double x : at_star.values()) EXPECT_EQ(x, 0.0);
    const Mask mask = residual_mask(m.domain);
    EXPECT_GT(masked_sup(residual(m.base, target), mask), 0.1);
}

TEST(ResidualMask, ExcludesEndLeavesAndRim) {
    const Manufactured m = manufactured(64);
    const Mask mask = residual_mask(m.domain);
    const std::size_t last = m.domain.leaf_count() - 1;
    for (std::size_t p = 0; p < mask.size(); ++p) {
        if (!mask[p]) continue;
        const std::size_t leaf = m.domain.leaf_of(p);
        EXPECT_NE(leaf, 0u);
        EXPECT_NE(leaf, last);
        EXPECT_TRUE(m.domain.neighbourhood_inside(p, 1));
    }
}

TEST(Newton, ZeroPerturbationIsFixedPoint) {
    const Manufactured m = manufactured(64);
    NonlinearProblem p{m.base, ScalarField(m.grid), m.domain, 1e-10, 10, {}, std::nullopt};
    const IterationReport r = solve_nonlinear(p);
    EXPECT_TRUE(r.converged);
    EXPECT_EQ(r.iterations(), 0u);
    for (std::size_t i = 0; i < r.u.size(); ++i) EXPECT_EQ(r.u[i], m.base.u()[i]);

    const NewtonStep step = newton_step(m.base.u(), base_curvature(m.base), m.domain);
    for (std::size_t i = 0; i < step.u.size(); ++i) {
        EXPECT_EQ(step.correction[i], 0.0);
        EXPECT_EQ(step.u[i], m.base.u()[i]);
    }
}

TEST(Newton, ManufacturedProblemContractsAndRecoversSurface) {
    std::vector<double> err;
    for (std::size_t nx : {64u, 128u}) {
        const Manufactured m = manufactured(nx);
        const IterationReport r = solve_nonlinear(problem_for(m));
        ASSERT_TRUE(r.converged);
        for (std::size_t k = 0; k + 1 < r.residuals.size(); ++k)
            EXPECT_LE(r.residuals[k + 1], r.residuals[k] / 10.0) << "iteration " << k;
        err.push_back(domain_sup_diff(r.u, m.star.u(), m.domain));
    }
    // Second order: halving h divides the error by about four.
    EXPECT_GT(err[0] / err[1], 3.5);
    EXPECT_LT(err[1], 0.02 * (4.0 / 127.0) * (4.0 / 127.0));
}

TEST(Newton, CauchyDataIsPreservedExactly) {
    const Manufactured m = manufactured(64);
    const IterationReport r = solve_nonlinear(problem_for(m));
    const std::size_t L = m.grid.leaf_size();
    for (std::size_t i = 0; i < L; ++i) {
        EXPECT_EQ(r.u[i], m.base.u()[i]);
        // One-sided normal derivative on the first leaf.
        const double du = -3.0 * r.u[i] + 4.0 * r.u[L + i] - r.u[2 * L + i];
        const double ds = -3.0 * m.base.u()[i] + 4.0 * m.base.u()[L + i] - m.base.u()[2 * L + i];
        EXPECT_EQ(du, ds);
    }
}

TEST(Newton, FirstCorrectionIsLinearInPerturbation) {
    const Manufactured m = manufactured(64);
    const ScalarField ks = base_curvature(m.base);
    auto first_correction = [&](double s) {
        ScalarField target = ks;
        for (std::size_t p = 0; p < target.size(); ++p) target[p] += s * m.eta[p];
        return newton_step(m.base.u(), target, m.domain).correction;
    };
    const ScalarField v1 = first_correction(1.0);
    const ScalarField vh = first_correction(0.5);
    double scale = 0.0, gap = 0.0;
    for (std::size_t p = 0; p < v1.size(); ++p) {
        scale = std::max(scale, std::abs(v1[p]));
        gap = std::max(gap, std::abs(v1[p] - 2.0 * vh[p]));
    }
    EXPECT_GT(scale, 0.0);
    EXPECT_LE(gap, 1e-12 * scale);
}

TEST(Newton, SolutionMapIsDifferentiable) {
    const Manufactured m = manufactured(64);
    const ScalarField w = newton_step(m.base.u(), [&] {
        ScalarField t = base_curvature(m.base);
        for (std::size_t p = 0; p < t.size(); ++p) t[p] += m.eta[p];
        return t;
    }(), m.domain).correction;
    std::vector<double> defect;
    for (double s : {1.0, 0.5, 0.25}) {
        NonlinearProblem p = problem_for(m);
        for (std::size_t i = 0; i < p.eta.size(); ++i) p.eta[i] = s * m.eta[i];
        p.tol = 1e-12;
        const IterationReport r = solve_nonlinear(p);
        ASSERT_TRUE(r.converged);
        double d = 0.0;
        for (std::size_t i = 0; i < r.u.size(); ++i)
            if (m.domain.contains(i)) d = std::max(d, std::abs(r.u[i] - m.base.u()[i] - s * w[i]));
        defect.push_back(d);
    }
    EXPECT_GT(defect[0] / defect[1], 3.5);
    EXPECT_GT(defect[1] / defect[2], 3.5);
}

TEST(Newton, LargePerturbationIsInadmissible) {
    const Manufactured m = manufactured(64);
    NonlinearProblem p{m.base, m.eta, m.domain, 1e-10, 10, {}, std::nullopt};
    try {
        solve_nonlinear(p);
        FAIL() << "expected InadmissiblePerturbation";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::InadmissiblePerturbation);
    }
    const double bound = default_admissibility_bound(base_curvature(m.base), m.domain);
    // min |K_S| over the domain sits at the ends of the first leaf, t = 0, |x| = 2.
    EXPECT_NEAR(bound, 0.1 / 25.0, 1e-12);
}

TEST(Newton, IterationLimitIsReportedNotThrown) {
    const Manufactured m = manufactured(64);
    NonlinearProblem p = problem_for(m);
    p.max_iterations = 1;
    const IterationReport r = solve_nonlinear(p);
    EXPECT_FALSE(r.converged);
    EXPECT_EQ(r.residuals.size(), 2u);
    EXPECT_EQ(r.to_json()["iterations"], 1);
}

TEST(Newton, NonLorentzianIterateRaisesSignatureLost) {
    const Manufactured m = manufactured(64);
    ScalarField u = m.base.u();
    for (std::size_t p = 0; p < u.size(); ++p) {
        const Point x = m.grid.position(p);
        u[p] += 0.5 * x[0] * x[0];  // flattens the time direction to a degenerate Hessian
    }
    try {
        newton_step(u, base_curvature(m.base), m.domain);
        FAIL() << "expected SignatureLost";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::SignatureLost);
    }
}

TEST(Smoothing, ScheduledMollifierStillConverges) {
    const Manufactured m = manufactured(64);
    NonlinearProblem p = problem_for(m);
    p.smoothing.widths = {0.2, 0.1, 0.0};
    p.max_iterations = 12;
    const IterationReport r = solve_nonlinear(p);
    EXPECT_TRUE(r.converged);
    EXPECT_LT(domain_sup_diff(r.u, m.star.u(), m.domain), 2e-4);
}

TEST(Smoothing, MollifierKeepsConstantsAndEarlyLeaves) {
    const Manufactured m = manufactured(64);
    ScalarField v(m.grid);
    for (std::size_t p = 0; p < v.size(); ++p) v[p] = m.domain.contains(p) ? 3.0 + m.domain.leaf_of(p) : 0.0;
    const ScalarField s = mollify_correction(v, m.domain, 0.3);
    for (std::size_t p = 0; p < v.size(); ++p) EXPECT_NEAR(s[p], v[p], 1e-13);

    ScalarField noisy(m.grid);
    for (std::size_t p = 0; p < v.size(); ++p) noisy[p] = m.domain.contains(p) ? ((p % 2) ? 1.0 : -1.0) : 0.0;
    const ScalarField sm = mollify_correction(noisy, m.domain, 0.3);
    const std::size_t L = m.grid.leaf_size();
    double late = 0.0;
    for (std::size_t p = 0; p < v.size(); ++p) {
        if (p < 3 * L) {
            EXPECT_EQ(sm[p], noisy[p]);
        } else if (m.domain.neighbourhood_inside(p, 8)) {
            late = std::max(late, std::abs(sm[p]));
        }
    }
    EXPECT_LT(late, 0.05);
}

TEST(Smoothing, ExtensionIsExactOnAffineLeaves) {
    const Manufactured m = manufactured(64);
    ScalarField v(m.grid), exact(m.grid);
    for (std::size_t p = 0; p < v.size(); ++p) {
        const Point x = m.grid.position(p);
        exact[p] = 2.0 * x[1] - x[0] + 0.5;
        v[p] = m.domain.contains(p) ? exact[p] : 0.0;
    }
    const ScalarField e = extend_correction(v, m.domain);
    for (std::size_t p = 0; p < v.size(); ++p) EXPECT_NEAR(e[p], exact[p], 1e-12);
}
