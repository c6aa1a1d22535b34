#include <gtest/gtest.h>

#include <cmath>

#include "negcurv/errors.hpp"
#include "negcurv/linear_solver.hpp"
#include "test_support.hpp"

using namespace negcurv;

namespace {

struct Scenario {
    GridSpec grid;
    GraphSurface u;
    FoliatedDomain domain;
};

Scenario paraboloid_setup(const GridSpec& grid) {
    GraphSurface u = GraphSurface::analytic(grid, CatalogSurface::hyperbolic_paraboloid(grid.dim));
    const SymmetricMatrixField g = grid.dim >= 3 ? lorentzian_metric(u) : hessian(u);
    FoliatedDomain d = build_slab_domain(grid, g);
    return {grid, u, d};
}

// v* = sin t cos x on the n = 2 paraboloid and the source F = L v*.
double manufactured2(const Point& p) { return std::sin(p[0]) * std::cos(p[1]); }
double source2(const Point& p) {
    const double t = p[0], x = p[1], q = 1 + t * t + x * x;
    const double du_dv = -t * std::cos(t) * std::cos(x) - x * std::sin(t) * std::sin(x);
    return (-1.0 / (q * q)) * (-4.0 * du_dv / q);
}

// v* = sin t cos x cos y on the n = 3 paraboloid.
double manufactured3(const Point& p) { return std::sin(p[0]) * std::cos(p[1]) * std::cos(p[2]); }
double source3(const Point& p) {
    const double t = p[0], x = p[1], y = p[2], q = 1 + t * t + x * x + y * y;
    const double v = manufactured3(p);
    const double vt = std::cos(t) * std::cos(x) * std::cos(y);
    const double vx = -std::sin(t) * std::sin(x) * std::cos(y);
    const double vy = -std::sin(t) * std::cos(x) * std::sin(y);
    const double du_dv = -t * vt + x * vx + y * vy;
    return -std::pow(q, -2.5) * (-v - 5.0 * du_dv / q);
}

double max_error(const ScalarField& v, const FoliatedDomain& d, double (*exact)(const Point&)) {
    double e = 0.0;
    for (std::size_t p = 0; p < v.size(); ++p)
        if (d.contains(p)) e = std::max(e, std::abs(v[p] - exact(d.grid.position(p))));
    return e;
}

LinearSolveReport manufactured_run2(std::size_t nx, OperatorForm form) {
    const Scenario s = paraboloid_setup(cfl_grid(0.0, 1.0, {-2.0}, {2.0}, nx));
    const ScalarField f = ScalarField::sample(s.grid, source2);
    const CauchyData data = CauchyData::from_functions(
        s.grid, [](const Point& x) { return std::cos(x[1]) * 0.0; },
        [](const Point& x) { return std::cos(x[1]); });
    LinearSolveOptions opt;
    opt.form = form;
    return solve_linear(s.u, f, data, s.domain, opt);
}

}  // namespace

TEST(LinearSolver, ZeroDataAndSourceGiveZero) {
    const Scenario s = paraboloid_setup(cfl_grid(0.0, 1.0, {-2.0}, {2.0}, 33));
    const LinearSolveReport r = solve_linear(s.u, ScalarField(s.grid), CauchyData::zero(s.grid), s.domain);
    for (double x : r.v.values()) EXPECT_EQ(x, 0.0);
    EXPECT_EQ(r.c_emp, 0.0);
}

TEST(LinearSolver, ManufacturedLinearizedFormConvergesAtSecondOrder) {
    std::vector<double> h, err;
    for (std::size_t nx : {33u, 65u, 129u}) {
        const LinearSolveReport r = manufactured_run2(nx, OperatorForm::Linearized);
        h.push_back(r.v.grid().spacing[1]);
        err.push_back(max_error(r.v, r.domain, manufactured2));
    }
    EXPECT_LT(err.back(), 1e-3);
    EXPECT_GE(negcurv::testing::fitted_order(h, err), 1.8);
}

TEST(LinearSolver, GeometricFormTwoDimensionsSolvesSameEquation) {
    std::vector<double> h, err;
    for (std::size_t nx : {33u, 65u, 129u}) {
        const LinearSolveReport r = manufactured_run2(nx, OperatorForm::Geometric);
        h.push_back(r.v.grid().spacing[1]);
        err.push_back(max_error(r.v, r.domain, manufactured2));
    }
    EXPECT_GE(negcurv::testing::fitted_order(h, err), 1.8);
}

TEST(LinearSolver, GeometricFormThreeDimensionsConverges) {
    std::vector<double> h, err;
    for (std::size_t nx : {33u, 49u, 65u}) {
        const Scenario s = paraboloid_setup(cfl_grid(0.0, 0.5, {-1.0, -1.0}, {1.0, 1.0}, nx));
        const ScalarField f = ScalarField::sample(s.grid, source3);
        CauchyData data = CauchyData::from_functions(
            s.grid, [](const Point&) { return 0.0; },
            [](const Point& x) { return std::cos(x[1]) * std::cos(x[2]); });
        data.time_derivative = true;
        const LinearSolveReport r = solve_linear(s.u, f, data, s.domain);
        h.push_back(s.grid.spacing[1]);
        err.push_back(max_error(r.v, r.domain, manufactured3));
    }
    EXPECT_GE(negcurv::testing::fitted_order(h, err), 1.8);
}

TEST(LinearSolver, NormalDerivativeDataMatchesTimeDerivativeData) {
    const Scenario s = paraboloid_setup(cfl_grid(0.0, 0.5, {-1.0, -1.0}, {1.0, 1.0}, 17));
    const ScalarField f = ScalarField::sample(s.grid, source3);
    const SymmetricMatrixField gi = inverse_field(lorentzian_metric(s.u));
    CauchyData dt = CauchyData::from_functions(
        s.grid, [](const Point&) { return 0.0; }, [](const Point& x) { return std::cos(x[1]) * std::cos(x[2]); });
    dt.time_derivative = true;
    CauchyData dn = dt;
    dn.time_derivative = false;
    for (std::size_t i = 0; i < dn.derivative.size(); ++i) dn.derivative[i] *= std::sqrt(-gi(i, 0, 0));
    const LinearSolveReport a = solve_linear(s.u, f, dt, s.domain);
    const LinearSolveReport b = solve_linear(s.u, f, dn, s.domain);
    for (std::size_t p = 0; p < a.v.size(); ++p) EXPECT_NEAR(a.v[p], b.v[p], 1e-13);
}

TEST(LinearSolver, SolutionIsLinearInDataAndSource) {
    const Scenario s = paraboloid_setup(cfl_grid(0.0, 1.0, {-2.0}, {2.0}, 65));
    const ScalarField f1 = ScalarField::sample(s.grid, [](const Point& p) { return std::sin(3 * p[1]) + p[0]; });
    const ScalarField f2 = ScalarField::sample(s.grid, [](const Point& p) { return std::exp(-p[1] * p[1]); });
    const CauchyData d1 = CauchyData::from_functions(
        s.grid, [](const Point& x) { return std::cos(x[1]); }, [](const Point& x) { return x[1]; });
    const CauchyData d2 = CauchyData::from_functions(
        s.grid, [](const Point& x) { return x[1] * x[1]; }, [](const Point& x) { return std::sin(x[1]); });
    const double alpha = -2.5;
    ScalarField f3(s.grid);
    for (std::size_t p = 0; p < f3.size(); ++p) f3[p] = alpha * f1[p] + f2[p];
    CauchyData d3 = d1;
    for (std::size_t i = 0; i < d3.value.size(); ++i) {
        d3.value[i] = alpha * d1.value[i] + d2.value[i];
        d3.derivative[i] = alpha * d1.derivative[i] + d2.derivative[i];
    }
    const ScalarField v1 = solve_linear(s.u, f1, d1, s.domain).v;
    const ScalarField v2 = solve_linear(s.u, f2, d2, s.domain).v;
    const ScalarField v3 = solve_linear(s.u, f3, d3, s.domain).v;
    double scale = 0.0;
    for (std::size_t p = 0; p < v3.size(); ++p) scale = std::max(scale, std::abs(v3[p]));
    for (std::size_t p = 0; p < v3.size(); ++p) EXPECT_NEAR(v3[p], alpha * v1[p] + v2[p], 1e-12 * scale);
}

TEST(LinearSolver, SourceInfluenceStaysInsideDiscreteCone) {
    const Scenario s = paraboloid_setup(cfl_grid(0.0, 1.0, {-2.0}, {2.0}, 129));
    const std::size_t centre = s.grid.flat({5, 64});
    ScalarField f(s.grid);
    Mask seed(s.grid.size(), 0);
    for (long dt = 0; dt < 2; ++dt)
        for (long dx = -2; dx < 2; ++dx) {
            const std::size_t p = centre + dt * s.grid.stride(0) + dx;
            f[p] = 1.0 + 0.1 * dx;
            seed[p] = 1;
        }
    const LinearSolveReport r = solve_linear(s.u, f, CauchyData::zero(s.grid), s.domain);
    const CausalMask cone = causal_cone(hessian(s.u), seed, Direction::Future);
    double inside = 0.0;
    for (std::size_t p = 0; p < r.v.size(); ++p) {
        if (cone.membership[p]) {
            inside = std::max(inside, std::abs(r.v[p]));
        } else {
            EXPECT_LE(std::abs(r.v[p]), 1e-10) << "point " << p;
        }
    }
    EXPECT_GT(inside, 0.0);
}

TEST(LinearSolver, CflViolationIsReported) {
    const GridSpec grid = GridSpec::box({0.0, -2.0}, {1.0, 4.0}, {9, 65});
    const Scenario s = paraboloid_setup(grid);
    try {
        solve_linear(s.u, ScalarField(grid), CauchyData::zero(grid), s.domain);
        FAIL() << "expected CFLViolation";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::CFLViolation);
    }
}

TEST(LinearSolver, CflGridRespectsLimit) {
    const GridSpec g = cfl_grid(0.0, 1.0, {-1.0, -1.0}, {1.0, 1.0}, 33);
    EXPECT_LE(g.spacing[0], 0.9 * g.spacing[1] / std::sqrt(2.0) + 1e-15);
    EXPECT_NEAR(g.extent(0), 1.0, 1e-15);
    const Scenario s = paraboloid_setup(cfl_grid(0.0, 1.0, {-2.0}, {2.0}, 65));
    EXPECT_LE(cfl_ratio(hessian(s.u), s.domain), 0.9 + 1e-12);
}

TEST(Energy, DoublingWeightMultipliesByExponential) {
    const Scenario s = paraboloid_setup(cfl_grid(0.0, 1.0, {-2.0}, {2.0}, 65));
    const ScalarField v = ScalarField::sample(s.grid, [](const Point& p) { return std::sin(p[0] + 2 * p[1]); });
    for (double a : {1.0, 4.0, 32.0}) {
        const EnergyTrace ea = energy(v, s.domain, a);
        const EnergyTrace e2a = energy(v, s.domain, 2 * a);
        for (std::size_t j = 0; j < ea.times.size(); ++j)
            EXPECT_NEAR(e2a.leaf_energy[j], std::exp(-a * ea.times[j]) * ea.leaf_energy[j],
                        1e-13 * ea.leaf_energy[j]);
    }
}

TEST(Energy, LinearInTimeFieldMeasuresLeaf) {
    const Scenario s = paraboloid_setup(cfl_grid(0.0, 1.0, {-2.0}, {2.0}, 65));
    const ScalarField v = ScalarField::sample(s.grid, [](const Point& p) { return p[0]; });
    const double a = 3.0;
    // The rim of the first leaf has no later neighbour inside the domain, so d/dt comes from the data.
    const std::vector<double> ones(s.grid.leaf_size(), 1.0);
    const EnergyTrace e = energy(v, s.domain, a, nullptr, &ones);
    const double h = s.grid.spacing[1];
    for (std::size_t j = 0; j < e.times.size(); ++j) {
        const LeafBox& b = s.domain.leaves[j];
        const double count = static_cast<double>(b.hi[1] - b.lo[1] + 1);
        EXPECT_NEAR(e.leaf_energy[j], std::exp(-a * e.times[j]) * count * h, 1e-12);
    }
    EXPECT_DOUBLE_EQ(e.times.front(), 0.0);
    EXPECT_DOUBLE_EQ(e.times.back(), 1.0);
}

TEST(Energy, EstimateConstantStabilizes) {
    const LinearSolveReport r = manufactured_run2(65, OperatorForm::Linearized);
    const EnergyEstimateReport rep = verify_energy_estimate(r, dyadic_weights());
    ASSERT_EQ(rep.weights.size(), 9u);
    for (double c : rep.constants) {
        EXPECT_TRUE(std::isfinite(c));
        EXPECT_GT(c, 0.0);
    }
    EXPECT_TRUE(rep.stable());
    EXPECT_EQ(rep.to_json()["weights"].size(), 9u);
}

TEST(TimeReversal, ReversingTwiceIsIdentity) {
    const Scenario s = paraboloid_setup(cfl_grid(0.0, 1.0, {-2.0}, {2.0}, 33));
    const ScalarField f = ScalarField::sample(s.grid, source2);
    const WaveProblem p = assemble_problem(s.u, f, OperatorForm::Geometric);
    const WaveProblem q = time_reversed(time_reversed(p));
    for (std::size_t i = 0; i < s.grid.size(); ++i) {
        for (int a = 0; a < 2; ++a) {
            EXPECT_EQ(q.b(i, a), p.b(i, a));
            for (int b = 0; b < 2; ++b) EXPECT_EQ(q.a(i, a, b), p.a(i, a, b));
        }
        EXPECT_EQ(q.g[i], p.g[i]);
    }
}

TEST(TimeReversal, BackwardSolveRecoversManufacturedSolution) {
    // Wide slab so the reversed domain of dependence still covers the middle.
    const Scenario s = paraboloid_setup(cfl_grid(0.0, 1.0, {-3.0}, {3.0}, 193));
    const ScalarField f = ScalarField::sample(s.grid, source2);
    const WaveProblem back = time_reversed(assemble_problem(s.u, f, OperatorForm::Linearized));
    CauchyData data = CauchyData::from_functions(
        s.grid, [](const Point& x) { return std::sin(1.0) * std::cos(x[1]); },
        [](const Point& x) { return -std::cos(1.0) * std::cos(x[1]); });
    data.time_derivative = true;
    // The paraboloid principal part is constant, so the slab domain is symmetric in time.
    const LinearSolveReport r = solve_wave(back, data, s.domain);
    const double T = s.grid.extent(0);
    double err = 0.0;
    for (std::size_t p = 0; p < r.v.size(); ++p) {
        if (!s.domain.contains(p)) continue;
        Point x = s.grid.position(p);
        x[0] = T - x[0];
        err = std::max(err, std::abs(r.v[p] - manufactured2(x)));
    }
    EXPECT_LT(err, 2e-4);
}

TEST(AdjointForm, PairingIdentityHoldsForCompactFunctions) {
    // <phi, P psi> = <P* phi, psi> in the sqrt|m| measure, up to the discretization error.
    BumpFunction b1{2, {0.5, 0.1}, {0.35, 0.8}};
    BumpFunction b2{2, {0.45, -0.2}, {0.3, 0.9}};
    std::vector<double> h, gap;
    for (std::size_t nx : {33u, 65u, 129u}) {
        const GridSpec grid = GridSpec::box({0.0, -1.5}, {1.0, 3.0}, {(nx - 1) / 3 + 1, nx});
        const GraphSurface u = GraphSurface::analytic(grid, CatalogSurface::hyperbolic_paraboloid(2));
        const ScalarField zero(grid);
        const WaveProblem p = assemble_problem(u, zero, OperatorForm::Geometric);
        const WaveProblem q = assemble_problem(u, zero, OperatorForm::GeometricAdjoint);
        const ScalarField phi = ScalarField::sample(grid, [&](const Point& x) { return b1(x); });
        const ScalarField psi = ScalarField::sample(grid, [&](const Point& x) { return b2(x); });
        const ScalarField p_psi = apply_second_order(p.a, p.b, &p.c, psi);
        const ScalarField q_phi = apply_second_order(q.a, q.b, &q.c, phi);
        const ScalarField w = volume_density(hessian(u));
        double lhs = 0, rhs = 0, scale = 0;
        for (std::size_t i = 0; i < grid.size(); ++i) {
            lhs += phi[i] * p_psi[i] * w[i];
            rhs += q_phi[i] * psi[i] * w[i];
            scale += std::abs(phi[i] * p_psi[i] * w[i]);
        }
        h.push_back(grid.spacing[1]);
        gap.push_back(std::abs(lhs - rhs) / scale);
    }
    EXPECT_LT(gap.back(), 1e-3);
    EXPECT_GE(negcurv::testing::fitted_order(h, gap), 1.8);
}

TEST(AdjointForm, ThreeDimensionsFallsBackToSymmetricOperator) {
    const Scenario s = paraboloid_setup(cfl_grid(0.0, 0.5, {-1.0, -1.0}, {1.0, 1.0}, 9));
    const ScalarField zero(s.grid);
    const WaveProblem p = assemble_problem(s.u, zero, OperatorForm::Geometric);
    const WaveProblem q = assemble_problem(s.u, zero, OperatorForm::GeometricAdjoint);
    for (std::size_t i = 0; i < s.grid.size(); ++i)
        for (int j = 0; j < 3; ++j) EXPECT_EQ(p.b(i, j), q.b(i, j));
}
