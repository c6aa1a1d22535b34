#include "negcurv/scenarios.hpp"

#include <cmath>

#include "negcurv/errors.hpp"

namespace negcurv {

namespace {

double domain_sup(const ScalarField& a, const FoliatedDomain& d, auto&& other) {
    double e = 0.0;
    for (std::size_t p = 0; p < a.size(); ++p)
        if (d.contains(p)) e = std::max(e, std::abs(a[p] - other(p)));
    return e;
}

}  // namespace

double ManufacturedLinear::exact(const Point& x) { return std::sin(x[0]) * std::cos(x[1]); }

double ManufacturedLinear::error(const ScalarField& v) const {
    return domain_sup(v, domain, [&](std::size_t p) { return exact(domain.grid.position(p)); });
}

ManufacturedLinear manufactured_linear(std::size_t spatial_points) {
    const GridSpec grid = cfl_grid(0.0, 1.0, {-2.0}, {2.0}, spatial_points);
    GraphSurface u = GraphSurface::analytic(grid, CatalogSurface::hyperbolic_paraboloid(2));
    // F = psi (m^-1 : D^2 v* - 4 Du.Dv* / q); the principal part cancels for this v*.
    ScalarField f = ScalarField::sample(grid, [](const Point& p) {
        const double t = p[0], x = p[1], q = 1 + t * t + x * x;
        const double du_dv = -t * std::cos(t) * std::cos(x) - x * std::sin(t) * std::sin(x);
        return (-1.0 / (q * q)) * (-4.0 * du_dv / q);
    });
    // The unit normal of the first leaf is d/dt, so the normal derivative is cos x.
    CauchyData data = CauchyData::from_functions(
        grid, [](const Point&) { return 0.0; }, [](const Point& x) { return std::cos(x[1]); });
    FoliatedDomain domain = build_slab_domain(grid, hessian(u));
    return {std::move(u), std::move(f), std::move(data), std::move(domain)};
}

NonlinearProblem ManufacturedNewton::problem() const {
    NonlinearProblem p{base, eta, domain, 1e-9, 10, {}, std::nullopt};
    // eta is far above the default 0.1 min|K_S|; the run is admissible by construction.
    p.admissibility_bound = 1.0;
    return p;
}

double ManufacturedNewton::error(const ScalarField& u) const {
    return domain_sup(u, domain, [&](std::size_t p) { return star.u()[p]; });
}

BumpFunction newton_bump() { return BumpFunction{2, {0.5, 0.0}, {0.44, 1.2}, 4}; }

ManufacturedNewton manufactured_newton(std::size_t spatial_points, double eps) {
    const GridSpec grid = cfl_grid(0.0, 1.0, {-2.0}, {2.0}, spatial_points, 1.5);
    GraphSurface base = GraphSurface::analytic(grid, CatalogSurface::hyperbolic_paraboloid(2));
    GraphSurface star = GraphSurface::analytic(grid, CatalogSurface::perturbed_paraboloid(2, eps, newton_bump()));
    FoliatedDomain domain = build_slab_domain(grid, hessian(base));
    const ScalarField kt = psi(star);
    const ScalarField ks = psi(base);
    ScalarField eta(grid);
    for (std::size_t p = 0; p < grid.size(); ++p) eta[p] = kt[p] - ks[p];
    return {std::move(base), std::move(star), std::move(domain), std::move(eta)};
}

LocalizationScenario localization_scenario(int n, int per_unit) {
    if (n != 2 && n != 3) throw Error(ErrorKind::DimensionError, "localization scenario needs n in {2, 3}");
    if (per_unit < 8) throw Error(ErrorKind::GridTooSmall, "localization scenario needs at least 8 points per unit");
    const auto nx = static_cast<std::size_t>(std::lround(2.5 * per_unit)) + 1;
    const std::vector<double> lo(n - 1, -1.25), hi(n - 1, 1.25);
    // Same time step in both dimensions, so phi clears leaves 0-3 from h = 1/16 on.
    const GridSpec grid = cfl_grid(0.0, 0.5, lo, hi, nx, n == 2 ? std::sqrt(2.0) : 1.0);
    GraphSurface u = GraphSurface::analytic(grid, CatalogSurface::hyperbolic_paraboloid(n));
    FoliatedDomain domain = build_slab_domain(grid, n >= 3 ? lorentzian_metric(u) : hessian(u));
    const BumpFunction bump{n, {0.25, 0.0, 0.0}, {0.12, 0.3, 0.3}};
    ScalarField phi = ScalarField::sample(grid, [&](const Point& x) { return bump(x); });
    return {std::move(u), std::move(domain), std::move(phi), 1.0 / per_unit};
}

nlohmann::json FiniteSpeedReport::to_json() const {
    return {{"outside_relative", outside_relative}, {"outside_max", outside_max}, {"cfl_ratio", solve.cfl_ratio}};
}

FiniteSpeedReport finite_speed_check(int n, std::size_t spatial_points) {
    if (n != 2 && n != 3) throw Error(ErrorKind::DimensionError, "finite speed check needs n in {2, 3}");
    if (spatial_points < 9) throw Error(ErrorKind::GridTooSmall, "finite speed check needs at least 9 points");
    // For n = 3, det g = -q^-15 leaves the determinant floor beyond |x| of about 1.5.
    const double half = n == 2 ? 2.0 : 1.0;
    const std::vector<double> lo(n - 1, -half), hi(n - 1, half);
    const GridSpec grid = cfl_grid(0.0, half / 2, lo, hi, spatial_points);
    const GraphSurface u = GraphSurface::analytic(grid, CatalogSurface::hyperbolic_paraboloid(n));
    const SymmetricMatrixField metric = n >= 3 ? lorentzian_metric(u) : hessian(u);
    const FoliatedDomain domain = build_slab_domain(grid, metric);

    CauchyData data = CauchyData::zero(grid);
    Mask seed(grid.size(), 0);
    const std::size_t first = spatial_points / 2 - 2;
    for (std::size_t i = 0; i < grid.leaf_size(); ++i) {
        const MultiIndex idx = grid.unravel(i);
        double w = 1.0;
        for (int a = 1; a < n; ++a) {
            if (idx[a] < first || idx[a] >= first + 4) w = 0.0;
            // Weights 1, 2, 2, 1 per axis.
            else w *= (idx[a] == first || idx[a] == first + 3) ? 1.0 : 2.0;
        }
        data.value[i] = w;
        seed[i] = w != 0.0 ? 1 : 0;
    }
    FiniteSpeedReport r;
    r.solve = solve_linear(u, ScalarField(grid), data, domain);
    r.cone = causal_cone(metric, seed, Direction::Future).membership;
    double total = 0.0, outside = 0.0;
    for (std::size_t p = 0; p < grid.size(); ++p) {
        if (!domain.contains(p)) continue;
        const double a = std::abs(r.solve.v[p]);
        total += a;
        if (!r.cone[p]) {
            outside += a;
            r.outside_max = std::max(r.outside_max, a);
        }
    }
    r.outside_relative = total > 0.0 ? outside / total : 0.0;
    return r;
}

}  // namespace negcurv
