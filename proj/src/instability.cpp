#include "negcurv/instability.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "negcurv/errors.hpp"
#include "negcurv/linear_solver.hpp"
#include "negcurv/surface.hpp"

namespace negcurv {

namespace {

double smooth_step_seed(double s) { return s > 0.0 ? std::exp(-1.0 / s) : 0.0; }

}  // namespace

double cutoff_chi(double x) {
    if (x <= 1.0) return 1.0;
    if (x >= 2.0) return 0.0;
    const double a = smooth_step_seed(2.0 - x), b = smooth_step_seed(x - 1.0);
    return a / (a + b);
}

std::size_t NullGrid::index(double coordinate) const {
    return static_cast<std::size_t>(std::llround(coordinate / delta));
}

bool NullGrid::covers(double zb, double z) const {
    const double eps = 1e-9 * delta;
    return zb >= -eps && z >= -eps && zb <= zeta_bar(nbar - 1) + eps && z <= zeta(nzeta - 1) + eps;
}

double NullGrid::interpolate(double zb, double z) const {
    if (!covers(zb, z)) throw Error(ErrorKind::InvalidArgument, "point outside the null lattice");
    auto locate = [&](double c, std::size_t n, std::size_t& k, double& w) {
        const double s = std::clamp(c / delta, 0.0, static_cast<double>(n - 1));
        const double r = std::round(s);
        if (std::abs(s - r) < 1e-9) {
            k = static_cast<std::size_t>(r);
            w = 0.0;
        } else {
            k = std::min(static_cast<std::size_t>(std::floor(s)), n - 2);
            w = s - static_cast<double>(k);
        }
        if (k == n - 1) {
            k = n - 2;
            w = 1.0;
        }
    };
    std::size_t i = 0, j = 0;
    double wi = 0.0, wj = 0.0;
    locate(zb, nbar, i, wi);
    locate(z, nzeta, j, wj);
    const double a = (*this)(i, j), b = (*this)(i + 1, j), c = (*this)(i, j + 1), d = (*this)(i + 1, j + 1);
    return (1 - wi) * (1 - wj) * a + wi * (1 - wj) * b + (1 - wi) * wj * c + wi * wj * d;
}

NullGrid solve_double_null(double delta, double zeta_extent, double zeta_bar_extent) {
    if (!(delta > 0.0) || !(zeta_extent > 0.0) || !(zeta_bar_extent > 0.0))
        throw Error(ErrorKind::InvalidArgument, "delta and extents must be positive");
    NullGrid g;
    g.delta = delta;
    g.nbar = static_cast<std::size_t>(std::llround(zeta_bar_extent / delta)) + 1;
    g.nzeta = static_cast<std::size_t>(std::llround(zeta_extent / delta)) + 1;
    if (g.nbar < 2 || g.nzeta < 2) throw Error(ErrorKind::GridTooSmall, "null lattice needs two points per axis");
    g.v.assign(g.nbar * g.nzeta, 0.0);
    for (std::size_t j = 0; j < g.nzeta; ++j) g(0, j) = g.zeta(j) * cutoff_chi(g.zeta(j));

    for (std::size_t i = 0; i + 1 < g.nbar; ++i) {
        const double zb = (static_cast<double>(i) + 0.5) * delta;
        for (std::size_t j = 0; j + 1 < g.nzeta; ++j) {
            const double z = (static_cast<double>(j) + 0.5) * delta;
            const double q = 1.0 + 0.5 * zb * zb + 0.5 * z * z;
            const double alpha = delta * z / (2.0 * q), beta = delta * zb / (2.0 * q);
            const double den = 1.0 - alpha - beta;
            if (den < 0.5)
                throw Error(ErrorKind::StepTooLarge, "cell solve denominator " + std::to_string(den) + " at (" +
                                                         std::to_string(zb) + ", " + std::to_string(z) + ")");
            const double a = g(i, j), b = g(i + 1, j), c = g(i, j + 1);
            g(i + 1, j + 1) = (b + c - a + alpha * (b - a - c) + beta * (c - a - b)) / den;
        }
    }
    return g;
}

nlohmann::json GrowthReport::to_json() const {
    return {{"tol", tol},
            {"ok", ok()},
            {"bound_ok", bound_ok},
            {"derivative_bound_ok", derivative_bound_ok},
            {"signs_ok", signs_ok},
            {"min_ratio", min_ratio},
            {"min_ratio_at", {{"zeta_bar", min_ratio_zeta_bar}, {"zeta", min_ratio_zeta}}},
            {"min_derivative_ratio", min_derivative_ratio},
            {"points_checked", points_checked},
            {"violations", violations},
            {"remark_axis_bound", remark_axis_bound},
            {"remark_min_ratio", remark_min_ratio}};
}

GrowthReport verify_growth_bound(const NullGrid& g, double tol) {
    if (g.zeta(g.nzeta - 1) < 1.0 - 1e-12 || g.nzeta < 3 || g.nbar < 3)
        throw Error(ErrorKind::InvalidArgument, "null lattice does not cover zeta in [0, 1]");
    const double d = g.delta;
    auto dz = [&](std::size_t i, std::size_t j) {
        if (j + 2 < g.nzeta) return (-3.0 * g(i, j) + 4.0 * g(i, j + 1) - g(i, j + 2)) / (2.0 * d);
        return (3.0 * g(i, j) - 4.0 * g(i, j - 1) + g(i, j - 2)) / (2.0 * d);
    };
    auto dzb = [&](std::size_t i, std::size_t j) {
        if (i + 2 < g.nbar) return (-3.0 * g(i, j) + 4.0 * g(i + 1, j) - g(i + 2, j)) / (2.0 * d);
        return (3.0 * g(i, j) - 4.0 * g(i - 1, j) + g(i - 2, j)) / (2.0 * d);
    };
    GrowthReport r;
    r.tol = tol;
    r.min_ratio = std::numeric_limits<double>::infinity();
    r.min_derivative_ratio = std::numeric_limits<double>::infinity();
    const std::size_t jmax = g.index(1.0);
    const double slack = 1e-12;
    for (std::size_t i = 0; i < g.nbar; ++i) {
        const double zb = g.zeta_bar(i);
        for (std::size_t j = 0; j <= jmax; ++j) {
            const double z = g.zeta(j);
            const double bound = z * zb * zb / 3.0;
            ++r.points_checked;
            bool good = g(i, j) >= (1.0 - tol) * bound - slack;
            if (bound > 0.0) {
                const double ratio = g(i, j) / bound;
                if (ratio < r.min_ratio) {
                    r.min_ratio = ratio;
                    r.min_ratio_zeta_bar = zb;
                    r.min_ratio_zeta = z;
                }
            }
            const double vz = dz(i, j), vzb = dzb(i, j);
            const double dbound = zb * zb / 3.0;
            if (dbound > 0.0) r.min_derivative_ratio = std::min(r.min_derivative_ratio, vz / dbound);
            if (vz < (1.0 - tol) * dbound - slack) r.derivative_bound_ok = good = false;
            if (vz < -slack || vzb < -slack) r.signs_ok = good = false;
            if (g(i, j) < (1.0 - tol) * bound - slack) r.bound_ok = false;
            if (!good) ++r.violations;
        }
    }
    r.remark_min_ratio = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < std::min(g.nbar, g.nzeta); ++k) {
        const double t = g.zeta(k);
        if (t <= 1.0 + 1e-12) continue;
        const double ratio = g(k, k) / (t * t * t / 3.0);
        r.remark_min_ratio = std::min(r.remark_min_ratio, ratio);
        if (ratio < 1.0) r.remark_axis_bound = false;
    }
    return r;
}

bool TxResample::strictly_increasing(double t0, double t1) const {
    bool any = false;
    for (std::size_t k = 0; k + 1 < times.size(); ++k) {
        if (times[k] < t0 - 1e-12 || times[k + 1] > t1 + 1e-12) continue;
        any = true;
        if (!(sup_abs[k + 1] > sup_abs[k])) return false;
    }
    return any;
}

nlohmann::json TxResample::to_json() const { return {{"times", times}, {"sup_abs", sup_abs}}; }

GridSpec tx_grid_for(const NullGrid& grid, double t_max) {
    const auto nt = static_cast<std::size_t>(std::llround(t_max / grid.delta)) + 1;
    return GridSpec::box({0.0, -t_max}, {t_max, 2.0 * t_max}, {nt, 2 * nt - 1});
}

TxResample to_txcoords(const NullGrid& grid, const GridSpec& tx) {
    if (tx.dim != 2) throw Error(ErrorKind::DimensionError, "resample grid must be (t, x)");
    TxResample r;
    r.v = ScalarField(tx);
    r.covered.assign(tx.size(), 0);
    const std::size_t nt = tx.points[0], nx = tx.points[1];
    r.times.resize(nt);
    r.sup_abs.assign(nt, 0.0);
    for (std::size_t a = 0; a < nt; ++a) {
        const double t = tx.coord(0, a);
        r.times[a] = t;
        for (std::size_t b = 0; b < nx; ++b) {
            const double x = tx.coord(1, b);
            const std::size_t p = a * nx + b;
            if (!grid.covers(t + x, t - x)) continue;
            r.covered[p] = 1;
            r.v[p] = grid.interpolate(t + x, t - x);
            r.sup_abs[a] = std::max(r.sup_abs[a], std::abs(r.v[p]));
        }
    }
    return r;
}

nlohmann::json CrossCheckReport::to_json() const {
    return {{"max_abs_diff", max_abs_diff}, {"max_abs_value", max_abs_value}, {"relative", relative()},
            {"points", points}};
}

CrossCheckReport cross_check_linear(const NullGrid& g, double t0, double t1, std::size_t spatial_points) {
    if (!(t0 > 0.0) || !(t1 > t0) || t1 > 2.0 * t0)
        throw Error(ErrorKind::InvalidArgument, "cross-check needs 0 < t0 < t1 <= 2 t0");
    if (!g.covers(2.0 * t1, 2.0 * t1)) throw Error(ErrorKind::InvalidArgument, "null lattice too small for t1");
    const GridSpec grid = cfl_grid(t0, t1 - t0, {-t0}, {t0}, spatial_points);
    const GraphSurface u = GraphSurface::analytic(grid, CatalogSurface::hyperbolic_paraboloid(2));
    const FoliatedDomain domain = build_slab_domain(grid, hessian(u));

    const double d = g.delta;
    auto value = [&](double zb, double z) { return g.interpolate(zb, z); };
    auto partial = [&](double zb, double z, bool along_bar) {
        const double c = along_bar ? zb : z;
        auto at = [&](double s) { return along_bar ? value(zb + s, z) : value(zb, z + s); };
        if (c - d < -1e-12) return (-3.0 * at(0) + 4.0 * at(d) - at(2 * d)) / (2.0 * d);
        return (at(d) - at(-d)) / (2.0 * d);
    };
    CauchyData data = CauchyData::from_functions(
        grid, [&](const Point& x) { return value(t0 + x[1], t0 - x[1]); },
        [&](const Point& x) {
            const double zb = t0 + x[1], z = t0 - x[1];
            return partial(zb, z, true) + partial(zb, z, false);
        });
    data.time_derivative = true;
    LinearSolveOptions opt;
    opt.form = OperatorForm::Linearized;
    const LinearSolveReport lin = solve_linear(u, ScalarField(grid), data, domain, opt);

    CrossCheckReport r;
    for (std::size_t p = 0; p < grid.size(); ++p) {
        if (!domain.contains(p)) continue;
        const Point x = grid.position(p);
        const double ref = value(x[0] + x[1], x[0] - x[1]);
        r.max_abs_diff = std::max(r.max_abs_diff, std::abs(lin.v[p] - ref));
        r.max_abs_value = std::max(r.max_abs_value, std::abs(ref));
        ++r.points;
    }
    return r;
}

}  // namespace negcurv
