// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "negcurv/convergence.hpp"
#include "negcurv/instability.hpp"
#include "negcurv/scenarios.hpp"

using namespace negcurv;

namespace {

struct Verdict {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double order_of(const OrderFit& f) { return f.exact ? INFINITY : f.order.value_or(NAN); }

Verdict conformal_identity() {
    const auto t0 = std::chrono::steady_clock::now();
    ConvergenceOptions o;
    o.levels = {16, 32, 64};
    o.samples = 3;
    o.seed = 2024;
    const ConvergenceReport r = convergence_harness("conformal-identity", o);
    const double secs = seconds_since(t0);
    double worst = INFINITY, c = 0.0;
    for (const OrderFit& f : r.sample_fits) worst = std::min(worst, order_of(f));
    for (const ConvergenceLevel& l : r.levels) c = std::max(c, l.error / (l.h * l.h));
    return {r.passed() && r.sample_fits.size() == 3 && secs < 10.0,
            fmt("min order over 3 polynomials %.3f (>= 1.8), C = max err/h^2 = %.3g, %.2fs (< 10s)", worst, c, secs)};
}

Verdict curvature_closed_form() {
    double closed_err = 0.0;
    for (int n : {2, 3}) {
        const GraphSurface s = GraphSurface::analytic(GridSpec::cube(n, -1.0, 1.0, 64), CatalogSurface::hyperbolic_paraboloid(n));
        const ScalarField k = psi(s);
        for (std::size_t p = 0; p < k.size(); ++p) {
            const Point x = s.grid().position(p);
            double r2 = 0.0;
            for (int a = 0; a < n; ++a) r2 += x[a] * x[a];
            closed_err = std::max(closed_err, std::abs(k[p] + std::pow(1.0 + r2, -0.5 * (n + 2))));
        }
    }
    bool fd_ok = true;
    std::string orders;
    for (int n : {2, 3}) {
        ConvergenceOptions o;
        o.dim = n;
        o.levels = {16, 32, 64};
        const ConvergenceReport r = convergence_harness("curvature-fd", o);
        fd_ok = fd_ok && r.passed();
        orders += fmt(" n=%d %.3f", n, order_of(r.fit));
    }
    return {closed_err <= 1e-12 && fd_ok,
            fmt("analytic max |K - closed form| %.2e (<= 1e-12) on 64^n, FD order", closed_err) + orders + " (>= 1.8)"};
}

Verdict instability() {
    const auto t0 = std::chrono::steady_clock::now();
    const NullGrid grid = solve_double_null(1.0 / 200, 1.0, 8.0);
    const GrowthReport g = verify_growth_bound(grid, 0.01);
    const double v81 = grid(grid.index(8.0), grid.index(1.0));
    const TxResample tx = to_txcoords(grid, tx_grid_for(grid, 4.0));
    const bool grows = tx.strictly_increasing(1.0, 4.0);
    const double secs = seconds_since(t0);
    const bool pass = g.bound_ok && g.violations == 0 && v81 >= 0.99 * 64.0 / 3.0 && grows && secs < 30.0;
    return {pass, fmt("min v/(z zb^2/3) = %.4f over %zu points, v(8,1) = %.3f (>= %.3f), sup_x|v| increasing on "
                      "[1,4]: %s, %.2fs (< 30s)",
                      g.min_ratio, g.points_checked, v81, 0.99 * 64.0 / 3.0, grows ? "yes" : "no", secs)};
}

Verdict nonlinear() {
    std::vector<double> errs;
    bool contract = true, cauchy = true, converged = true;
    double worst_factor = INFINITY, cauchy_defect = 0.0;
    double h = 0.0;
    for (std::size_t nx : {64u, 128u}) {
        const ManufacturedNewton m = manufactured_newton(nx);
        const IterationReport r = solve_nonlinear(m.problem());
        converged = converged && r.converged;
        const GridSpec& g = m.domain.grid;
        h = g.spacing[1];
        const double floor = 1e-3 * h * h;
        for (std::size_t k = 0; k + 1 < r.residuals.size(); ++k) {
            if (r.residuals[k] <= floor) break;
            worst_factor = std::min(worst_factor, r.residuals[k] / r.residuals[k + 1]);
            contract = contract && r.residuals[k + 1] <= r.residuals[k] / 10;
        }
        // Value and one-sided normal derivative on the first leaf.
        const std::size_t leaf = g.leaf_size();
        for (std::size_t i = 0; i < leaf; ++i) {
            if (!m.domain.contains(i)) continue;
            const double dv = std::abs(r.u[i] - m.base.u()[i]);
            const double dn = std::abs((r.u[i + leaf] - r.u[i]) - (m.base.u()[i + leaf] - m.base.u()[i])) / g.spacing[0];
            cauchy_defect = std::max({cauchy_defect, dv, dn});
        }
        cauchy = cauchy && cauchy_defect <= 1e-14;
        errs.push_back(m.error(r.u));
    }
    const double c = errs[1] / (h * h);
    const bool order = errs[0] / errs[1] > 3.5;
    return {converged && contract && cauchy && order && c <= 0.02,
            fmt("min contraction %.1fx (>= 10x above floor), |u - u*| = %.2e at 128 (C = %.4f, ratio to 64: %.2f), "
                "Cauchy defect %.1e (<= 1e-14)",
                worst_factor, errs[1], c, errs[0] / errs[1], cauchy_defect)};
}

Verdict energy_estimate() {
    std::vector<EnergyEstimateReport> reps;
    double a_star = 0.0;
    for (std::size_t nx : {129u, 257u, 513u}) {
        const ManufacturedLinear m = manufactured_linear(nx);
        LinearSolveOptions o;
        o.form = OperatorForm::Linearized;
        reps.push_back(verify_energy_estimate(solve_linear(m.u, m.f, m.data, m.domain, o), dyadic_weights()));
        if (!reps.back().stable()) return {false, fmt("no stabilized weight at %zu points", nx)};
        a_star = std::max(a_star, *reps.back().stabilized_weight);
    }
    double lo = INFINITY, hi = 0.0;
    for (const EnergyEstimateReport& r : reps) {
        const double c = r.constant_at(a_star).value_or(NAN);
        lo = std::min(lo, c);
        hi = std::max(hi, c);
    }
    return {hi / lo < 2.0, fmt("C_emp(a = %g) in [%.4f, %.4f] over h = 1/32, 1/64, 1/128, ratio %.4f (< 2)", a_star,
                               lo, hi, hi / lo)};
}

Verdict localization() {
    const LocalizationScenario s = localization_scenario(3, 32);
    const double tol = 5 * s.h * s.h;
    const ScalarField taut = tautological_eta(s.u, s.phi, 0.0, true, s.domain);
    const KernelScan scan = scan_kernel(taut, s.u, s.domain);
    const LocalizationReport loc = check_support_localization(taut, s.u, s.domain, tol, scan.orthogonal(tol));
    const KernelScan generic = scan_kernel(s.phi, s.u, s.domain);
    const bool pass = scan.samples.size() == 32 && scan.orthogonal(tol) && loc.outside_diamond <= tol && loc.forward_ok &&
                      generic.max_relative > 10 * tol;
    return {pass, fmt("tautological: max |relative pairing| %.2e over %zu samples, outside-diamond %.2e (<= 5h^2 = "
                      "%.2e); generic bump: max %.3f (> %.3f)",
                      scan.max_relative, scan.samples.size(), loc.outside_diamond, tol, generic.max_relative, 10 * tol)};
}

Verdict finite_speed() {
    double worst = 0.0;
    for (int n : {2, 3}) worst = std::max(worst, finite_speed_check(n, n == 2 ? 129 : 65).outside_relative);
    return {worst <= 1e-10, fmt("relative mass outside the dilated forward cone %.2e (<= 1e-10), n = 2 and 3", worst)};
}

}  // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<Verdict()>>> criteria{
        {"conformal-identity", conformal_identity}, {"curvature-closed-form", curvature_closed_form},
        {"instability-bound", instability},         {"nonlinear-solve", nonlinear},
        {"energy-estimate", energy_estimate},       {"localization", localization},
        {"finite-speed", finite_speed},
    };
    int failures = 0;
    for (const auto& [name, check] : criteria) {
        Verdict v;
        try {
            v = check();
        } catch (const std::exception& e) {
            v = {false, std::string("exception: ") + e.what()};
        }
        failures += v.pass ? 0 : 1;
        std::printf("%s %s: %s\n", v.pass ? "PASS" : "FAIL", name, v.detail.c_str());
        std::fflush(stdout);
    }
    return failures == 0 ? 0 : 1;
}
