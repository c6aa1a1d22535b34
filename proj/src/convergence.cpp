#include "negcurv/convergence.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <map>
#include <random>

#include "negcurv/errors.hpp"
#include "negcurv/geometry.hpp"
#include "negcurv/scenarios.hpp"

namespace negcurv {

namespace {

/// Random polynomial of total degree <= 4 in up to three variables, coefficients in [-1, 1].
struct Polynomial {
    std::vector<std::array<int, 3>> exps;
    std::vector<double> coef;

    Polynomial(int dim, std::mt19937_64& rng) {
        std::uniform_real_distribution<double> coefficient(-1.0, 1.0);
        for (int a = 0; a <= 4; ++a)
            for (int b = 0; a + b <= 4; ++b)
                for (int c = 0; a + b + c <= 4; ++c) {
                    if (dim < 3 && c > 0) continue;
                    exps.push_back({a, b, c});
                    coef.push_back(coefficient(rng));
                }
    }
    double operator()(const Point& x) const {
        double s = 0.0;
        for (std::size_t i = 0; i < coef.size(); ++i)
            s += coef[i] * std::pow(x[0], exps[i][0]) * std::pow(x[1], exps[i][1]) * std::pow(x[2], exps[i][2]);
        return s;
    }
};

CatalogSurface bumped(int n, double eps) {
    BumpFunction b;
    b.dim = n;
    for (int k = 0; k < n; ++k) {
        b.center[k] = 0.1 * k;
        b.radius[k] = 0.8;
    }
    return CatalogSurface::perturbed_paraboloid(n, eps, b);
}

GridSpec unit_cube(int dim, double half, int level) {
    return GridSpec::cube(dim, -half, half, static_cast<std::size_t>(std::lround(2 * half * level)) + 1);
}

/// Points at least `width` away from every face, a fixed physical set across levels.
bool inside_by(const GridSpec& g, std::size_t p, double width) {
    const Point x = g.position(p);
    for (int a = 0; a < g.dim; ++a)
        if (x[a] < g.origin[a] + width - 1e-12 || x[a] > g.origin[a] + g.extent(a) - width + 1e-12) return false;
    return true;
}

/// Error per random sample at one level; a single entry for deterministic checks.
using LevelError = std::function<std::vector<double>(int level, const ConvergenceOptions&)>;

struct Check {
    std::vector<int> dims;
    int fixed_dim;  // 0 when the options choose
    LevelError error;
};

std::vector<double> conformal_identity(int level, const ConvergenceOptions& o) {
    const GraphSurface s = GraphSurface::analytic(unit_cube(3, 0.5, level), CatalogSurface::hyperbolic_paraboloid(3));
    const GridSpec& g = s.grid();
    const SymmetricMatrixField metric = lorentzian_metric(s);
    const ScalarField f = conformal_factor(s);
    std::mt19937_64 rng(o.seed);
    std::vector<double> errs;
    for (int k = 0; k < o.samples; ++k) {
        const Polynomial poly(3, rng);
        const ScalarField v = ScalarField::sample(g, poly);
        const ScalarField box = apply_box(metric, v);
        const ScalarField lv = apply_linearized(s, v);
        double err = 0.0;
        for (std::size_t p = 0; p < g.size(); ++p)
            if (inside_by(g, p, 1.0 / 16)) err = std::max(err, std::abs(box[p] - f[p] * lv[p]));
        errs.push_back(err);
    }
    return errs;
}

std::vector<double> n2_identity(int level, const ConvergenceOptions& o) {
    const GraphSurface s = GraphSurface::analytic(unit_cube(2, 1.0, level), bumped(2, 0.02));
    const GridSpec& g = s.grid();
    const SymmetricMatrixField m = hessian(s);
    const VectorField b = first_order_coeffs_n2(s);
    const ScalarField k = psi(s);
    std::mt19937_64 rng(o.seed);
    std::vector<double> errs;
    for (int j = 0; j < o.samples; ++j) {
        const Polynomial poly(2, rng);
        const ScalarField v = ScalarField::sample(g, poly);
        const ScalarField box = apply_box(m, v);
        const VectorField dv = gradient(v);
        const ScalarField lv = apply_linearized(s, v);
        double err = 0.0;
        for (std::size_t p = 0; p < g.size(); ++p) {
            if (!inside_by(g, p, 1.0 / 16)) continue;
            const double l = k[p] * (box[p] + b(p, 0) * dv(p, 0) + b(p, 1) * dv(p, 1));
            err = std::max(err, std::abs(l - lv[p]));
        }
        errs.push_back(err);
    }
    return errs;
}

double curvature_fd_error(int level, const ConvergenceOptions& o) {
    const GraphSurface s = GraphSurface::analytic(unit_cube(o.dim, 1.0, level), bumped(o.dim, 0.1));
    const ScalarField exact = psi(s);
    const ScalarField approx = psi(GraphSurface::finite_difference(s.u()));
    double err = 0.0;
    for (std::size_t p = 0; p < exact.size(); ++p) err = std::max(err, std::abs(exact[p] - approx[p]));
    return err;
}

double gradient_fd_error(int level, const ConvergenceOptions& o) {
    const GraphSurface s = GraphSurface::analytic(unit_cube(o.dim, 1.0, level), bumped(o.dim, 0.1));
    const GraphSurface fd = GraphSurface::finite_difference(s.u());
    const VectorField ga = gradient(s), gf = gradient(fd);
    const SymmetricMatrixField ha = hessian(s), hf = hessian(fd);
    double err = 0.0;
    for (std::size_t p = 0; p < s.u().size(); ++p)
        for (int i = 0; i < o.dim; ++i) {
            err = std::max(err, std::abs(ga(p, i) - gf(p, i)));
            for (int j = i; j < o.dim; ++j) err = std::max(err, std::abs(ha(p, i, j) - hf(p, i, j)));
        }
    return err;
}

double cofactor_div_error(int level, const ConvergenceOptions& o) {
    const GraphSurface s = GraphSurface::analytic(unit_cube(o.dim, 0.5, level), bumped(o.dim, 0.1));
    double err = 0.0;
    const VectorField d = cofactor_divergence(s);
    for (double v : d.values()) err = std::max(err, std::abs(v));
    return err;
}

double linear_manufactured_error(int level, const ConvergenceOptions&) {
    const ManufacturedLinear m = manufactured_linear(static_cast<std::size_t>(4 * level) + 1);
    LinearSolveOptions opt;
    opt.form = OperatorForm::Linearized;
    return m.error(solve_linear(m.u, m.f, m.data, m.domain, opt).v);
}

double newton_manufactured_error(int level, const ConvergenceOptions&) {
    const ManufacturedNewton m = manufactured_newton(static_cast<std::size_t>(4 * level));
    const IterationReport r = solve_nonlinear(m.problem());
    if (!r.converged) throw Error(ErrorKind::InvalidArgument, "Newton iteration did not converge at level " +
                                                                  std::to_string(level));
    return m.error(r.u);
}

LevelError single(double (*f)(int, const ConvergenceOptions&)) {
    return [f](int level, const ConvergenceOptions& o) { return std::vector<double>{f(level, o)}; };
}

const std::map<std::string, Check>& registry() {
    static const std::map<std::string, Check> checks{
        {"conformal-identity", {{3}, 3, conformal_identity}},
        {"n2-identity", {{2}, 2, n2_identity}},
        {"curvature-fd", {{2, 3}, 0, single(curvature_fd_error)}},
        {"gradient-fd", {{2, 3}, 0, single(gradient_fd_error)}},
        {"cofactor-divergence", {{2, 3}, 0, single(cofactor_div_error)}},
        {"linear-manufactured", {{2}, 2, single(linear_manufactured_error)}},
        {"newton-manufactured", {{2}, 2, single(newton_manufactured_error)}},
    };
    return checks;
}

}  // namespace

nlohmann::json OrderFit::to_json() const {
    if (exact) return "exact";
    return order ? nlohmann::json(*order) : nlohmann::json(nullptr);
}

OrderFit fit_order(const std::vector<double>& h, const std::vector<double>& error) {
    if (h.size() != error.size()) throw Error(ErrorKind::InvalidArgument, "h and error differ in length");
    double sx = 0, sy = 0, sxx = 0, sxy = 0, n = 0;
    bool all_zero = true;
    for (std::size_t i = 0; i < h.size(); ++i) {
        if (!(h[i] > 0.0)) throw Error(ErrorKind::InvalidArgument, "spacings must be positive");
        if (error[i] < 0.0 || !std::isfinite(error[i]))
            throw Error(ErrorKind::InvalidArgument, "errors must be finite and non-negative");
        if (error[i] == 0.0) continue;
        all_zero = false;
        const double x = std::log(h[i]), y = std::log(error[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        n += 1;
    }
    OrderFit fit;
    if (all_zero) {
        fit.exact = true;
        return fit;
    }
    const double den = n * sxx - sx * sx;
    if (n >= 2 && den > 0.0) fit.order = (n * sxy - sx * sy) / den;
    return fit;
}

bool ConvergenceReport::passed() const {
    const auto ok = [&](const OrderFit& f) { return f.exact || (f.order && *f.order >= required_order); };
    return ok(fit) && std::all_of(sample_fits.begin(), sample_fits.end(), ok);
}

nlohmann::json ConvergenceReport::to_json() const {
    nlohmann::json lv = nlohmann::json::array();
    for (const ConvergenceLevel& l : levels)
        lv.push_back({{"level", l.level}, {"h", l.h}, {"error", l.error}, {"sample_errors", l.sample_errors}});
    nlohmann::json orders = nlohmann::json::array();
    for (const OrderFit& f : sample_fits) orders.push_back(f.to_json());
    return {{"check", check},
            {"dim", dim},
            {"levels", lv},
            {"order", fit.to_json()},
            {"sample_orders", orders},
            {"required_order", required_order},
            {"passed", passed()}};
}

std::vector<std::string> registered_checks() {
    std::vector<std::string> out;
    for (const auto& [name, check] : registry()) out.push_back(name);
    return out;
}

ConvergenceReport convergence_harness(const std::string& check, const ConvergenceOptions& options) {
    const auto it = registry().find(check);
    if (it == registry().end()) throw Error(ErrorKind::UnknownCheck, "no convergence check named '" + check + "'");
    if (options.levels.size() < 2) throw Error(ErrorKind::InvalidArgument, "at least two levels are needed");
    if (options.samples < 1) throw Error(ErrorKind::InvalidArgument, "samples must be positive");
    ConvergenceOptions o = options;
    if (it->second.fixed_dim != 0) o.dim = it->second.fixed_dim;
    if (std::find(it->second.dims.begin(), it->second.dims.end(), o.dim) == it->second.dims.end()) throw Error(ErrorKind::DimensionError, "check " + check + " does not support n = " + std::to_string(o.dim));

    ConvergenceReport r;
    r.check = check;
    r.dim = o.dim;
    std::vector<double> hs, errs;
    std::vector<std::vector<double>> per_sample;
    for (int level : o.levels) {
        if (level < 8) throw Error(ErrorKind::GridTooSmall, "levels must be at least 8 points per unit");
        const std::vector<double> e = it->second.error(level, o);
        per_sample.resize(e.size());
        for (std::size_t k = 0; k < e.size(); ++k) per_sample[k].push_back(e[k]);
        const double worst = *std::max_element(e.begin(), e.end());
        r.levels.push_back({level, 1.0 / level, worst, e});
        hs.push_back(1.0 / level);
        errs.push_back(worst);
    }
    r.fit = fit_order(hs, errs);
    if (per_sample.size() > 1)
        for (const std::vector<double>& e : per_sample) r.sample_fits.push_back(fit_order(hs, e));
    return r;
}

}  // namespace negcurv
