#include "negcurv/localization.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "negcurv/errors.hpp"

namespace negcurv {

nlohmann::json PairingResult::to_json() const {
    return {{"value", value}, {"normalization", normalization}, {"relative", relative}};
}

void check_interior_support(const ScalarField& eta, const FoliatedDomain& domain, long margin) {
    if (!(eta.grid() == domain.grid)) throw Error(ErrorKind::InvalidArgument, "field lives on a different grid");
    const long last = static_cast<long>(domain.leaf_count()) - 1;
    for (std::size_t p = 0; p < eta.size(); ++p) {
        if (eta[p] == 0.0) continue;
        const long leaf = static_cast<long>(domain.leaf_of(p));
        if (leaf < margin || leaf > last - margin || !domain.neighbourhood_inside(p, margin))
            throw Error(ErrorKind::SupportTouchesBoundary,
                        "support reaches within " + std::to_string(margin) + " cells of the boundary at point " +
                            std::to_string(p));
    }
}

namespace {

double cell_volume(const GridSpec& g) {
    double v = 1.0;
    for (int k = 0; k < g.dim; ++k) v *= g.spacing[k];
    return v;
}

// weight * eta and the volume density the pairing integrates against.
struct PairingWeights {
    ScalarField weighted;
    ScalarField density;
};

PairingWeights pairing_weights(const ScalarField& eta, const GraphSurface& u) {
    const GridSpec& g = u.grid();
    PairingWeights pw{ScalarField(g), ScalarField(g)};
    if (g.dim >= 3) {
        const ScalarField f = conformal_factor(u);
        pw.density = volume_density(lorentzian_metric(u));
        for (std::size_t p = 0; p < g.size(); ++p) pw.weighted[p] = f[p] * eta[p];
    } else {
        const ScalarField k = psi(u);
        pw.density = volume_density(hessian(u));
        for (std::size_t p = 0; p < g.size(); ++p) pw.weighted[p] = eta[p] / k[p];
    }
    return pw;
}

PairingResult pair(const ScalarField& w, const PairingWeights& pw, const FoliatedDomain& domain) {
    const double dv = cell_volume(domain.grid);
    double value = 0.0, ww = 0.0, ee = 0.0;
    for (std::size_t p = 0; p < w.size(); ++p) {
        if (!domain.contains(p)) continue;
        value += w[p] * pw.weighted[p] * pw.density[p];
        ww += w[p] * w[p];
        ee += pw.weighted[p] * pw.weighted[p];
    }
    PairingResult r;
    r.value = value * dv;
    r.normalization = std::sqrt(ww * dv) * std::sqrt(ee * dv);
    r.relative = r.normalization > 0.0 ? r.value / r.normalization : 0.0;
    return r;
}

}  // namespace

PairingResult pairing(const ScalarField& w, const ScalarField& eta, const GraphSurface& u,
                      const FoliatedDomain& domain) {
    if (!(w.grid() == domain.grid) || !(u.grid() == domain.grid))
        throw Error(ErrorKind::InvalidArgument, "pairing inputs live on different grids");
    check_interior_support(eta, domain);
    return pair(w, pairing_weights(eta, u), domain);
}

WaveProblem kernel_problem(const GraphSurface& u) {
    const OperatorForm form = u.dim() >= 3 ? OperatorForm::Geometric : OperatorForm::GeometricAdjoint;
    return assemble_problem(u, ScalarField(u.grid()), form);
}

ScalarField kernel_sample(const GraphSurface& u, const FoliatedDomain& domain, const CauchyData& data) {
    return solve_wave(kernel_problem(u), data, domain).v;
}

std::vector<CauchyData> kernel_family(const GridSpec& grid) {
    const int n = grid.dim;
    if (n < 2) throw Error(ErrorKind::DimensionError, "kernel family needs a spatial axis");
    Point centre{}, half{};
    for (int k = 1; k < n; ++k) {
        half[k] = 0.5 * grid.extent(k);
        centre[k] = grid.origin[k] + half[k];
    }
    struct LeafBump {
        Point shift;
        double radius;
    };
    const int last = n - 1;
    std::vector<LeafBump> bumps(4);
    bumps[0].radius = 0.6;
    bumps[1].shift[1] = 0.25;
    bumps[1].radius = 0.5;
    bumps[2].shift[last] = -0.25;
    bumps[2].radius = 0.5;
    bumps[3].radius = 0.9;

    auto bump_at = [&](const LeafBump& b, const Point& x) {
        double v = 1.0;
        for (int k = 1; k < n; ++k) {
            const double xi = (x[k] - centre[k]) / half[k] - b.shift[k];
            v *= BumpFunction::profile(xi / b.radius, 6, 0);
        }
        return v;
    };
    auto poly_at = [&](int which, const Point& x) {
        const double a = (x[1] - centre[1]) / half[1];
        const double c = (x[last] - centre[last]) / half[last];
        switch (which) {
            case 0: return 1.0;
            case 1: return a;
            case 2: return c * c;
            default: return n >= 3 ? a * c : a * a * a;
        }
    };

    std::vector<CauchyData> family;
    for (int as_derivative = 0; as_derivative < 2; ++as_derivative)
        for (const LeafBump& b : bumps)
            for (int poly = 0; poly < 4; ++poly) {
                CauchyData d = CauchyData::zero(grid);
                for (std::size_t i = 0; i < d.value.size(); ++i) {
                    const Point x = grid.position(i);
                    const double s = bump_at(b, x) * poly_at(poly, x);
                    (as_derivative ? d.derivative : d.value)[i] = s;
                }
                family.push_back(std::move(d));
            }
    return family;
}

ScalarField tautological_eta(const GraphSurface& u, const ScalarField& phi, double eps, bool linearized,
                             const FoliatedDomain& domain) {
    check_interior_support(phi, domain);
    if (linearized) return apply_linearized(u, phi);
    ScalarField out(u.grid());
    if (eps == 0.0) return out;
    ScalarField moved = u.u();
    for (std::size_t p = 0; p < moved.size(); ++p) moved[p] += eps * phi[p];
    const ScalarField a = psi(GraphSurface::finite_difference(moved));
    const ScalarField b = psi(GraphSurface::finite_difference(u.u()));
    for (std::size_t p = 0; p < out.size(); ++p) out[p] = a[p] - b[p];
    return out;
}

nlohmann::json LocalizationReport::to_json() const {
    return {{"norm", norm},
            {"outside_future", outside_future},
            {"outside_past", outside_past},
            {"outside_diamond", outside_diamond},
            {"forward_ok", forward_ok},
            {"diamond_asserted", diamond_asserted},
            {"diamond_ok", diamond_ok}};
}

LocalizationReport check_support_localization(const ScalarField& eta, const GraphSurface& u,
                                              const FoliatedDomain& domain, double tol, bool orthogonal) {
    check_interior_support(eta, domain);
    const GridSpec& g = domain.grid;
    LocalizationReport r;
    r.support.assign(g.size(), 0);
    for (std::size_t p = 0; p < g.size(); ++p) r.support[p] = eta[p] != 0.0 ? 1 : 0;
    const SymmetricMatrixField m = hessian(u);
    r.future = causal_cone(m, r.support, Direction::Future).membership;
    r.past = causal_cone(m, r.support, Direction::Past).membership;

    LinearSolveOptions opt;
    opt.form = OperatorForm::Linearized;
    r.v = solve_linear(u, eta, CauchyData::zero(g), domain, opt).v;

    double total = 0.0, out_f = 0.0, out_p = 0.0, out_d = 0.0;
    for (std::size_t p = 0; p < g.size(); ++p) {
        if (!domain.contains(p)) continue;
        const double e = r.v[p] * r.v[p];
        total += e;
        if (!r.future[p]) out_f += e;
        if (!r.past[p]) out_p += e;
        if (!(r.future[p] && r.past[p])) out_d += e;
    }
    r.norm = std::sqrt(total);
    if (total > 0.0) {
        r.outside_future = std::sqrt(out_f / total);
        r.outside_past = std::sqrt(out_p / total);
        r.outside_diamond = std::sqrt(out_d / total);
    }
    r.forward_ok = r.outside_future <= 1e-10;
    r.diamond_asserted = orthogonal;
    r.diamond_ok = !orthogonal || r.outside_diamond <= tol;
    return r;
}

nlohmann::json KernelScan::to_json() const {
    nlohmann::json j = nlohmann::json::array();
    for (const auto& s : samples) j.push_back(s.to_json());
    return {{"samples", j}, {"max_relative", max_relative}};
}

KernelScan scan_kernel(const ScalarField& eta, const GraphSurface& u, const FoliatedDomain& domain) {
    check_interior_support(eta, domain);
    const PairingWeights pw = pairing_weights(eta, u);
    const WaveProblem problem = kernel_problem(u);
    KernelScan scan;
    for (const CauchyData& d : kernel_family(domain.grid)) {
        const ScalarField w = solve_wave(problem, d, domain).v;
        scan.samples.push_back(pair(w, pw, domain));
        scan.max_relative = std::max(scan.max_relative, std::abs(scan.samples.back().relative));
    }
    return scan;
}

}  // namespace negcurv
