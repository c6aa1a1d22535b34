#include "negcurv/nonlinear_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "negcurv/errors.hpp"

namespace negcurv {

double Smoothing::width_at(std::size_t iteration) const {
    if (widths.empty()) return 0.0;
    return widths[std::min(iteration, widths.size() - 1)];
}

double IterationReport::quadratic_constant() const {
    double kappa = 0.0;
    for (std::size_t k = 0; k + 1 < residuals.size(); ++k)
        if (residuals[k] > 0.0) kappa = std::max(kappa, residuals[k + 1] / (residuals[k] * residuals[k]));
    return kappa;
}

nlohmann::json IterationReport::to_json() const {
    nlohmann::json j;
    j["residuals"] = residuals;
    j["corrections"] = corrections;
    j["signature_preserved"] = signature_preserved;
    j["converged"] = converged;
    j["iterations"] = iterations();
    j["quadratic_constant"] = quadratic_constant();
    return j;
}

Mask residual_mask(const FoliatedDomain& domain) {
    const GridSpec& g = domain.grid;
    const std::size_t last = domain.leaf_count() - 1;
    Mask m(g.size(), 0);
    for (std::size_t p = 0; p < g.size(); ++p) {
        const std::size_t leaf = domain.leaf_of(p);
        if (leaf == 0 || leaf == last) continue;
        m[p] = domain.neighbourhood_inside(p, 1) ? 1 : 0;
    }
    return m;
}

ScalarField residual(const GraphSurface& u, const ScalarField& k_target) {
    if (!(u.grid() == k_target.grid())) throw Error(ErrorKind::InvalidArgument, "target lives on a different grid");
    ScalarField r = psi(u);
    for (std::size_t p = 0; p < r.size(); ++p) r[p] -= k_target[p];
    return r;
}

double masked_sup(const ScalarField& f, const Mask& mask) {
    double s = 0.0;
    for (std::size_t p = 0; p < f.size(); ++p)
        if (mask[p]) s = std::max(s, std::abs(f[p]));
    return s;
}

ScalarField base_curvature(const GraphSurface& base) { return psi(GraphSurface::finite_difference(base.u())); }

double default_admissibility_bound(const ScalarField& k_base, const FoliatedDomain& domain) {
    double lo = std::numeric_limits<double>::infinity();
    for (std::size_t p = 0; p < k_base.size(); ++p)
        if (domain.contains(p)) lo = std::min(lo, std::abs(k_base[p]));
    return 0.1 * lo;
}

ScalarField mollify_correction(const ScalarField& v, const FoliatedDomain& domain, double width) {
    if (!(width > 0.0)) return v;
    const GridSpec& g = domain.grid;
    const int n = g.dim;
    const std::size_t L = g.leaf_size();
    std::array<long, kMaxDim> reach{};
    for (int k = 1; k < n; ++k) reach[k] = static_cast<long>(std::floor(width / g.spacing[k]));

    // Kernel offsets with their product-profile weights.
    std::vector<std::pair<long, double>> kernel;
    std::array<long, kMaxDim> off{};
    for (int k = 1; k < n; ++k) off[k] = -reach[k];
    while (true) {
        double w = 1.0;
        long flat = 0;
        for (int k = 1; k < n; ++k) {
            w *= BumpFunction::profile(static_cast<double>(off[k]) * g.spacing[k] / width, 6, 0);
            flat += off[k] * static_cast<long>(g.stride(k));
        }
        if (w > 0.0) kernel.emplace_back(flat, w);
        int k = n - 1;
        while (k >= 1 && ++off[k] > reach[k]) {
            off[k] = -reach[k];
            --k;
        }
        if (k < 1) break;
    }

    ScalarField out = v;
    for (std::size_t s = 3; s < g.points[0]; ++s) {
        for (std::size_t i = 0; i < L; ++i) {
            const std::size_t p = s * L + i;
            if (!domain.contains(p)) continue;
            const MultiIndex idx = g.unravel(p);
            double acc = 0.0, mass = 0.0;
            for (const auto& [flat, w] : kernel) {
                const long q = static_cast<long>(p) + flat;
                // Reject offsets that wrap around a spatial axis.
                bool ok = q >= 0 && q < static_cast<long>(g.size());
                if (ok) {
                    const MultiIndex qi = g.unravel(static_cast<std::size_t>(q));
                    ok = qi[0] == idx[0];
                    for (int k = 1; k < n && ok; ++k)
                        ok = std::abs(static_cast<long>(qi[k]) - static_cast<long>(idx[k])) <= reach[k];
                }
                if (!ok || !domain.contains(static_cast<std::size_t>(q))) continue;
                acc += w * v[static_cast<std::size_t>(q)];
                mass += w;
            }
            out[p] = mass > 0.0 ? acc / mass : v[p];
        }
    }
    return out;
}

ScalarField extend_correction(const ScalarField& v, const FoliatedDomain& domain) {
    const GridSpec& g = domain.grid;
    const int n = g.dim;
    const std::size_t L = g.leaf_size();
    ScalarField out = v;
    for (std::size_t s = 0; s < g.points[0]; ++s) {
        const LeafBox& box = domain.leaves[s];
        if (box.empty(n)) continue;
        double* leaf = out.values().data() + s * L;
        for (int k = 1; k < n; ++k) {
            const long lo = box.lo[k], hi = box.hi[k];
            const std::size_t st = g.stride(k);
            for (std::size_t i = 0; i < L; ++i) {
                const MultiIndex idx = g.unravel(i);
                if (idx[k] != 0) continue;
                // Lines along axis k whose later axes lie in the box; earlier axes are already extended.
                bool in = true;
                for (int j = k + 1; j < n && in; ++j)
                    in = static_cast<long>(idx[j]) >= box.lo[j] && static_cast<long>(idx[j]) <= box.hi[j];
                if (!in) continue;
                double* line = leaf + i;
                auto at = [&](long j) -> double& { return line[static_cast<std::size_t>(j) * st]; };
                const double slope_lo = hi > lo ? at(lo) - at(lo + 1) : 0.0;
                const double slope_hi = hi > lo ? at(hi) - at(hi - 1) : 0.0;
                for (long j = 0; j < lo; ++j) at(j) = at(lo) + static_cast<double>(lo - j) * slope_lo;
                for (long j = hi + 1; j < static_cast<long>(g.points[k]); ++j)
                    at(j) = at(hi) + static_cast<double>(j - hi) * slope_hi;
            }
        }
    }
    return out;
}

namespace {

bool lorentzian_on_domain(const ScalarField& u, const FoliatedDomain& domain, const GeometryTolerances& tol) {
    const SymmetricMatrixField h = hessian(u);
    for (std::size_t p = 0; p < u.size(); ++p)
        if (domain.contains(p) && classify(load(h, p), tol.tau_eig) != Signature::Lorentzian) return false;
    return true;
}

}  // namespace

NewtonStep newton_step(const ScalarField& u, const ScalarField& k_target, const FoliatedDomain& domain,
                       const LinearSolveOptions& options, double smoothing_width) {
    const GraphSurface surface = GraphSurface::finite_difference(u);
    if (!lorentzian_on_domain(u, domain, options.tol))
        throw Error(ErrorKind::SignatureLost, "iterate Hessian is not Lorentzian on the domain");
    ScalarField rhs = residual(surface, k_target);
    // The first leaf carries the Cauchy data, not an equation: its one-sided
    // residual would otherwise reach back from later leaves through the Taylor start.
    const std::size_t leaf = u.grid().leaf_size();
    for (std::size_t p = 0; p < rhs.size(); ++p) rhs[p] = p < leaf ? 0.0 : -rhs[p];
    const LinearSolveReport lin = solve_linear(surface, rhs, CauchyData::zero(u.grid()), domain, options);
    NewtonStep step{u, extend_correction(mollify_correction(lin.v, domain, smoothing_width), domain)};
    for (std::size_t p = 0; p < u.size(); ++p) step.u[p] += step.correction[p];
    if (!lorentzian_on_domain(step.u, domain, options.tol))
        throw Error(ErrorKind::SignatureLost, "Newton update left the Lorentzian class");
    return step;
}

IterationReport solve_nonlinear(const NonlinearProblem& problem) {
    const GridSpec& grid = problem.domain.grid;
    if (!(problem.base.grid() == grid) || !(problem.eta.grid() == grid))
        throw Error(ErrorKind::InvalidArgument, "surface, perturbation and domain grids differ");
    if (!problem.eta.all_finite()) throw Error(ErrorKind::InvalidArgument, "perturbation is not finite");
    if (!(problem.tol > 0.0)) throw Error(ErrorKind::InvalidArgument, "residual tolerance must be positive");
    if (problem.max_iterations < 0) throw Error(ErrorKind::InvalidArgument, "max iterations must be nonnegative");

    const ScalarField k_base = base_curvature(problem.base);
    const double bound = problem.admissibility_bound.value_or(default_admissibility_bound(k_base, problem.domain));
    double eta_sup = 0.0;
    for (std::size_t p = 0; p < grid.size(); ++p)
        if (problem.domain.contains(p)) eta_sup = std::max(eta_sup, std::abs(problem.eta[p]));
    if (eta_sup > bound)
        throw Error(ErrorKind::InadmissiblePerturbation,
                    "sup|eta| = " + std::to_string(eta_sup) + " exceeds " + std::to_string(bound));

    ScalarField target = k_base;
    for (std::size_t p = 0; p < grid.size(); ++p) target[p] += problem.eta[p];
    const Mask mask = residual_mask(problem.domain);

    IterationReport rep;
    rep.u = problem.base.u();
    rep.residuals.push_back(masked_sup(residual(GraphSurface::finite_difference(rep.u), target), mask));
    rep.converged = rep.residuals.back() <= problem.tol;
    for (int k = 0; k < problem.max_iterations && !rep.converged; ++k) {
        const NewtonStep step = newton_step(rep.u, target, problem.domain, problem.linear,
                                            problem.smoothing.width_at(static_cast<std::size_t>(k)));
        double vmax = 0.0;
        for (double x : step.correction.values()) vmax = std::max(vmax, std::abs(x));
        rep.u = step.u;
        rep.corrections.push_back(vmax);
        rep.signature_preserved.push_back(true);
        rep.residuals.push_back(masked_sup(residual(GraphSurface::finite_difference(rep.u), target), mask));
        rep.converged = rep.residuals.back() <= problem.tol;
    }
    return rep;
}

}  // namespace negcurv
