#include "negcurv/linear_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "negcurv/errors.hpp"
#include "negcurv/parallel.hpp"

namespace negcurv {

CauchyData CauchyData::zero(const GridSpec& grid) {
    CauchyData d;
    d.value.assign(grid.leaf_size(), 0.0);
    d.derivative.assign(grid.leaf_size(), 0.0);
    return d;
}

namespace {

void require_same_grid(const GridSpec& a, const GridSpec& b, const char* what) {
    if (!(a == b)) throw Error(ErrorKind::InvalidArgument, std::string(what) + " lives on a different grid");
}

ScalarField divergence_weighted(const VectorField& b, const ScalarField& w) {
    // (1/w) d_j (w b^j)
    const GridSpec& g = w.grid();
    ScalarField out(g);
    for (int j = 0; j < g.dim; ++j) {
        ScalarField wb(g);
        for (std::size_t p = 0; p < g.size(); ++p) wb[p] = w[p] * b(p, j);
        const ScalarField d = diff(wb, j);
        for (std::size_t p = 0; p < g.size(); ++p) out[p] += d[p] / w[p];
    }
    return out;
}

}  // namespace

WaveProblem assemble_problem(const GraphSurface& u, const ScalarField& f, OperatorForm form,
                             const GeometryTolerances& tol, const FoliatedDomain* domain) {
    const GridSpec& grid = u.grid();
    require_same_grid(f.grid(), grid, "source term");
    const int n = grid.dim;
    if (n < 2) throw Error(ErrorKind::DimensionError, "the evolution problem needs n >= 2");
    if (form == OperatorForm::GeometricAdjoint && n >= 3) form = OperatorForm::Geometric;
    if (domain) require_same_grid(domain->grid, grid, "domain");
    // Only the Linearized form is purely pointwise; the others differentiate coefficients.
    const bool masked = domain && form == OperatorForm::Linearized;

    const VectorField du = gradient(u);
    const SymmetricMatrixField m = hessian(u);
    WaveProblem p{SymmetricMatrixField(grid), VectorField(grid), ScalarField(grid), ScalarField(grid),
                  SymmetricMatrixField(grid)};
    ScalarField k(grid);
    SymmetricMatrixField minv(grid);
    SmallMatrix inert = SmallMatrix::identity(n);
    inert(0, 0) = -1.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (masked && !domain->contains(i)) {
            store(minv, i, inert);
            store(p.normal_inverse, i, inert);
            k[i] = 1.0;
            continue;
        }
        const SmallMatrix mi = load(m, i);
        const double det = mi.determinant();
        if (!(std::abs(det) >= tol.tau_det))
            throw Error(ErrorKind::SingularHessian, "Hessian determinant below floor at point " + std::to_string(i));
        if (classify(mi, tol.tau_eig) != Signature::Lorentzian)
            throw Error(ErrorKind::NotLorentzian, "Hessian is not Lorentzian at point " + std::to_string(i));
        const SmallMatrix inv = mi.inverse();
        store(minv, i, inv);
        const Point d = du.at(i);
        const double q = 1.0 + dot(d, d, n);
        k[i] = det / std::pow(q, 0.5 * (n + 2));
        // g = lambda m with lambda = |det|^(1/(n-2)) q^(-(n+2)/(n-2)), so g^-1 = m^-1 / lambda.
        const double lambda =
            n >= 3 ? std::pow(std::abs(det), 1.0 / (n - 2)) * std::pow(q, -static_cast<double>(n + 2) / (n - 2)) : 1.0;
        store(p.normal_inverse, i, (1.0 / lambda) * inv);
    }

    switch (form) {
        case OperatorForm::Geometric: {
            if (n >= 3) {
                const SymmetricMatrixField g = lorentzian_metric(u, tol);
                const ScalarField fac = conformal_factor(u, tol);
                p.a = inverse_field(g, tol);
                p.b = box_first_order(g, tol);
                for (std::size_t i = 0; i < grid.size(); ++i) p.g[i] = fac[i] * f[i];
            } else {
                const VectorField bb = first_order_coeffs_n2(u, tol);
                p.a = minv;
                p.b = box_first_order(m, tol);
                for (std::size_t i = 0; i < grid.size(); ++i) {
                    for (int j = 0; j < n; ++j) p.b(i, j) += bb(i, j);
                    p.g[i] = f[i] / k[i];
                }
            }
            break;
        }
        case OperatorForm::Linearized: {
            p.a = minv;
            for (std::size_t i = 0; i < grid.size(); ++i) {
                if (masked && !domain->contains(i)) continue;
                const Point d = du.at(i);
                const double q = 1.0 + dot(d, d, n);
                for (int j = 0; j < n; ++j) p.b(i, j) = -(n + 2) * d[j] / q;
                p.g[i] = f[i] / k[i];
            }
            break;
        }
        case OperatorForm::GeometricAdjoint: {
            const VectorField bb = first_order_coeffs_n2(u, tol);
            const ScalarField w = volume_density(m, tol);
            const ScalarField divb = divergence_weighted(bb, w);
            p.a = minv;
            p.b = box_first_order(m, tol);
            for (std::size_t i = 0; i < grid.size(); ++i) {
                for (int j = 0; j < n; ++j) p.b(i, j) -= bb(i, j);
                p.c[i] = -divb[i];
                p.g[i] = f[i] / k[i];
            }
            break;
        }
    }
    return p;
}

ScalarField time_reversed(const ScalarField& f) {
    const GridSpec& g = f.grid();
    const std::size_t leaf = g.leaf_size(), nt = g.points[0];
    ScalarField out(g);
    for (std::size_t s = 0; s < nt; ++s)
        for (std::size_t i = 0; i < leaf; ++i) out[(nt - 1 - s) * leaf + i] = f[s * leaf + i];
    return out;
}

namespace {

SymmetricMatrixField reversed_matrix(const SymmetricMatrixField& m) {
    const GridSpec& g = m.grid();
    const std::size_t leaf = g.leaf_size(), nt = g.points[0];
    SymmetricMatrixField out(g);
    for (std::size_t s = 0; s < nt; ++s)
        for (std::size_t i = 0; i < leaf; ++i) {
            const std::size_t from = s * leaf + i, to = (nt - 1 - s) * leaf + i;
            for (int a = 0; a < g.dim; ++a)
                for (int b = a; b < g.dim; ++b) out(to, a, b) = ((a == 0) != (b == 0) ? -1.0 : 1.0) * m(from, a, b);
        }
    return out;
}

}  // namespace

WaveProblem time_reversed(const WaveProblem& p) {
    const GridSpec& g = p.a.grid();
    const std::size_t leaf = g.leaf_size(), nt = g.points[0];
    WaveProblem r{reversed_matrix(p.a), VectorField(g), time_reversed(p.c), time_reversed(p.g),
                  reversed_matrix(p.normal_inverse)};
    for (std::size_t s = 0; s < nt; ++s)
        for (std::size_t i = 0; i < leaf; ++i) {
            const std::size_t from = s * leaf + i, to = (nt - 1 - s) * leaf + i;
            for (int j = 0; j < g.dim; ++j) r.b(to, j) = (j == 0 ? -1.0 : 1.0) * p.b(from, j);
        }
    return r;
}

double EnergyTrace::constant() const {
    double sup = 0.0;
    for (double e : leaf_energy) sup = std::max(sup, e);
    const double den = source + initial;
    if (den == 0.0) return sup == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    return sup / den;
}

nlohmann::json EnergyTrace::to_json() const {
    return {{"a", a}, {"times", times}, {"leaf_energy", leaf_energy}, {"source", source}, {"initial", initial},
            {"c_emp", constant()}};
}

double cfl_ratio(const SymmetricMatrixField& a, const FoliatedDomain& domain) {
    const GridSpec& g = domain.grid;
    const int n = g.dim;
    const double dt = g.spacing[0];
    double worst = 0.0;
    for (std::size_t p = 0; p < g.size(); ++p) {
        if (!domain.contains(p)) continue;
        const double a00 = a(p, 0, 0);
        if (!(a00 < 0.0)) return std::numeric_limits<double>::infinity();
        double s = 0.0;
        for (int k = 1; k < n; ++k)
            for (int l = 1; l < n; ++l) s += std::abs(a(p, k, l)) / (g.spacing[k] * g.spacing[l]);
        worst = std::max(worst, dt * std::sqrt(s / -a00));
    }
    return worst;
}

GridSpec cfl_grid(double t0, double duration, const std::vector<double>& lo, const std::vector<double>& hi,
                  std::size_t spatial_points, double speed, double safety) {
    if (lo.size() != hi.size() || lo.empty())
        throw Error(ErrorKind::InvalidArgument, "spatial bounds must have equal nonzero length");
    if (!(duration > 0.0) || !(speed > 0.0) || !(safety > 0.0))
        throw Error(ErrorKind::InvalidArgument, "duration, speed and safety must be positive");
    const int nspace = static_cast<int>(lo.size());
    double h = std::numeric_limits<double>::infinity();
    for (int k = 0; k < nspace; ++k) h = std::min(h, (hi[k] - lo[k]) / static_cast<double>(spatial_points - 1));
    const double dt_max = safety * h / (speed * std::sqrt(static_cast<double>(nspace)));
    const auto nt = static_cast<std::size_t>(std::ceil(duration / dt_max - 1e-9)) + 1;
    std::vector<double> origin{t0}, extent{duration};
    std::vector<std::size_t> points{nt};
    for (int k = 0; k < nspace; ++k) {
        origin.push_back(lo[k]);
        extent.push_back(hi[k] - lo[k]);
        points.push_back(spatial_points);
    }
    return GridSpec::box(origin, extent, points);
}

LinearSolveReport solve_wave(const WaveProblem& problem, const CauchyData& data, const FoliatedDomain& domain,
                             const LinearSolveOptions& options) {
    const GridSpec& grid = domain.grid;
    require_same_grid(problem.a.grid(), grid, "principal part");
    require_same_grid(problem.b.grid(), grid, "first-order part");
    require_same_grid(problem.c.grid(), grid, "zeroth-order part");
    require_same_grid(problem.g.grid(), grid, "right-hand side");
    const std::size_t L = grid.leaf_size();
    if (data.value.size() != L || data.derivative.size() != L)
        throw Error(ErrorKind::InvalidArgument, "Cauchy data size does not match the first leaf");
    const int n = grid.dim;
    const std::size_t nt = grid.points[0];
    if (nt < 3) throw Error(ErrorKind::GridTooSmall, "time stepping needs at least 3 leaves");
    for (int k = 1; k < n; ++k)
        if (grid.points[k] < 3) throw Error(ErrorKind::GridTooSmall, "spatial stencils need 3 points per axis");

    const double ratio = cfl_ratio(problem.a, domain);
    if (!std::isfinite(ratio))
        throw Error(ErrorKind::NotSpacelike, "time coordinate is not timelike somewhere in the domain");
    if (ratio > options.cfl_limit)
        throw Error(ErrorKind::CFLViolation,
                    "CFL ratio " + std::to_string(ratio) + " exceeds " + std::to_string(options.cfl_limit));

    const double dt = grid.spacing[0];
    std::array<double, kMaxDim> h{};
    std::array<std::size_t, kMaxDim> st{};
    for (int k = 1; k < n; ++k) {
        h[k] = grid.spacing[k];
        st[k] = grid.stride(k);
    }
    const auto& A = problem.a;
    const auto& B = problem.b;
    const auto& C = problem.c;
    const auto& G = problem.g;

    // Spatial derivative of a leaf-local array at leaf-local index i; one-sided at the grid edges.
    auto leaf_diff = [&](const double* f, std::size_t i, int k) {
        const std::size_t idx = (i / st[k]) % grid.points[k];
        const std::size_t s = st[k];
        if (idx == 0) return (-3.0 * f[i] + 4.0 * f[i + s] - f[i + 2 * s]) / (2.0 * h[k]);
        if (idx == grid.points[k] - 1) return (3.0 * f[i] - 4.0 * f[i - s] + f[i - 2 * s]) / (2.0 * h[k]);
        return (f[i + s] - f[i - s]) / (2.0 * h[k]);
    };
    auto d1 = [&](const double* f, std::size_t i, int k) { return (f[i + st[k]] - f[i - st[k]]) / (2.0 * h[k]); };
    auto d2 = [&](const double* f, std::size_t i, int k, int l) {
        if (k == l) return (f[i + st[k]] - 2.0 * f[i] + f[i - st[k]]) / (h[k] * h[k]);
        return (f[i + st[k] + st[l]] - f[i + st[k] - st[l]] - f[i - st[k] + st[l]] + f[i - st[k] - st[l]]) /
               (4.0 * h[k] * h[l]);
    };
    auto spatial_part = [&](const double* vn, std::size_t p, std::size_t i) {
        double r = C[p] * vn[i];
        for (int k = 1; k < n; ++k) {
            r += B(p, k) * d1(vn, i, k);
            for (int l = 1; l < n; ++l) r += A(p, k, l) * d2(vn, i, k, l);
        }
        return r;
    };

    LinearSolveReport rep;
    rep.v = ScalarField(grid);
    rep.g = problem.g;
    rep.domain = domain;
    rep.cfl_ratio = ratio;
    std::span<double> v = rep.v.values();

    // First leaf: value from the data, d/dt from the normal derivative.
    const LeafBox& box0 = domain.leaves[0];
    std::vector<double> w0(L, 0.0);
    for (std::size_t i = 0; i < L; ++i) {
        const MultiIndex idx = grid.unravel(i);
        if (!box0.contains(idx, n)) continue;
        v[i] = data.value[i];
    }
    for (std::size_t i = 0; i < L; ++i) {
        const MultiIndex idx = grid.unravel(i);
        if (!box0.contains(idx, n)) continue;
        if (data.time_derivative) {
            w0[i] = data.derivative[i];
            continue;
        }
        const auto& ni = problem.normal_inverse;
        const double norm = std::sqrt(-ni(i, 0, 0));
        double tangential = 0.0;
        for (int k = 1; k < n; ++k) tangential += (-ni(i, k, 0) / norm) * leaf_diff(data.value.data(), i, k);
        w0[i] = (data.derivative[i] - tangential) / (-ni(i, 0, 0) / norm);
    }
    rep.initial_velocity = w0;

    // Taylor start: v^1 = v^0 + dt w0 + dt^2/2 a0 with a0 from the equation on the first leaf.
    std::vector<double> vt1(L, 0.0);
    {
        const LeafBox& box1 = domain.leaves[1];
        for (std::size_t i = 0; i < L; ++i) {
            const MultiIndex idx = grid.unravel(i);
            if (!box1.contains(idx, n)) continue;
            const std::size_t p = i;
            double r = G[p] - spatial_part(v.data(), p, i) - B(p, 0) * w0[i];
            for (int k = 1; k < n; ++k) r -= 2.0 * A(p, 0, k) * d1(w0.data(), i, k);
            const double a0 = r / A(p, 0, 0);
            v[L + i] = v[i] + dt * w0[i] + 0.5 * dt * dt * a0;
            vt1[i] = w0[i] + dt * a0;
        }
    }

    std::vector<double> vt_comb(L, 0.0);
    for (std::size_t s = 1; s + 1 < nt; ++s) {
        const double* vn = v.data() + s * L;
        const double* vm = v.data() + (s - 1) * L;
        double* vp = v.data() + (s + 1) * L;
        const double* vt;
        if (s == 1) {
            vt = vt1.data();
        } else {
            const double* vmm = v.data() + (s - 2) * L;
            for (std::size_t i = 0; i < L; ++i) vt_comb[i] = (3.0 * vn[i] - 4.0 * vm[i] + vmm[i]) / (2.0 * dt);
            vt = vt_comb.data();
        }
        const LeafBox& next = domain.leaves[s + 1];
        parallel_for(L, [&](std::size_t begin, std::size_t end) {
            for (std::size_t i = begin; i < end; ++i) {
                const MultiIndex idx = grid.unravel(i);
                if (!next.contains(idx, n)) continue;
                const std::size_t p = s * L + i;
                double r = G[p] - spatial_part(vn, p, i);
                for (int k = 1; k < n; ++k) r -= 2.0 * A(p, 0, k) * d1(vt, i, k);
                const double a00 = A(p, 0, 0) / (dt * dt);
                const double b0 = B(p, 0) / (2.0 * dt);
                vp[i] = (r + a00 * (2.0 * vn[i] - vm[i]) + b0 * vm[i]) / (a00 + b0);
            }
        });
    }

    rep.trace = energy(rep.v, domain, options.weight, &rep.g, &rep.initial_velocity);
    rep.c_emp = rep.trace.constant();
    return rep;
}

LinearSolveReport solve_linear(const GraphSurface& u, const ScalarField& f, const CauchyData& data,
                               const FoliatedDomain& domain, const LinearSolveOptions& options) {
    require_same_grid(u.grid(), domain.grid, "surface");
    return solve_wave(assemble_problem(u, f, options.form, options.tol, &domain), data, domain, options);
}

EnergyTrace energy(const ScalarField& v, const FoliatedDomain& domain, double a, const ScalarField* source,
                   const std::vector<double>* initial_velocity) {
    const GridSpec& g = domain.grid;
    require_same_grid(v.grid(), g, "energy field");
    const int n = g.dim;
    const std::size_t L = g.leaf_size();
    const std::size_t nt = g.points[0];
    double cell = 1.0;
    for (int k = 1; k < n; ++k) cell *= g.spacing[k];

    // Masked derivative along `axis` (stride s, spacing hh) at flat index p.
    auto masked = [&](std::size_t p, int axis) {
        const std::size_t s = g.stride(axis);
        const double hh = g.spacing[axis];
        const std::size_t idx = (p / s) % g.points[axis];
        auto in = [&](long off) {
            const long j = static_cast<long>(idx) + off;
            if (j < 0 || j >= static_cast<long>(g.points[axis])) return false;
            return domain.contains(static_cast<std::size_t>(static_cast<long>(p) + off * static_cast<long>(s)));
        };
        auto at = [&](long off) { return v[static_cast<std::size_t>(static_cast<long>(p) + off * static_cast<long>(s))]; };
        if (in(-1) && in(1)) return (at(1) - at(-1)) / (2.0 * hh);
        if (in(-1) && in(-2)) return (3.0 * at(0) - 4.0 * at(-1) + at(-2)) / (2.0 * hh);
        if (in(1) && in(2)) return (-3.0 * at(0) + 4.0 * at(1) - at(2)) / (2.0 * hh);
        if (in(-1)) return (at(0) - at(-1)) / hh;
        if (in(1)) return (at(1) - at(0)) / hh;
        return 0.0;
    };

    EnergyTrace t;
    t.a = a;
    t.times.resize(nt);
    t.leaf_energy.assign(nt, 0.0);
    for (std::size_t s = 0; s < nt; ++s) {
        const double time = static_cast<double>(s) / static_cast<double>(nt - 1);
        t.times[s] = time;
        double e = 0.0;
        for (std::size_t i = 0; i < L; ++i) {
            const std::size_t p = s * L + i;
            if (!domain.contains(p)) continue;
            double vt = (s == 0 && initial_velocity) ? (*initial_velocity)[i] : masked(p, 0);
            double sum = vt * vt;
            for (int k = 1; k < n; ++k) {
                const double d = masked(p, k);
                sum += d * d;
            }
            e += sum;
        }
        t.leaf_energy[s] = std::exp(-a * time) * e * cell;
    }
    t.initial = t.leaf_energy[0];
    if (source) {
        double sum = 0.0;
        for (std::size_t p = 0; p < g.size(); ++p) {
            if (!domain.contains(p)) continue;
            const double gp = (*source)[p];
            sum += std::exp(-a * domain.temporal_value(p)) * gp * gp;
        }
        t.source = sum * cell * g.spacing[0];
    }
    return t;
}

std::optional<double> EnergyEstimateReport::constant_at(double a) const {
    for (std::size_t i = 0; i < weights.size(); ++i)
        if (weights[i] == a) return constants[i];
    return std::nullopt;
}

nlohmann::json EnergyEstimateReport::to_json() const {
    nlohmann::json j;
    j["weights"] = weights;
    j["constants"] = constants;
    j["stable"] = stable();
    j["stabilized_weight"] = stabilized_weight ? nlohmann::json(*stabilized_weight) : nlohmann::json(nullptr);
    return j;
}

EnergyEstimateReport verify_energy_estimate(const LinearSolveReport& report, const std::vector<double>& weights) {
    EnergyEstimateReport r;
    r.weights = weights;
    for (double a : weights) {
        if (!(a > 0.0)) throw Error(ErrorKind::InvalidArgument, "energy weights must be positive");
        r.constants.push_back(energy(report.v, report.domain, a, &report.g, &report.initial_velocity).constant());
    }
    for (std::size_t i = 0; i < weights.size() && !r.stabilized_weight; ++i) {
        for (std::size_t j = 0; j < weights.size(); ++j) {
            if (weights[j] != 2.0 * weights[i]) continue;
            const double c1 = r.constants[i], c2 = r.constants[j];
            const bool stable = (c1 == 0.0 && c2 == 0.0) || (c1 > 0.0 && std::abs(c2 - c1) / c1 < 0.1);
            if (stable) r.stabilized_weight = weights[i];
            break;
        }
    }
    return r;
}

std::vector<double> dyadic_weights(double lo, double hi) {
    std::vector<double> w;
    for (double a = lo; a <= hi * (1 + 1e-12); a *= 2.0) w.push_back(a);
    return w;
}

}  // namespace negcurv
