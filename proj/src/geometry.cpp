#include "negcurv/geometry.hpp"

#include <cmath>
#include <string>

#include "negcurv/errors.hpp"
#include "negcurv/parallel.hpp"

namespace negcurv {

std::string_view to_string(Signature s) {
    switch (s) {
        case Signature::Riemannian: return "Riemannian";
        case Signature::Lorentzian: return "Lorentzian";
        case Signature::Degenerate: return "Degenerate";
        case Signature::OtherIndefinite: return "OtherIndefinite";
    }
    return "Unknown";
}

namespace {

void require_points(const GridSpec& g, std::size_t need, const char* what) {
    for (int a = 0; a < g.dim; ++a)
        if (g.points[a] < need)
            throw Error(ErrorKind::GridTooSmall, std::string(what) + " needs at least " + std::to_string(need) +
                                                     " points per axis");
}

template <typename Body>
void for_each_point(std::size_t count, Body&& body) {
    parallel_for(count, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) body(i);
    });
}

}  // namespace

ScalarField diff(const ScalarField& f, int axis) {
    const GridSpec& g = f.grid();
    require_points(g, 3, "first derivative");
    ScalarField out(g);
    const std::size_t s = g.stride(axis);
    const std::size_t n = g.points[axis];
    const double inv = 1.0 / (2.0 * g.spacing[axis]);
    for_each_point(g.size(), [&](std::size_t p) {
        const std::size_t i = (p / s) % n;
        if (i == 0)
            out[p] = (-3.0 * f[p] + 4.0 * f[p + s] - f[p + 2 * s]) * inv;
        else if (i == n - 1)
            out[p] = (3.0 * f[p] - 4.0 * f[p - s] + f[p - 2 * s]) * inv;
        else
            out[p] = (f[p + s] - f[p - s]) * inv;
    });
    return out;
}

ScalarField diff2(const ScalarField& f, int axis) {
    const GridSpec& g = f.grid();
    require_points(g, 4, "second derivative");
    ScalarField out(g);
    const std::size_t s = g.stride(axis);
    const std::size_t n = g.points[axis];
    const double inv = 1.0 / (g.spacing[axis] * g.spacing[axis]);
    for_each_point(g.size(), [&](std::size_t p) {
        const std::size_t i = (p / s) % n;
        if (i == 0)
            out[p] = (2.0 * f[p] - 5.0 * f[p + s] + 4.0 * f[p + 2 * s] - f[p + 3 * s]) * inv;
        else if (i == n - 1)
            out[p] = (2.0 * f[p] - 5.0 * f[p - s] + 4.0 * f[p - 2 * s] - f[p - 3 * s]) * inv;
        else
            out[p] = (f[p + s] - 2.0 * f[p] + f[p - s]) * inv;
    });
    return out;
}

VectorField gradient(const ScalarField& f) {
    const GridSpec& g = f.grid();
    VectorField out(g);
    for (int k = 0; k < g.dim; ++k) {
        const ScalarField d = diff(f, k);
        for (std::size_t p = 0; p < g.size(); ++p) out(p, k) = d[p];
    }
    return out;
}

SymmetricMatrixField hessian(const ScalarField& f) {
    const GridSpec& g = f.grid();
    require_points(g, 4, "Hessian");
    SymmetricMatrixField out(g);
    for (int i = 0; i < g.dim; ++i) {
        const ScalarField dii = diff2(f, i);
        for (std::size_t p = 0; p < g.size(); ++p) out(p, i, i) = dii[p];
        const ScalarField di = diff(f, i);
        for (int j = i + 1; j < g.dim; ++j) {
            const ScalarField dij = diff(di, j);
            for (std::size_t p = 0; p < g.size(); ++p) out(p, i, j) = dij[p];
        }
    }
    return out;
}

VectorField gradient(const GraphSurface& s) {
    if (!s.catalog()) return gradient(s.u());
    const GridSpec& g = s.grid();
    VectorField out(g);
    for_each_point(g.size(), [&](std::size_t p) { out.set(p, s.catalog()->jet(g.position(p), 1).gradient); });
    return out;
}

SymmetricMatrixField hessian(const GraphSurface& s) {
    if (!s.catalog()) return hessian(s.u());
    const GridSpec& g = s.grid();
    SymmetricMatrixField out(g);
    for_each_point(g.size(), [&](std::size_t p) { store(out, p, s.catalog()->jet(g.position(p), 2).hessian); });
    return out;
}

namespace {

ScalarField component(const SymmetricMatrixField& m, int i, int j) {
    ScalarField out(m.grid());
    for (std::size_t p = 0; p < out.size(); ++p) out[p] = m(p, i, j);
    return out;
}

}  // namespace

std::vector<SymmetricMatrixField> hessian_derivatives(const GraphSurface& s) {
    const GridSpec& g = s.grid();
    const int n = g.dim;
    std::vector<SymmetricMatrixField> out(n, SymmetricMatrixField(g));
    if (s.catalog()) {
        for_each_point(g.size(), [&](std::size_t p) {
            const Jet jet = s.catalog()->jet(g.position(p));
            for (int k = 0; k < n; ++k)
                for (int i = 0; i < n; ++i)
                    for (int j = i; j < n; ++j) out[k](p, i, j) = jet.d3(k, i, j);
        });
        return out;
    }
    const SymmetricMatrixField h = hessian(s.u());
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
            const ScalarField hij = component(h, i, j);
            for (int k = 0; k < n; ++k) {
                const ScalarField d = diff(hij, k);
                for (std::size_t p = 0; p < g.size(); ++p) out[k](p, i, j) = d[p];
            }
        }
    return out;
}

Signature classify(const SmallMatrix& m, double tau_eig) {
    if (!(tau_eig > 0.0)) throw Error(ErrorKind::InvalidArgument, "eigenvalue tolerance must be positive");
    const auto ev = m.symmetric_eigenvalues();
    int neg = 0, pos = 0;
    for (int i = 0; i < m.n; ++i) {
        if (std::abs(ev[i]) <= tau_eig) return Signature::Degenerate;
        if (ev[i] < 0.0)
            ++neg;
        else
            ++pos;
    }
    if (neg == 0) return Signature::Riemannian;
    if (neg == 1) return Signature::Lorentzian;
    return Signature::OtherIndefinite;
}

std::vector<Signature> classify_signature(const SymmetricMatrixField& h, double tau_eig) {
    std::vector<Signature> out(h.grid().size());
    for_each_point(out.size(), [&](std::size_t p) { out[p] = classify(load(h, p), tau_eig); });
    return out;
}

ScalarField psi(const GraphSurface& s) {
    const GridSpec& g = s.grid();
    const int n = g.dim;
    const VectorField du = gradient(s);
    const SymmetricMatrixField h = hessian(s);
    ScalarField out(g);
    for_each_point(g.size(), [&](std::size_t p) {
        const Point d = du.at(p);
        const double q = 1.0 + dot(d, d, n);
        out[p] = load(h, p).determinant() / std::pow(q, 0.5 * (n + 2));
    });
    return out;
}

namespace {

SmallMatrix checked_inverse(const SmallMatrix& m, double tau_det, ErrorKind kind, std::size_t p) {
    const double det = m.determinant();
    if (!(std::abs(det) >= tau_det))
        throw Error(kind, "determinant " + std::to_string(det) + " below floor at point " + std::to_string(p));
    return m.inverse();
}

void require_lorentzian(const SmallMatrix& m, double tau_eig, std::size_t p) {
    if (classify(m, tau_eig) != Signature::Lorentzian)
        throw Error(ErrorKind::NotLorentzian, "Hessian is not Lorentzian at point " + std::to_string(p));
}

}  // namespace

ScalarField apply_second_order(const SymmetricMatrixField& a, const VectorField& b, const ScalarField* c,
                               const ScalarField& v) {
    const GridSpec& g = v.grid();
    const int n = g.dim;
    const VectorField dv = gradient(v);
    const SymmetricMatrixField d2v = hessian(v);
    ScalarField out(g);
    for_each_point(g.size(), [&](std::size_t p) {
        double r = 0.0;
        for (int i = 0; i < n; ++i) {
            r += a(p, i, i) * d2v(p, i, i) + b(p, i) * dv(p, i);
            for (int j = i + 1; j < n; ++j) r += 2.0 * a(p, i, j) * d2v(p, i, j);
        }
        if (c) r += (*c)[p] * v[p];
        out[p] = r;
    });
    return out;
}

ScalarField apply_linearized(const GraphSurface& s, const ScalarField& v, const GeometryTolerances& tol) {
    const GridSpec& g = s.grid();
    if (!(v.grid() == g)) throw Error(ErrorKind::InvalidArgument, "v and u live on different grids");
    const int n = g.dim;
    const VectorField du = gradient(s);
    const SymmetricMatrixField h = hessian(s);
    SymmetricMatrixField a(g);
    VectorField b(g);
    ScalarField scale(g);
    for (std::size_t p = 0; p < g.size(); ++p) {
        const SmallMatrix m = load(h, p);
        const SmallMatrix inv = checked_inverse(m, tol.tau_det, ErrorKind::SingularHessian, p);
        const Point d = du.at(p);
        const double q = 1.0 + dot(d, d, n);
        store(a, p, inv);
        for (int k = 0; k < n; ++k) b(p, k) = -(n + 2) * d[k] / q;
        scale[p] = m.determinant() / std::pow(q, 0.5 * (n + 2));
    }
    ScalarField out = apply_second_order(a, b, nullptr, v);
    for (std::size_t p = 0; p < g.size(); ++p) out[p] *= scale[p];
    return out;
}

SymmetricMatrixField lorentzian_metric(const GraphSurface& s, const GeometryTolerances& tol) {
    const GridSpec& g = s.grid();
    const int n = g.dim;
    if (n < 3) throw Error(ErrorKind::DimensionError, "the conformal metric needs n >= 3; use the n = 2 coefficients");
    const VectorField du = gradient(s);
    const SymmetricMatrixField h = hessian(s);
    SymmetricMatrixField out(g);
    for (std::size_t p = 0; p < g.size(); ++p) {
        const SmallMatrix m = load(h, p);
        checked_inverse(m, tol.tau_det, ErrorKind::SingularHessian, p);
        require_lorentzian(m, tol.tau_eig, p);
        const Point d = du.at(p);
        const double q = 1.0 + dot(d, d, n);
        const double c = std::pow(std::abs(m.determinant()), 1.0 / (n - 2)) *
                         std::pow(q, -static_cast<double>(n + 2) / (n - 2));
        store(out, p, c * m);
    }
    return out;
}

ScalarField conformal_factor(const GraphSurface& s, const GeometryTolerances& tol) {
    const GridSpec& g = s.grid();
    const int n = g.dim;
    if (n < 3) throw Error(ErrorKind::DimensionError, "the conformal factor needs n >= 3");
    const VectorField du = gradient(s);
    const SymmetricMatrixField h = hessian(s);
    ScalarField out(g);
    for (std::size_t p = 0; p < g.size(); ++p) {
        const SmallMatrix m = load(h, p);
        checked_inverse(m, tol.tau_det, ErrorKind::SingularHessian, p);
        require_lorentzian(m, tol.tau_eig, p);
        const Point d = du.at(p);
        const double q = 1.0 + dot(d, d, n);
        out[p] = -std::pow(std::abs(m.determinant()), -static_cast<double>(n - 1) / (n - 2)) *
                 std::pow(q, 0.5 * n * (n + 2) / (n - 2));
    }
    return out;
}

VectorField first_order_coeffs_n2(const GraphSurface& s, const GeometryTolerances& tol) {
    const GridSpec& g = s.grid();
    if (g.dim != 2) throw Error(ErrorKind::DimensionError, "first-order coefficients are defined for n = 2");
    const VectorField du = gradient(s);
    const SymmetricMatrixField h = hessian(s);
    const std::vector<SymmetricMatrixField> dh = hessian_derivatives(s);
    VectorField out(g);
    for (std::size_t p = 0; p < g.size(); ++p) {
        const SmallMatrix m = load(h, p);
        const SmallMatrix inv = checked_inverse(m, tol.tau_det, ErrorKind::SingularHessian, p);
        const Point d = du.at(p);
        const double q = 1.0 + dot(d, d, 2);
        std::array<double, 2> tr{};
        for (int i = 0; i < 2; ++i) tr[i] = trace_product(inv, load(dh[i], p));
        for (int j = 0; j < 2; ++j) {
            double b = -4.0 * d[j] / q;
            for (int i = 0; i < 2; ++i) b += 0.5 * inv(j, i) * tr[i];
            out(p, j) = b;
        }
    }
    return out;
}

SymmetricMatrixField inverse_field(const SymmetricMatrixField& g, const GeometryTolerances& tol) {
    SymmetricMatrixField out(g.grid());
    for (std::size_t p = 0; p < g.grid().size(); ++p)
        store(out, p, checked_inverse(load(g, p), tol.tau_det, ErrorKind::SingularMetric, p));
    return out;
}

ScalarField volume_density(const SymmetricMatrixField& g, const GeometryTolerances& tol) {
    ScalarField out(g.grid());
    for (std::size_t p = 0; p < out.size(); ++p) {
        const double det = load(g, p).determinant();
        if (!(std::abs(det) >= tol.tau_det))
            throw Error(ErrorKind::SingularMetric, "metric determinant below floor at point " + std::to_string(p));
        out[p] = std::sqrt(std::abs(det));
    }
    return out;
}

VectorField box_first_order(const SymmetricMatrixField& g, const GeometryTolerances& tol) {
    const GridSpec& grid = g.grid();
    const int n = grid.dim;
    const SymmetricMatrixField inv = inverse_field(g, tol);
    const ScalarField w = volume_density(g, tol);
    VectorField out(grid);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            ScalarField aw(grid);
            for (std::size_t p = 0; p < aw.size(); ++p) aw[p] = inv(p, i, j) * w[p];
            const ScalarField d = diff(aw, i);
            for (std::size_t p = 0; p < aw.size(); ++p) out(p, j) += d[p] / w[p];
        }
    return out;
}

ScalarField apply_box(const SymmetricMatrixField& g, const ScalarField& v, const GeometryTolerances& tol) {
    if (!(v.grid() == g.grid())) throw Error(ErrorKind::InvalidArgument, "v and g live on different grids");
    return apply_second_order(inverse_field(g, tol), box_first_order(g, tol), nullptr, v);
}

VectorField cofactor_divergence(const GraphSurface& s) {
    const GridSpec& g = s.grid();
    const int n = g.dim;
    const SymmetricMatrixField h = hessian(s);
    SymmetricMatrixField cof(g);
    for (std::size_t p = 0; p < g.size(); ++p) {
        const SmallMatrix m = load(h, p);
        SmallMatrix c(n);
        // Adjugate via minors keeps this well-defined where m is singular.
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                SmallMatrix minor(n - 1);
                for (int r = 0, rr = 0; r < n; ++r) {
                    if (r == j) continue;
                    for (int col = 0, cc = 0; col < n; ++col) {
                        if (col == i) continue;
                        minor(rr, cc++) = m(r, col);
                    }
                    ++rr;
                }
                c(i, j) = ((i + j) % 2 ? -1.0 : 1.0) * (n == 1 ? 1.0 : minor.determinant());
            }
        store(cof, p, c);
    }
    VectorField out(g);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const ScalarField d = diff(component(cof, i, j), i);
            for (std::size_t p = 0; p < g.size(); ++p) out(p, j) += d[p];
        }
    return out;
}

}  // namespace negcurv
