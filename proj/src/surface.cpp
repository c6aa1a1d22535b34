#include "negcurv/surface.hpp"

#include <cmath>
#include <sstream>

#include "negcurv/errors.hpp"

namespace negcurv {

double BumpFunction::profile(double s, int p, int order) {
    const double q = 1.0 - s * s;
    if (q <= 0.0) return 0.0;
    const auto pw = [q](int e) {
        double r = 1.0;
        for (int i = 0; i < e; ++i) r *= q;
        return r;
    };
    switch (order) {
        case 0: return pw(p);
        case 1: return -2.0 * p * s * pw(p - 1);
        case 2: return -2.0 * p * pw(p - 1) + 4.0 * p * (p - 1) * s * s * pw(p - 2);
        case 3:
            return 12.0 * p * (p - 1) * s * pw(p - 2) - 8.0 * p * (p - 1) * (p - 2) * s * s * s * pw(p - 3);
        default: throw Error(ErrorKind::InvalidArgument, "bump derivatives are available up to order 3");
    }
}

double BumpFunction::operator()(const Point& x) const { return derivative(x, {0, 0, 0, 0}); }

double BumpFunction::derivative(const Point& x, const std::array<int, kMaxDim>& order) const {
    double r = 1.0;
    for (int k = 0; k < dim; ++k) {
        const double s = (x[k] - center[k]) / radius[k];
        r *= profile(s, power, order[k]) / std::pow(radius[k], order[k]);
        if (r == 0.0) return 0.0;
    }
    return r;
}

Jet BumpFunction::jet(const Point& x, int max_order) const {
    Jet j;
    j.hessian = SmallMatrix(dim);
    if (!in_support(x)) return j;
    std::array<std::array<double, 4>, kMaxDim> d{};
    for (int k = 0; k < dim; ++k) {
        const double s = (x[k] - center[k]) / radius[k];
        double scale = 1.0;
        for (int o = 0; o <= max_order; ++o) {
            d[k][o] = profile(s, power, o) / scale;
            scale *= radius[k];
        }
    }
    auto mixed = [&](std::array<int, kMaxDim> ord) {
        double r = 1.0;
        for (int k = 0; k < dim; ++k) r *= d[k][ord[k]];
        return r;
    };
    j.value = mixed({0, 0, 0, 0});
    for (int a = 0; a < dim; ++a) {
        std::array<int, kMaxDim> o{};
        o[a] = 1;
        j.gradient[a] = mixed(o);
        if (max_order < 2) continue;
        for (int b = 0; b < dim; ++b) {
            std::array<int, kMaxDim> o2 = o;
            ++o2[b];
            j.hessian(a, b) = mixed(o2);
            if (max_order < 3) continue;
            for (int c = 0; c < dim; ++c) {
                std::array<int, kMaxDim> o3 = o2;
                ++o3[c];
                j.d3(a, b, c) = mixed(o3);
            }
        }
    }
    return j;
}

bool BumpFunction::in_support(const Point& x) const {
    for (int k = 0; k < dim; ++k)
        if (std::abs(x[k] - center[k]) >= radius[k]) return false;
    return true;
}

CatalogSurface CatalogSurface::hyperbolic_paraboloid(int n) {
    if (n < 2 || n > kMaxDim) throw Error(ErrorKind::DimensionError, "paraboloid dimension outside [2, 4]");
    CatalogSurface s;
    s.kind_ = CatalogKind::HyperbolicParaboloid;
    s.coefficients_.assign(n, 1.0);
    s.coefficients_[0] = -1.0;
    return s;
}

CatalogSurface CatalogSurface::quadratic_form(std::vector<double> diagonal) {
    if (diagonal.size() < 1 || diagonal.size() > kMaxDim)
        throw Error(ErrorKind::DimensionError, "quadratic form dimension outside [1, 4]");
    CatalogSurface s;
    s.kind_ = CatalogKind::QuadraticForm;
    s.coefficients_ = std::move(diagonal);
    return s;
}

CatalogSurface CatalogSurface::perturbed_paraboloid(int n, double epsilon, BumpFunction bump) {
    CatalogSurface s = hyperbolic_paraboloid(n);
    if (bump.dim != n) throw Error(ErrorKind::DimensionError, "bump dimension differs from surface dimension");
    for (int k = 0; k < n; ++k)
        if (!(bump.radius[k] > 0.0)) throw Error(ErrorKind::InvalidArgument, "bump radii must be positive");
    if (bump.power < 4) throw Error(ErrorKind::InvalidArgument, "bump power below 4 lacks three derivatives");
    s.kind_ = CatalogKind::PerturbedParaboloid;
    s.epsilon_ = epsilon;
    s.bump_ = bump;
    return s;
}

double CatalogSurface::value(const Point& x) const {
    double u = 0.0;
    for (int k = 0; k < dim(); ++k) u += 0.5 * coefficients_[k] * x[k] * x[k];
    if (kind_ == CatalogKind::PerturbedParaboloid && epsilon_ != 0.0) u += epsilon_ * bump_(x);
    return u;
}

Jet CatalogSurface::jet(const Point& x, int max_order) const {
    const int n = dim();
    Jet j;
    if (kind_ == CatalogKind::PerturbedParaboloid && epsilon_ != 0.0) {
        j = bump_.jet(x, max_order);
        j.value *= epsilon_;
        for (auto& g : j.gradient) g *= epsilon_;
        j.hessian = epsilon_ * j.hessian;
        for (auto& t : j.third) t *= epsilon_;
    } else {
        j.hessian = SmallMatrix(n);
    }
    for (int k = 0; k < n; ++k) {
        j.value += 0.5 * coefficients_[k] * x[k] * x[k];
        j.gradient[k] += coefficients_[k] * x[k];
        j.hessian(k, k) += coefficients_[k];
    }
    return j;
}

std::string CatalogSurface::id() const {
    std::ostringstream os;
    switch (kind_) {
        case CatalogKind::HyperbolicParaboloid: os << "hyperbolic-paraboloid(n=" << dim() << ")"; break;
        case CatalogKind::QuadraticForm: {
            os << "quadratic-form(";
            for (int k = 0; k < dim(); ++k) os << (k ? "," : "") << coefficients_[k];
            os << ")";
            break;
        }
        case CatalogKind::PerturbedParaboloid:
            os << "perturbed-paraboloid(n=" << dim() << ",eps=" << epsilon_ << ")";
            break;
    }
    return os.str();
}

GraphSurface GraphSurface::analytic(const GridSpec& grid, const CatalogSurface& catalog) {
    if (grid.dim != catalog.dim()) throw Error(ErrorKind::DimensionError, "grid and surface dimensions differ");
    GraphSurface s;
    s.u_ = ScalarField::sample(grid, [&](const Point& p) { return catalog.value(p); });
    s.catalog_ = catalog;
    return s;
}

GraphSurface GraphSurface::finite_difference(ScalarField u) {
    GraphSurface s;
    s.u_ = std::move(u);
    return s;
}

}  // namespace negcurv
