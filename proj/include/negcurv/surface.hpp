#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "negcurv/grid.hpp"
#include "negcurv/linalg.hpp"

namespace negcurv {

/// Value and derivatives up to third order of a scalar function at a point.
struct Jet {
    double value = 0.0;
    Point gradient{};
    SmallMatrix hessian;
    std::array<double, kMaxDim * kMaxDim * kMaxDim> third{};

    double d3(int i, int j, int k) const { return third[(i * kMaxDim + j) * kMaxDim + k]; }
    double& d3(int i, int j, int k) { return third[(i * kMaxDim + j) * kMaxDim + k]; }
};

/// Product of one-dimensional profiles (1 - s^2)^p with s = (x_k - c_k) / r_k,
/// supported on the open box |s_k| < 1.
struct BumpFunction {
    int dim = 0;
    Point center{};
    Point radius{};
    int power = 6;

    /// d^order/ds^order of (1 - s^2)^p for order in 0..3; zero outside |s| < 1.
    static double profile(double s, int power, int order);

    double operator()(const Point& x) const;
    /// Mixed partial derivative with the given multi-index order.
    double derivative(const Point& x, const std::array<int, kMaxDim>& order) const;
    /// Derivatives above max_order are left at zero.
    Jet jet(const Point& x, int max_order = 3) const;
    bool in_support(const Point& x) const;
};

enum class CatalogKind { HyperbolicParaboloid, QuadraticForm, PerturbedParaboloid };

/// Closed-form surfaces u(x) = 1/2 sum_k c_k x_k^2 + eps * bump(x).
/// The hyperbolic paraboloid has c = (-1, 1, ..., 1) and no bump.
class CatalogSurface {
public:
    static CatalogSurface hyperbolic_paraboloid(int n);
    static CatalogSurface quadratic_form(std::vector<double> diagonal);
    static CatalogSurface perturbed_paraboloid(int n, double epsilon, BumpFunction bump);

    CatalogKind kind() const { return kind_; }
    int dim() const { return static_cast<int>(coefficients_.size()); }
    const std::vector<double>& coefficients() const { return coefficients_; }
    double epsilon() const { return epsilon_; }
    const BumpFunction& bump() const { return bump_; }

    double value(const Point& x) const;
    Jet jet(const Point& x, int max_order = 3) const;
    std::string id() const;

private:
    CatalogKind kind_ = CatalogKind::QuadraticForm;
    std::vector<double> coefficients_;
    double epsilon_ = 0.0;
    BumpFunction bump_;
};

enum class DerivativeMode { Analytic, FiniteDifference };

/// A graph function sampled on a grid. Analytic surfaces keep their catalog
/// entry so derivatives can be evaluated exactly.
class GraphSurface {
public:
    static GraphSurface analytic(const GridSpec& grid, const CatalogSurface& catalog);
    static GraphSurface finite_difference(ScalarField u);

    const ScalarField& u() const { return u_; }
    const GridSpec& grid() const { return u_.grid(); }
    int dim() const { return u_.grid().dim; }
    DerivativeMode mode() const { return catalog_ ? DerivativeMode::Analytic : DerivativeMode::FiniteDifference; }
    const CatalogSurface* catalog() const { return catalog_ ? &*catalog_ : nullptr; }

private:
    ScalarField u_;
    std::optional<CatalogSurface> catalog_;
};

}  // namespace negcurv
