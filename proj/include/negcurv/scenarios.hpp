#pragma once

#include <cstddef>

#include "negcurv/localization.hpp"
#include "negcurv/nonlinear_solver.hpp"

namespace negcurv {

/// v* = sin t cos x on the n = 2 paraboloid over [0, 1] x [-2, 2], driven by F = L v*.
struct ManufacturedLinear {
    GraphSurface u;
    ScalarField f;
    CauchyData data;
    FoliatedDomain domain;

    static double exact(const Point& x);
    /// Max error over the domain.
    double error(const ScalarField& v) const;
};

ManufacturedLinear manufactured_linear(std::size_t spatial_points);

/// u* = u_S + eps bump on the n = 2 paraboloid over [0, 1] x [-2, 2]. The bump
/// vanishes on the first leaves; eta = psi(u*) - psi(u_S) in closed form.
struct ManufacturedNewton {
    GraphSurface base;
    GraphSurface star;
    FoliatedDomain domain;
    ScalarField eta;

    NonlinearProblem problem() const;
    /// Max |u - u*| over the domain.
    double error(const ScalarField& u) const;
};

BumpFunction newton_bump();
ManufacturedNewton manufactured_newton(std::size_t spatial_points, double eps = 0.01);

/// Paraboloid slab [0, 0.5] x [-1.25, 1.25]^(n-1) with h = 1/per_unit and an
/// interior bump phi centred at t = 0.25, clear of the first-leaf stencils.
struct LocalizationScenario {
    GraphSurface u;
    FoliatedDomain domain;
    ScalarField phi;
    double h = 0.0;
};

LocalizationScenario localization_scenario(int n, int per_unit);

/// F = 0 with Cauchy value data on a blob of 4 cells per spatial axis at the
/// centre of the first leaf, on the paraboloid over [0, 1] x [-2, 2] (n = 2)
/// or [0, 0.5] x [-1, 1]^2 (n = 3).
struct FiniteSpeedReport {
    LinearSolveReport solve;
    Mask cone;
    /// sum |v| outside the dilated forward cone over sum |v| on the domain.
    double outside_relative = 0.0;
    double outside_max = 0.0;

    nlohmann::json to_json() const;
};

FiniteSpeedReport finite_speed_check(int n, std::size_t spatial_points);

}  // namespace negcurv
