#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "negcurv/foliation.hpp"
#include "negcurv/linear_solver.hpp"

namespace negcurv {

/// Corrections are convolved along each leaf with a normalized compact bump of
/// widths[k] (physical units) at iteration k; the last width repeats. Empty means off.
struct Smoothing {
    std::vector<double> widths;

    bool enabled() const { return !widths.empty(); }
    double width_at(std::size_t iteration) const;
};

struct NonlinearProblem {
    GraphSurface base;
    ScalarField eta;
    FoliatedDomain domain;
    double tol = 1e-10;
    int max_iterations = 10;
    Smoothing smoothing;
    /// Bound on sup|eta|; defaults to 0.1 min|K_S| over the domain.
    std::optional<double> admissibility_bound;
    LinearSolveOptions linear{OperatorForm::Linearized, 1.0, 1.0, {}};
};

struct IterationReport {
    std::vector<double> residuals;
    std::vector<double> corrections;
    std::vector<bool> signature_preserved;
    bool converged = false;
    ScalarField u;

    std::size_t iterations() const { return corrections.size(); }
    /// Largest r_{k+1} / r_k^2 over the recorded iterations.
    double quadratic_constant() const;
    nlohmann::json to_json() const;
};

/// Points whose full 3^n neighbourhood lies in the domain, first and last leaf
/// excluded. The Newton equation is enforced exactly there.
Mask residual_mask(const FoliatedDomain& domain);

/// psi(u) - K_target pointwise.
ScalarField residual(const GraphSurface& u, const ScalarField& k_target);

double masked_sup(const ScalarField& f, const Mask& mask);

/// Curvature of the base surface under the same finite-difference discretization as the iterates.
ScalarField base_curvature(const GraphSurface& base);

double default_admissibility_bound(const ScalarField& k_base, const FoliatedDomain& domain);

/// Leafwise convolution of a correction with a normalized (1 - s^2)^6 bump of
/// the given radius. The first three leaves are left as they are so the
/// one-sided normal derivative on the first leaf is unchanged.
ScalarField mollify_correction(const ScalarField& v, const FoliatedDomain& domain, double width);

/// Linear extrapolation of a correction beyond each leaf box, axis by axis, so
/// iterates have no kink at the rim of the domain. Values inside are unchanged.
ScalarField extend_correction(const ScalarField& v, const FoliatedDomain& domain);

struct NewtonStep {
    ScalarField u;
    ScalarField correction;
};

NewtonStep newton_step(const ScalarField& u, const ScalarField& k_target, const FoliatedDomain& domain,
                       const LinearSolveOptions& options = {OperatorForm::Linearized, 1.0, 1.0, {}}, double smoothing_width = 0.0);

IterationReport solve_nonlinear(const NonlinearProblem& problem);

}  // namespace negcurv
