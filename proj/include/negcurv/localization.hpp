#pragma once

#include <optional>
#include <vector>

#include <json.hpp>

#include "negcurv/foliation.hpp"
#include "negcurv/linear_solver.hpp"

namespace negcurv {

struct PairingResult {
    double value = 0.0;
    /// ||w|| ||weight * eta|| in L^2 over the domain, Euclidean measure.
    double normalization = 0.0;
    double relative = 0.0;

    nlohmann::json to_json() const;
};

/// Throws SupportTouchesBoundary unless every nonzero point of eta lies at least
/// `margin` cells inside the domain, including from the first and last leaf.
void check_interior_support(const ScalarField& eta, const FoliatedDomain& domain, long margin = 2);

/// Sum over the domain of w f eta sqrt|det g| dV for n >= 3. For n = 2 the weight
/// is eta / psi with sqrt|det D^2 u|, the pairing under which kernel samples of
/// the adjoint form are orthogonal to the range of L.
PairingResult pairing(const ScalarField& w, const ScalarField& eta, const GraphSurface& u,
                      const FoliatedDomain& domain);

/// Homogeneous solution of the geometric wave equation (its adjoint form for n = 2).
ScalarField kernel_sample(const GraphSurface& u, const FoliatedDomain& domain, const CauchyData& data);
/// Homogeneous problem shared by every kernel sample on one surface.
WaveProblem kernel_problem(const GraphSurface& u);

/// Fixed family of Cauchy data: four leaf bumps times four low-degree
/// polynomials, each used once as value and once as normal derivative.
std::vector<CauchyData> kernel_family(const GridSpec& grid);

/// L_u phi with finite differences (linearized), or psi(u + eps phi) - psi(u).
ScalarField tautological_eta(const GraphSurface& u, const ScalarField& phi, double eps, bool linearized,
                             const FoliatedDomain& domain);

struct LocalizationReport {
    ScalarField v;
    Mask support;
    Mask future;
    Mask past;
    double norm = 0.0;
    /// Relative L^2 mass of v outside the dilated future of supp(eta).
    double outside_future = 0.0;
    /// Outside the dilated past of supp(eta).
    double outside_past = 0.0;
    /// Outside the dilated future intersected with the dilated past.
    double outside_diamond = 0.0;
    bool forward_ok = false;
    bool diamond_asserted = false;
    bool diamond_ok = true;

    nlohmann::json to_json() const;
};

/// Solves L_u v = eta with zero data on the first leaf and measures where v lives.
/// The diamond bound is asserted only when `orthogonal` is set.
LocalizationReport check_support_localization(const ScalarField& eta, const GraphSurface& u,
                                              const FoliatedDomain& domain, double tol, bool orthogonal);

struct KernelScan {
    std::vector<PairingResult> samples;
    double max_relative = 0.0;

    bool orthogonal(double tol) const { return max_relative <= tol; }
    nlohmann::json to_json() const;
};

KernelScan scan_kernel(const ScalarField& eta, const GraphSurface& u, const FoliatedDomain& domain);

}  // namespace negcurv
