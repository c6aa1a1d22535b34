#pragma once

#include <string_view>
#include <vector>

#include "negcurv/grid.hpp"
#include "negcurv/linalg.hpp"
#include "negcurv/surface.hpp"

namespace negcurv {

struct GeometryTolerances {
    double tau_det = 1e-10;
    double tau_eig = 1e-8;
};

enum class Signature { Riemannian, Lorentzian, Degenerate, OtherIndefinite };

std::string_view to_string(Signature s);

// Finite differences: second-order central in the interior, second-order
// one-sided at the two ends of every axis.
ScalarField diff(const ScalarField& f, int axis);
ScalarField diff2(const ScalarField& f, int axis);

VectorField gradient(const ScalarField& f);
SymmetricMatrixField hessian(const ScalarField& f);
VectorField gradient(const GraphSurface& s);
SymmetricMatrixField hessian(const GraphSurface& s);
/// Entry i holds the field of partial_i D^2 u.
std::vector<SymmetricMatrixField> hessian_derivatives(const GraphSurface& s);

Signature classify(const SmallMatrix& m, double tau_eig);
std::vector<Signature> classify_signature(const SymmetricMatrixField& h, double tau_eig);

/// det D^2 u / (1 + |Du|^2)^((n+2)/2).
ScalarField psi(const GraphSurface& s);

/// Linearization of psi at u applied to v. Derivatives of v are finite differences.
ScalarField apply_linearized(const GraphSurface& s, const ScalarField& v, const GeometryTolerances& tol = {});

/// Lorentzian metric conformal to D^2 u, n >= 3.
SymmetricMatrixField lorentzian_metric(const GraphSurface& s, const GeometryTolerances& tol = {});
/// Factor f with box_g v = f L_u v, n >= 3. Strictly negative.
ScalarField conformal_factor(const GraphSurface& s, const GeometryTolerances& tol = {});
/// Lower-order coefficients b^j making psi (box_m + b.d) = L_u for n = 2.
VectorField first_order_coeffs_n2(const GraphSurface& s, const GeometryTolerances& tol = {});

/// Pointwise inverse; throws SingularMetric below tau_det.
SymmetricMatrixField inverse_field(const SymmetricMatrixField& g, const GeometryTolerances& tol = {});
/// |det g|^(-1/2) d_i(g^ij |det g|^(1/2)), finite differences on the assembled fields.
VectorField box_first_order(const SymmetricMatrixField& g, const GeometryTolerances& tol = {});
ScalarField apply_box(const SymmetricMatrixField& g, const ScalarField& v, const GeometryTolerances& tol = {});
ScalarField volume_density(const SymmetricMatrixField& g, const GeometryTolerances& tol = {});

/// d_i of the cofactor matrix det(D^2 u) (D^2 u)^(-1), component j.
VectorField cofactor_divergence(const GraphSurface& s);

/// Second-order coefficient contraction A^ij d_ij v + B^j d_j v + C v with
/// finite-difference derivatives of v; shared by the operators above.
ScalarField apply_second_order(const SymmetricMatrixField& a, const VectorField& b, const ScalarField* c,
                               const ScalarField& v);

}  // namespace negcurv
