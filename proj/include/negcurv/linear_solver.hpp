#pragma once

#include <optional>
#include <vector>

#include <json.hpp>

#include "negcurv/foliation.hpp"
#include "negcurv/geometry.hpp"
#include "negcurv/surface.hpp"

namespace negcurv {

/// Which coefficient form of the linearized equation the leapfrog integrates.
/// Geometric: box_g v = f F for n >= 3, (box_m + b.d) v = F / psi for n = 2.
/// Linearized: m^-1 : D^2 v - (n+2) Du.Dv / (1+|Du|^2) = F / psi, which is the
/// exact derivative of the discrete curvature operator.
/// GeometricAdjoint: the formal adjoint of the n = 2 geometric operator.
enum class OperatorForm { Geometric, Linearized, GeometricAdjoint };

/// Initial data on the first leaf, one entry per point of that grid slice.
struct CauchyData {
    std::vector<double> value;
    /// Derivative along the unit normal, or plain d/dt when `time_derivative` is set.
    std::vector<double> derivative;
    bool time_derivative = false;

    static CauchyData zero(const GridSpec& grid);
    template <typename F1, typename F2>
    static CauchyData from_functions(const GridSpec& grid, F1&& value, F2&& derivative) {
        CauchyData d = zero(grid);
        for (std::size_t i = 0; i < d.value.size(); ++i) {
            const Point x = grid.position(i);
            d.value[i] = value(x);
            d.derivative[i] = derivative(x);
        }
        return d;
    }
};

/// A^ij d_ij v + B^j d_j v + C v = G with axis 0 as time. `normal_inverse`
/// is the inverse of the metric whose unit normal carries the Cauchy data.
struct WaveProblem {
    SymmetricMatrixField a;
    VectorField b;
    ScalarField c;
    ScalarField g;
    SymmetricMatrixField normal_inverse;
};

/// With a domain, the Linearized form checks and fills coefficients only at
/// domain points; points outside get inert Minkowski coefficients.
WaveProblem assemble_problem(const GraphSurface& u, const ScalarField& f, OperatorForm form,
                             const GeometryTolerances& tol = {}, const FoliatedDomain* domain = nullptr);
/// Problem in the reversed time variable s = t_end - t, on the same grid.
WaveProblem time_reversed(const WaveProblem& p);
/// Values mirrored along axis 0.
ScalarField time_reversed(const ScalarField& f);

struct EnergyTrace {
    double a = 0.0;
    std::vector<double> times;
    std::vector<double> leaf_energy;
    double source = 0.0;
    double initial = 0.0;

    /// sup_t E_a(t) / (S + E_0), zero when both sides vanish.
    double constant() const;
    nlohmann::json to_json() const;
};

struct LinearSolveOptions {
    OperatorForm form = OperatorForm::Geometric;
    double cfl_limit = 1.0;
    double weight = 1.0;
    GeometryTolerances tol;
};

struct LinearSolveReport {
    ScalarField v;
    ScalarField g;
    /// d/dt v on the first leaf as used by the Taylor start.
    std::vector<double> initial_velocity;
    FoliatedDomain domain;
    EnergyTrace trace;
    double c_emp = 0.0;
    double cfl_ratio = 0.0;
};

/// Discrete CFL number of the leapfrog for the given principal part over the domain.
double cfl_ratio(const SymmetricMatrixField& a, const FoliatedDomain& domain);

/// Grid on [t0, t0 + duration] x box whose time step is `safety` times the
/// explicit stability limit for characteristic speed `speed`.
GridSpec cfl_grid(double t0, double duration, const std::vector<double>& lo, const std::vector<double>& hi,
                  std::size_t spatial_points, double speed = 1.0, double safety = 0.9);

LinearSolveReport solve_wave(const WaveProblem& problem, const CauchyData& data, const FoliatedDomain& domain,
                             const LinearSolveOptions& options = {});
LinearSolveReport solve_linear(const GraphSurface& u, const ScalarField& f, const CauchyData& data,
                               const FoliatedDomain& domain, const LinearSolveOptions& options = {});

/// Weighted first-order energy per leaf with masked one-sided differences at the
/// edges of the domain. `source` and `initial_velocity` are optional.
EnergyTrace energy(const ScalarField& v, const FoliatedDomain& domain, double a, const ScalarField* source = nullptr,
                   const std::vector<double>* initial_velocity = nullptr);

struct EnergyEstimateReport {
    std::vector<double> weights;
    std::vector<double> constants;
    std::optional<double> stabilized_weight;

    bool stable() const { return stabilized_weight.has_value(); }
    std::optional<double> constant_at(double a) const;
    nlohmann::json to_json() const;
};

/// C_emp(a) over the given weights; stabilized at the smallest a whose constant
/// changes by less than 10% when a is doubled.
EnergyEstimateReport verify_energy_estimate(const LinearSolveReport& report, const std::vector<double>& weights);

std::vector<double> dyadic_weights(double lo = 1.0, double hi = 256.0);

}  // namespace negcurv
