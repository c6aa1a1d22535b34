#pragma once

#include <cstddef>
#include <vector>

#include <json.hpp>

#include "negcurv/foliation.hpp"
#include "negcurv/grid.hpp"

namespace negcurv {

/// Smooth cut-off: 1 on (-inf, 1], 0 on [2, inf), built from e^{-1/s} transitions.
double cutoff_chi(double x);

/// v on the lattice (i delta, j delta) in double-null coordinates, i along
/// zeta_bar = t + x and j along zeta = t - x.
struct NullGrid {
    double delta = 0.0;
    std::size_t nbar = 0;
    std::size_t nzeta = 0;
    std::vector<double> v;

    double zeta_bar(std::size_t i) const { return delta * static_cast<double>(i); }
    double zeta(std::size_t j) const { return delta * static_cast<double>(j); }
    double operator()(std::size_t i, std::size_t j) const { return v[i * nzeta + j]; }
    double& operator()(std::size_t i, std::size_t j) { return v[i * nzeta + j]; }
    /// Lattice index of a coordinate that should sit on the lattice.
    std::size_t index(double coordinate) const;
    /// Bilinear interpolation; requires 0 <= zb <= Zbar and 0 <= z <= Z.
    double interpolate(double zb, double z) const;
    bool covers(double zb, double z) const;
};

/// Marches the linearized equation around the hyperbolic paraboloid,
/// d_zb d_z v = (z d_zb v + zb d_z v) / (1 + zb^2/2 + z^2/2),
/// with v(0, z) = z chi(z) and v(zb, 0) = 0, cell by cell with the trapezoidal rule.
NullGrid solve_double_null(double delta, double zeta_extent, double zeta_bar_extent);

struct GrowthReport {
    double tol = 0.0;
    bool bound_ok = true;
    bool derivative_bound_ok = true;
    bool signs_ok = true;
    /// min over C of v / (z zb^2 / 3), points with zb, z > 0.
    double min_ratio = 0.0;
    double min_ratio_zeta_bar = 0.0;
    double min_ratio_zeta = 0.0;
    double min_derivative_ratio = 0.0;
    std::size_t points_checked = 0;
    std::size_t violations = 0;
    /// Exploratory: whether v(t, 0) >= t^3 / 3 for every lattice t > 1 along x = 0.
    bool remark_axis_bound = true;
    double remark_min_ratio = 0.0;

    bool ok() const { return bound_ok && derivative_bound_ok && signs_ok; }
    nlohmann::json to_json() const;
};

/// Checks v >= (1 - tol) z zb^2 / 3, d_z v >= (1 - tol) zb^2 / 3 and d_z v, d_zb v >= 0
/// on C = [0,1] in zeta times [0, Zbar] in zeta_bar.
GrowthReport verify_growth_bound(const NullGrid& grid, double tol);

struct TxResample {
    ScalarField v;
    /// Whether (t, x) maps into the null lattice; other values are zero.
    Mask covered;
    std::vector<double> times;
    std::vector<double> sup_abs;

    /// True if sup_x |v(t, .)| strictly increases over the slices with t in [t0, t1].
    bool strictly_increasing(double t0, double t1) const;
    nlohmann::json to_json() const;
};

/// Resamples onto the (t, x) grid by v(t, x) = v(zb = t + x, z = t - x).
TxResample to_txcoords(const NullGrid& grid, const GridSpec& tx);
/// Square (t, x) grid with the lattice step: t in [0, T], x in [-T, T].
GridSpec tx_grid_for(const NullGrid& grid, double t_max);

struct CrossCheckReport {
    double max_abs_diff = 0.0;
    double max_abs_value = 0.0;
    std::size_t points = 0;

    double relative() const { return max_abs_value > 0.0 ? max_abs_diff / max_abs_value : max_abs_diff; }
    nlohmann::json to_json() const;
};

/// Runs the linear solver on the paraboloid from (v, v_t) of the null solution on the slice
/// t = t0, x in [-t0, t0], forward to t1 <= 2 t0, and compares on the discrete domain.
CrossCheckReport cross_check_linear(const NullGrid& grid, double t0, double t1, std::size_t spatial_points);

}  // namespace negcurv
