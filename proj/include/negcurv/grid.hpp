#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

namespace negcurv {

/// Largest ambient dimension n the pointwise kernels are compiled for.
inline constexpr int kMaxDim = 4;

using Point = std::array<double, kMaxDim>;
using MultiIndex = std::array<std::size_t, kMaxDim>;

/// Tensor-product Cartesian grid. Axis 0 is the slowest-varying index and is
/// the time axis for every evolution problem.
///
/// Spacing is stored per axis: evolution grids use a time step that is a
/// CFL fraction of the spatial spacing, all other grids are uniform.
struct GridSpec {
    int dim = 0;
    std::vector<double> origin;
    std::vector<double> spacing;
    std::vector<std::size_t> points;

    /// Uniform grid with `points_per_axis` points on [lo, hi] in every axis.
    static GridSpec cube(int dim, double lo, double hi, std::size_t points_per_axis);
    /// Grid from per-axis lower corners, extents and point counts.
    static GridSpec box(std::vector<double> lo, std::vector<double> extent,
                        std::vector<std::size_t> points);

    std::size_t size() const;
    std::size_t stride(int axis) const;
    double extent(int axis) const { return spacing[axis] * static_cast<double>(points[axis] - 1); }
    double coord(int axis, std::size_t i) const { return origin[axis] + spacing[axis] * static_cast<double>(i); }

    std::size_t flat(const MultiIndex& idx) const;
    MultiIndex unravel(std::size_t flat) const;
    Point position(std::size_t flat) const;

    /// Number of points on one slice of constant axis-0 index.
    std::size_t leaf_size() const { return size() / points[0]; }

    /// Throws InvalidArgument unless the invariants hold.
    void validate() const;

    bool operator==(const GridSpec&) const = default;
};

class ScalarField {
public:
    ScalarField() = default;
    explicit ScalarField(GridSpec grid);
    ScalarField(GridSpec grid, std::vector<double> values);

    template <typename F>
    static ScalarField sample(const GridSpec& grid, F&& fn) {
        ScalarField out(grid);
        for (std::size_t i = 0; i < out.values_.size(); ++i) out.values_[i] = fn(grid.position(i));
        return out;
    }

    const GridSpec& grid() const { return grid_; }
    std::span<const double> values() const { return values_; }
    std::span<double> values() { return values_; }
    double operator[](std::size_t i) const { return values_[i]; }
    double& operator[](std::size_t i) { return values_[i]; }
    std::size_t size() const { return values_.size(); }

    bool all_finite() const;

private:
    GridSpec grid_;
    std::vector<double> values_;
};

/// n components per grid point, stored contiguously per point.
class VectorField {
public:
    VectorField() = default;
    explicit VectorField(GridSpec grid);

    const GridSpec& grid() const { return grid_; }
    int components() const { return grid_.dim; }
    double operator()(std::size_t point, int comp) const { return values_[point * grid_.dim + comp]; }
    double& operator()(std::size_t point, int comp) { return values_[point * grid_.dim + comp]; }
    Point at(std::size_t point) const;
    void set(std::size_t point, const Point& v);
    std::span<const double> values() const { return values_; }

private:
    GridSpec grid_;
    std::vector<double> values_;
};

/// Symmetric n x n matrix per point, packed upper triangle row by row.
class SymmetricMatrixField {
public:
    SymmetricMatrixField() = default;
    explicit SymmetricMatrixField(GridSpec grid);

    static int packed_size(int n) { return n * (n + 1) / 2; }
    static int packed_index(int n, int i, int j);

    const GridSpec& grid() const { return grid_; }
    int dim() const { return grid_.dim; }
    double operator()(std::size_t point, int i, int j) const {
        return values_[point * stride_ + packed_index(grid_.dim, i, j)];
    }
    double& operator()(std::size_t point, int i, int j) {
        return values_[point * stride_ + packed_index(grid_.dim, i, j)];
    }
    std::span<const double> values() const { return values_; }

private:
    GridSpec grid_;
    int stride_ = 0;
    std::vector<double> values_;
};

}  // namespace negcurv
