#include "negcurv/grid.hpp"

#include <cmath>
#include <string>

#include "negcurv/errors.hpp"

namespace negcurv {

GridSpec GridSpec::cube(int dim, double lo, double hi, std::size_t points_per_axis) {
    return box(std::vector<double>(dim, lo), std::vector<double>(dim, hi - lo),
               std::vector<std::size_t>(dim, points_per_axis));
}

GridSpec GridSpec::box(std::vector<double> lo, std::vector<double> extent, std::vector<std::size_t> points) {
    GridSpec g;
    g.dim = static_cast<int>(lo.size());
    if (extent.size() != lo.size() || points.size() != lo.size())
        throw Error(ErrorKind::InvalidArgument, "grid axis lists differ in length");
    g.origin = std::move(lo);
    g.points = std::move(points);
    g.spacing.resize(g.dim);
    for (int a = 0; a < g.dim; ++a) {
        if (g.points[a] < 2) throw Error(ErrorKind::GridTooSmall, "need at least 2 points per axis");
        g.spacing[a] = extent[a] / static_cast<double>(g.points[a] - 1);
    }
    g.validate();
    return g;
}

std::size_t GridSpec::size() const {
    std::size_t s = 1;
    for (auto p : points) s *= p;
    return s;
}

std::size_t GridSpec::stride(int axis) const {
    std::size_t s = 1;
    for (int a = dim - 1; a > axis; --a) s *= points[a];
    return s;
}

std::size_t GridSpec::flat(const MultiIndex& idx) const {
    std::size_t f = 0;
    for (int a = 0; a < dim; ++a) f = f * points[a] + idx[a];
    return f;
}

MultiIndex GridSpec::unravel(std::size_t flat) const {
    MultiIndex idx{};
    for (int a = dim - 1; a >= 0; --a) {
        idx[a] = flat % points[a];
        flat /= points[a];
    }
    return idx;
}

Point GridSpec::position(std::size_t flat) const {
    Point p{};
    for (int a = dim - 1; a >= 0; --a) {
        p[a] = coord(a, flat % points[a]);
        flat /= points[a];
    }
    return p;
}

void GridSpec::validate() const {
    if (dim < 1 || dim > kMaxDim)
        throw Error(ErrorKind::DimensionError, "grid dimension " + std::to_string(dim) + " outside [1, " +
                                                   std::to_string(kMaxDim) + "]");
    if (static_cast<int>(origin.size()) != dim || static_cast<int>(spacing.size()) != dim ||
        static_cast<int>(points.size()) != dim)
        throw Error(ErrorKind::InvalidArgument, "grid axis lists differ in length");
    for (int a = 0; a < dim; ++a) {
        if (!(spacing[a] > 0.0) || !std::isfinite(spacing[a]))
            throw Error(ErrorKind::InvalidArgument, "grid spacing must be positive");
        if (points[a] < 2) throw Error(ErrorKind::GridTooSmall, "need at least 2 points per axis");
        if (!std::isfinite(origin[a])) throw Error(ErrorKind::InvalidArgument, "grid origin must be finite");
    }
}

ScalarField::ScalarField(GridSpec grid) : grid_(std::move(grid)), values_(grid_.size(), 0.0) {}

ScalarField::ScalarField(GridSpec grid, std::vector<double> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
    if (values_.size() != grid_.size())
        throw Error(ErrorKind::InvalidArgument, "value count does not match grid point count");
}

bool ScalarField::all_finite() const {
    for (double v : values_)
        if (!std::isfinite(v)) return false;
    return true;
}

VectorField::VectorField(GridSpec grid) : grid_(std::move(grid)), values_(grid_.size() * grid_.dim, 0.0) {}

Point VectorField::at(std::size_t point) const {
    Point p{};
    for (int k = 0; k < grid_.dim; ++k) p[k] = (*this)(point, k);
    return p;
}

void VectorField::set(std::size_t point, const Point& v) {
    for (int k = 0; k < grid_.dim; ++k) (*this)(point, k) = v[k];
}

SymmetricMatrixField::SymmetricMatrixField(GridSpec grid)
    : grid_(std::move(grid)), stride_(packed_size(grid_.dim)), values_(grid_.size() * stride_, 0.0) {}

int SymmetricMatrixField::packed_index(int n, int i, int j) {
    if (i > j) std::swap(i, j);
    return i * n - i * (i - 1) / 2 + (j - i);
}

}  // namespace negcurv
