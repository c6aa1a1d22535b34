#pragma once

#include <array>

#include "negcurv/grid.hpp"

namespace negcurv {

/// Dense n x n matrix with n <= kMaxDim, used for per-point algebra.
struct SmallMatrix {
    int n = 0;
    std::array<double, kMaxDim * kMaxDim> a{};

    SmallMatrix() = default;
    explicit SmallMatrix(int dim) : n(dim) {}

    static SmallMatrix identity(int dim);
    static SmallMatrix diagonal(std::initializer_list<double> d);

    double operator()(int i, int j) const { return a[i * kMaxDim + j]; }
    double& operator()(int i, int j) { return a[i * kMaxDim + j]; }

    double trace() const;
    double determinant() const;
    /// Cofactor formulas for n in {2,3}, LU otherwise. No singularity guard.
    SmallMatrix inverse() const;
    SmallMatrix transposed() const;
    /// Ascending eigenvalues of the symmetric part.
    std::array<double, kMaxDim> symmetric_eigenvalues() const;
};

SmallMatrix operator*(const SmallMatrix& lhs, const SmallMatrix& rhs);
SmallMatrix operator*(double s, const SmallMatrix& m);

/// tr(A B) for square matrices of the same size.
double trace_product(const SmallMatrix& lhs, const SmallMatrix& rhs);
double dot(const Point& x, const Point& y, int n);
double quadratic_form(const SmallMatrix& m, const Point& x);

SmallMatrix load(const SymmetricMatrixField& field, std::size_t point);
void store(SymmetricMatrixField& field, std::size_t point, const SmallMatrix& m);

}  // namespace negcurv
