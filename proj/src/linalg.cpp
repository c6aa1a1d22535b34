#include "negcurv/linalg.hpp"

#include <Eigen/Dense>

#include "negcurv/grid.hpp"

namespace negcurv {

namespace {
using MapMat = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>, 0,
                          Eigen::OuterStride<>>;

// Stack storage with a compile-time bound avoids a heap allocation per point.
using Bounded = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxDim, kMaxDim>;

MapMat as_eigen(const SmallMatrix& m) { return MapMat(m.a.data(), m.n, m.n, Eigen::OuterStride<>(kMaxDim)); }
}  // namespace

SmallMatrix SmallMatrix::identity(int dim) {
    SmallMatrix m(dim);
    for (int i = 0; i < dim; ++i) m(i, i) = 1.0;
    return m;
}

SmallMatrix SmallMatrix::diagonal(std::initializer_list<double> d) {
    SmallMatrix m(static_cast<int>(d.size()));
    int i = 0;
    for (double x : d) {
        m(i, i) = x;
        ++i;
    }
    return m;
}

double SmallMatrix::trace() const {
    double t = 0.0;
    for (int i = 0; i < n; ++i) t += (*this)(i, i);
    return t;
}

double SmallMatrix::determinant() const {
    const auto& m = *this;
    switch (n) {
        case 1: return m(0, 0);
        case 2: return m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
        case 3:
            return m(0, 0) * (m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1)) -
                   m(0, 1) * (m(1, 0) * m(2, 2) - m(1, 2) * m(2, 0)) +
                   m(0, 2) * (m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0));
        default: return Bounded(as_eigen(m)).determinant();
    }
}

SmallMatrix SmallMatrix::inverse() const {
    const auto& m = *this;
    SmallMatrix r(n);
    switch (n) {
        case 1: r(0, 0) = 1.0 / m(0, 0); return r;
        case 2: {
            const double d = determinant();
            r(0, 0) = m(1, 1) / d;
            r(0, 1) = -m(0, 1) / d;
            r(1, 0) = -m(1, 0) / d;
            r(1, 1) = m(0, 0) / d;
            return r;
        }
        case 3: {
            const double d = determinant();
            r(0, 0) = (m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1)) / d;
            r(0, 1) = (m(0, 2) * m(2, 1) - m(0, 1) * m(2, 2)) / d;
            r(0, 2) = (m(0, 1) * m(1, 2) - m(0, 2) * m(1, 1)) / d;
            r(1, 0) = (m(1, 2) * m(2, 0) - m(1, 0) * m(2, 2)) / d;
            r(1, 1) = (m(0, 0) * m(2, 2) - m(0, 2) * m(2, 0)) / d;
            r(1, 2) = (m(0, 2) * m(1, 0) - m(0, 0) * m(1, 2)) / d;
            r(2, 0) = (m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0)) / d;
            r(2, 1) = (m(0, 1) * m(2, 0) - m(0, 0) * m(2, 1)) / d;
            r(2, 2) = (m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0)) / d;
            return r;
        }
        default: {
            const Bounded inv = Bounded(as_eigen(m)).inverse();
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) r(i, j) = inv(i, j);
            return r;
        }
    }
}

SmallMatrix SmallMatrix::transposed() const {
    SmallMatrix r(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) r(i, j) = (*this)(j, i);
    return r;
}

std::array<double, kMaxDim> SmallMatrix::symmetric_eigenvalues() const {
    Bounded s = as_eigen(*this);
    s = 0.5 * (s + s.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Bounded> solver(s, Eigen::EigenvaluesOnly);
    std::array<double, kMaxDim> ev{};
    for (int i = 0; i < n; ++i) ev[i] = solver.eigenvalues()(i);
    return ev;
}

SmallMatrix operator*(const SmallMatrix& lhs, const SmallMatrix& rhs) {
    SmallMatrix r(lhs.n);
    for (int i = 0; i < lhs.n; ++i)
        for (int j = 0; j < lhs.n; ++j) {
            double s = 0.0;
            for (int k = 0; k < lhs.n; ++k) s += lhs(i, k) * rhs(k, j);
            r(i, j) = s;
        }
    return r;
}

SmallMatrix operator*(double s, const SmallMatrix& m) {
    SmallMatrix r = m;
    for (auto& x : r.a) x *= s;
    return r;
}

double trace_product(const SmallMatrix& lhs, const SmallMatrix& rhs) {
    double s = 0.0;
    for (int i = 0; i < lhs.n; ++i)
        for (int k = 0; k < lhs.n; ++k) s += lhs(i, k) * rhs(k, i);
    return s;
}

double dot(const Point& x, const Point& y, int n) {
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += x[i] * y[i];
    return s;
}

double quadratic_form(const SmallMatrix& m, const Point& x) {
    double s = 0.0;
    for (int i = 0; i < m.n; ++i)
        for (int j = 0; j < m.n; ++j) s += m(i, j) * x[i] * x[j];
    return s;
}

SmallMatrix load(const SymmetricMatrixField& field, std::size_t point) {
    const int n = field.dim();
    SmallMatrix m(n);
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) m(i, j) = m(j, i) = field(point, i, j);
    return m;
}

void store(SymmetricMatrixField& field, std::size_t point, const SmallMatrix& m) {
    const int n = field.dim();
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) field(point, i, j) = 0.5 * (m(i, j) + m(j, i));
}

}  // namespace negcurv
