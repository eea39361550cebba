#ifndef HSMKIT_LINALG_HPP
#define HSMKIT_LINALG_HPP

/* Minimal dense complex linear algebra: products, adjoints, Kronecker
   products, Hermitian eigendecomposition (cyclic Jacobi) and the matrix
   exponential exp(-i*H) built from it.  Everything here is small and
   dense; no attempt is made to scale past a few hundred rows. */

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numeric>
#include <vector>

#include "errors.hpp"

namespace hsmkit {

using Complex = std::complex<double>;

class ComplexMatrix {
public:
    ComplexMatrix() : rows_(0), cols_(0) {}
    ComplexMatrix(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), data_(rows * cols, Complex(0.0, 0.0)) {}
    ComplexMatrix(std::size_t rows, std::size_t cols, std::vector<Complex> entries)
        : rows_(rows), cols_(cols), data_(std::move(entries)) {
        if (data_.size() != rows_ * cols_)
            throw ValidationError("ComplexMatrix: entry count does not match shape");
    }

    static ComplexMatrix identity(std::size_t n) {
        ComplexMatrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    static ComplexMatrix column(std::vector<Complex> entries) {
        std::size_t n = entries.size();
        return ComplexMatrix(n, 1, std::move(entries));
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    Complex& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    const Complex& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    const std::vector<Complex>& data() const { return data_; }
    std::vector<Complex>& data() { return data_; }

    bool same_shape(const ComplexMatrix& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }

private:
    std::size_t rows_, cols_;
    std::vector<Complex> data_;
};

inline ComplexMatrix matmul(const ComplexMatrix& a, const ComplexMatrix& b) {
    if (a.cols() != b.rows())
        throw ValidationError("matmul: inner dimensions disagree");
    ComplexMatrix c(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t k = 0; k < a.cols(); ++k) {
            Complex aik = a(i, k);
            if (aik == Complex(0.0, 0.0)) continue;
            for (std::size_t j = 0; j < b.cols(); ++j)
                c(i, j) += aik * b(k, j);
        }
    }
    return c;
}

inline ComplexMatrix adjoint(const ComplexMatrix& a) {
    ComplexMatrix t(a.cols(), a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j)
            t(j, i) = std::conj(a(i, j));
    return t;
}

inline ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
    ComplexMatrix k(a.rows() * b.rows(), a.cols() * b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) {
            Complex aij = a(i, j);
            if (aij == Complex(0.0, 0.0)) continue;
            for (std::size_t p = 0; p < b.rows(); ++p)
                for (std::size_t q = 0; q < b.cols(); ++q)
                    k(i * b.rows() + p, j * b.cols() + q) = aij * b(p, q);
        }
    return k;
}

inline ComplexMatrix add(const ComplexMatrix& a, const ComplexMatrix& b) {
    if (!a.same_shape(b)) throw ValidationError("add: shape mismatch");
    ComplexMatrix c = a;
    for (std::size_t i = 0; i < c.data().size(); ++i) c.data()[i] += b.data()[i];
    return c;
}

inline ComplexMatrix scale(const ComplexMatrix& a, Complex s) {
    ComplexMatrix c = a;
    for (auto& z : c.data()) z *= s;
    return c;
}

inline ComplexMatrix matvec_into(const ComplexMatrix& a, const std::vector<Complex>& v) {
    ComplexMatrix out(a.rows(), 1);
    for (std::size_t i = 0; i < a.rows(); ++i) {
        Complex s(0.0, 0.0);
        for (std::size_t j = 0; j < a.cols(); ++j) s += a(i, j) * v[j];
        out(i, 0) = s;
    }
    return out;
}

inline double max_abs_diff(const ComplexMatrix& a, const ComplexMatrix& b) {
    if (!a.same_shape(b)) throw ValidationError("max_abs_diff: shape mismatch");
    double m = 0.0;
    for (std::size_t i = 0; i < a.data().size(); ++i)
        m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
    return m;
}

inline double norm_sq(const ComplexMatrix& v) {
    if (v.cols() != 1) throw ValidationError("norm_sq: expected a column vector");
    double s = 0.0;
    for (const auto& z : v.data()) s += std::norm(z);
    return s;
}

inline bool is_hermitian(const ComplexMatrix& h, double tol = 1e-10) {
    if (h.rows() != h.cols()) return false;
    for (std::size_t i = 0; i < h.rows(); ++i)
        for (std::size_t j = i; j < h.cols(); ++j)
            if (std::abs(h(i, j) - std::conj(h(j, i))) > tol) return false;
    return true;
}

struct EigenDecomposition {
    ComplexMatrix eigenvectors;   // columns, orthonormal
    std::vector<double> eigenvalues;  // ascending
};

/* Cyclic complex Jacobi for Hermitian matrices.  Each sweep annihilates
   every off-diagonal pair (p,q) with a unitary plane rotation; sweeps
   repeat until the off-diagonal mass is negligible.  Input is
   symmetrized as (h + h^dagger)/2 before iterating. */
inline EigenDecomposition hermitian_eig(const ComplexMatrix& h) {
    if (h.rows() != h.cols())
        throw ValidationError("hermitian_eig: matrix not square");
    if (!is_hermitian(h))
        throw ValidationError("hermitian_eig: matrix not Hermitian within 1e-10");

    const std::size_t n = h.rows();
    ComplexMatrix a(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            a(i, j) = 0.5 * (h(i, j) + std::conj(h(j, i)));
    ComplexMatrix v = ComplexMatrix::identity(n);

    const int max_sweeps = 100;
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q)
                off += std::norm(a(p, q));
        if (off < 1e-26) break;

        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                Complex apq = a(p, q);
                double r = std::abs(apq);
                if (r < 1e-18) continue;
                double phi = std::arg(apq);
                double app = a(p, p).real();
                double aqq = a(q, q).real();
                double theta = 0.5 * std::atan2(2.0 * r, app - aqq);
                double c = std::cos(theta), s = std::sin(theta);
                Complex eip = std::polar(1.0, phi);

                // Columns p,q of both a (two-sided) and v (one-sided) rotate.
                for (std::size_t i = 0; i < n; ++i) {
                    Complex aip = a(i, p), aiq = a(i, q);
                    a(i, p) = c * aip + s * std::conj(eip) * aiq;
                    a(i, q) = -s * eip * aip + c * aiq;
                    Complex vip = v(i, p), viq = v(i, q);
                    v(i, p) = c * vip + s * std::conj(eip) * viq;
                    v(i, q) = -s * eip * vip + c * viq;
                }
                for (std::size_t j = 0; j < n; ++j) {
                    Complex apj = a(p, j), aqj = a(q, j);
                    a(p, j) = c * apj + s * eip * aqj;
                    a(q, j) = -s * std::conj(eip) * apj + c * aqj;
                }
            }
        }
    }

    std::vector<double> lam(n);
    for (std::size_t i = 0; i < n; ++i) lam[i] = a(i, i).real();

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t x, std::size_t y) { return lam[x] < lam[y]; });

    EigenDecomposition out;
    out.eigenvalues.resize(n);
    out.eigenvectors = ComplexMatrix(n, n);
    for (std::size_t k = 0; k < n; ++k) {
        out.eigenvalues[k] = lam[order[k]];
        for (std::size_t i = 0; i < n; ++i)
            out.eigenvectors(i, k) = v(i, order[k]);
    }
    return out;
}

/* U = exp(-i*h) = V diag(exp(-i*lambda_j)) V^dagger. */
inline ComplexMatrix unitary_from_hermitian(const ComplexMatrix& h) {
    EigenDecomposition ed = hermitian_eig(h);
    const std::size_t n = h.rows();
    ComplexMatrix u(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            Complex s(0.0, 0.0);
            for (std::size_t k = 0; k < n; ++k)
                s += ed.eigenvectors(i, k) * std::polar(1.0, -ed.eigenvalues[k]) *
                     std::conj(ed.eigenvectors(j, k));
            u(i, j) = s;
        }
    return u;
}

inline bool is_unitary(const ComplexMatrix& u, double tol = 1e-8) {
    if (u.rows() != u.cols()) return false;
    ComplexMatrix p = matmul(adjoint(u), u);
    return max_abs_diff(p, ComplexMatrix::identity(u.rows())) <= tol;
}

}

#endif
