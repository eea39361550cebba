#ifndef HSMKIT_QUANTUM_HPP
#define HSMKIT_QUANTUM_HPP

/* Projector construction, basis rotation, and the quantum probability
   rules for single events and measurement sequences.  Sequences are
   given in measurement order; composition applies the first-measured
   projector first (innermost), matching p(AB) = ||P_B P_A psi||^2. */

#include <cmath>
#include <cstddef>
#include <set>
#include <vector>

#include "errors.hpp"
#include "linalg.hpp"

namespace hsmkit {

class StateVector {
public:
    explicit StateVector(ComplexMatrix coords) : coords_(std::move(coords)) {
        if (coords_.cols() != 1)
            throw ValidationError("StateVector: coordinates must form a column");
        double n2 = norm_sq(coords_);
        if (std::fabs(n2 - 1.0) > 1e-8)
            throw ValidationError("StateVector: norm_sq differs from 1 by more than 1e-8");
    }

    static StateVector normalized(std::vector<Complex> coords) {
        double n2 = 0.0;
        for (const auto& z : coords) n2 += std::norm(z);
        if (n2 <= 0.0) throw ValidationError("StateVector: cannot normalize the zero vector");
        double inv = 1.0 / std::sqrt(n2);
        for (auto& z : coords) z *= inv;
        return StateVector(ComplexMatrix::column(std::move(coords)));
    }

    const ComplexMatrix& coords() const { return coords_; }
    std::size_t dim() const { return coords_.rows(); }

private:
    ComplexMatrix coords_;
};

class Projector {
public:
    explicit Projector(ComplexMatrix m) : matrix_(std::move(m)) {
        if (matrix_.rows() != matrix_.cols())
            throw ValidationError("Projector: matrix not square");
        if (!is_hermitian(matrix_, 1e-10))
            throw ValidationError("Projector: matrix not Hermitian");
        if (max_abs_diff(matmul(matrix_, matrix_), matrix_) > 1e-8)
            throw ValidationError("Projector: matrix not idempotent");
    }

    const ComplexMatrix& matrix() const { return matrix_; }
    std::size_t dim() const { return matrix_.rows(); }

private:
    ComplexMatrix matrix_;
};

inline Projector indicator_projector(std::size_t dim, const std::set<std::size_t>& one_indices) {
    ComplexMatrix m(dim, dim);
    for (std::size_t i : one_indices) {
        if (i >= dim) throw ValidationError("indicator_projector: index out of range");
        m(i, i) = 1.0;
    }
    return Projector(std::move(m));
}

inline Projector rotate_projector(const ComplexMatrix& u, const Projector& m) {
    if (u.rows() != m.dim())
        throw ValidationError("rotate_projector: dimension mismatch");
    if (!is_unitary(u, 1e-8))
        throw ValidationError("rotate_projector: matrix is not unitary");
    return Projector(matmul(matmul(u, m.matrix()), adjoint(u)));
}

inline Projector embed_in_slots(const Projector& p, std::size_t slot,
                                const std::vector<std::size_t>& slot_dims) {
    if (slot >= slot_dims.size())
        throw ValidationError("embed_in_slots: slot index out of range");
    if (p.dim() != slot_dims[slot])
        throw ValidationError("embed_in_slots: projector does not match slot dimension");
    ComplexMatrix acc = ComplexMatrix::identity(1);
    for (std::size_t s = 0; s < slot_dims.size(); ++s) {
        const ComplexMatrix& factor =
            (s == slot) ? p.matrix() : ComplexMatrix::identity(slot_dims[s]);
        acc = kron(acc, factor);
    }
    return Projector(std::move(acc));
}

namespace detail {
inline double clamp_probability(double p) {
    if (p < 0.0) {
        if (p < -1e-9) throw ValidationError("probability fell below 0 by more than 1e-9");
        return 0.0;
    }
    if (p > 1.0) {
        if (p > 1.0 + 1e-9) throw ValidationError("probability exceeded 1 by more than 1e-9");
        return 1.0;
    }
    return p;
}
}

inline double sequence_probability(const StateVector& psi,
                                   const std::vector<Projector>& projectors) {
    if (projectors.empty())
        throw ValidationError("sequence_probability: empty projector sequence");
    std::vector<Complex> v = psi.coords().data();
    for (const Projector& p : projectors) {
        if (p.dim() != v.size())
            throw ValidationError("sequence_probability: projector dimension mismatch");
        v = matvec_into(p.matrix(), v).data();
    }
    double n2 = 0.0;
    for (const auto& z : v) n2 += std::norm(z);
    return detail::clamp_probability(n2);
}

inline double conditional_probability(const StateVector& psi,
                                      const Projector& given, const Projector& then) {
    double pa = sequence_probability(psi, {given});
    if (pa <= 0.0)
        throw ValidationError("conditional_probability: conditioning event has probability 0");
    double pab = sequence_probability(psi, {given, then});
    return detail::clamp_probability(pab / pa);
}

}

#endif
