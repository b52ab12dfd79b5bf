#pragma once

// Exact Gaussian elimination and the Schur complement (trace of a quadratic
// form onto a boundary vertex set). First-nonzero pivoting only: there is no
// rounding, so pivot-magnitude heuristics are unnecessary.

#include "gasket/matrix.hpp"

#include <algorithm>
#include <cstddef>
#include <vector>

namespace gasket {

struct SingularMatrixError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Reduces [A | B] to [I | A^{-1}B] and returns A^{-1}B.
inline RationalMatrix solve_multi(const RationalMatrix& a, const RationalMatrix& b,
                                  const char* singular_message = "singular matrix") {
    if (a.rows() != a.cols()) throw ValidationError("solve: matrix not square");
    if (a.rows() != b.rows()) throw ValidationError("solve: right-hand side shape mismatch");
    const std::size_t n = a.rows();
    const std::size_t k = b.cols();
    RationalMatrix aug(n, n + k);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) aug.at(i, j) = a.at(i, j);
        for (std::size_t j = 0; j < k; ++j) aug.at(i, n + j) = b.at(i, j);
    }
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        while (piv < n && aug.at(piv, col) == 0) ++piv;
        if (piv == n) throw SingularMatrixError(singular_message);
        if (piv != col)
            for (std::size_t j = col; j < n + k; ++j) std::swap(aug.at(col, j), aug.at(piv, j));
        const Rational p = aug.at(col, col);
        for (std::size_t j = col; j < n + k; ++j) aug.at(col, j) /= p;
        for (std::size_t r = 0; r < n; ++r) {
            if (r == col || aug.at(r, col) == 0) continue;
            const Rational f = aug.at(r, col);
            for (std::size_t j = col; j < n + k; ++j) aug.at(r, j) -= f * aug.at(col, j);
        }
    }
    RationalMatrix x(n, k);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < k; ++j) x.at(i, j) = aug.at(i, n + j);
    return x;
}

inline RationalVector solve_linear(const RationalMatrix& a, const RationalVector& b) {
    if (a.rows() != b.size()) throw ValidationError("solve: right-hand side shape mismatch");
    RationalMatrix rhs(b.size(), 1);
    for (std::size_t i = 0; i < b.size(); ++i) rhs.at(i, 0) = b[i];
    RationalMatrix x = solve_multi(a, rhs);
    RationalVector r(b.size());
    for (std::size_t i = 0; i < b.size(); ++i) r[i] = x.at(i, 0);
    return r;
}

// Trace of the form M onto the listed boundary indices: the result S satisfies
// x·S·x = inf over interior extensions y of (x ⊕ y)·M·(x ⊕ y), attained at the
// harmonic extension y = -M_II^{-1} M_IB x. Rows/columns of S follow the order
// of boundary_indices.
inline RationalMatrix schur_complement(const RationalMatrix& m,
                                       const std::vector<std::size_t>& boundary_indices) {
    if (m.rows() != m.cols()) throw ValidationError("schur: matrix not square");
    if (!m.is_symmetric()) throw ValidationError("schur: matrix not symmetric");
    std::vector<bool> is_boundary(m.rows(), false);
    for (std::size_t b : boundary_indices) {
        if (b >= m.rows()) throw ValidationError("schur: boundary index out of range");
        if (is_boundary[b]) throw ValidationError("schur: duplicate boundary index");
        is_boundary[b] = true;
    }
    std::vector<std::size_t> interior;
    for (std::size_t i = 0; i < m.rows(); ++i)
        if (!is_boundary[i]) interior.push_back(i);

    RationalMatrix m_bb = submatrix(m, boundary_indices, boundary_indices);
    if (interior.empty()) return m_bb;

    RationalMatrix m_ii = submatrix(m, interior, interior);
    RationalMatrix m_ib = submatrix(m, interior, boundary_indices);
    RationalMatrix m_bi = submatrix(m, boundary_indices, interior);
    RationalMatrix x = solve_multi(m_ii, m_ib, "interior not invertible");
    return m_bb - m_bi * x;
}

}  // namespace gasket
