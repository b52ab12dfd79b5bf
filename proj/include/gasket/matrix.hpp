#pragma once

// Small dense matrices and vectors of exact rationals. Value types throughout:
// no operation mutates its arguments, so results can be cached and shared
// across threads freely.

#include "gasket/rational.hpp"

#include <cstddef>
#include <initializer_list>
#include <vector>

namespace gasket {

using RationalVector = std::vector<Rational>;

class RationalMatrix {
  public:
    RationalMatrix() = default;
    RationalMatrix(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), entries_(rows * cols) {}
    RationalMatrix(std::initializer_list<std::initializer_list<Rational>> init) {
        rows_ = init.size();
        cols_ = rows_ ? init.begin()->size() : 0;
        entries_.reserve(rows_ * cols_);
        for (const auto& row : init) {
            if (row.size() != cols_) throw ValidationError("ragged matrix initializer");
            for (const auto& v : row) entries_.push_back(v);
        }
    }

    static RationalMatrix identity(std::size_t n) {
        RationalMatrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m.at(i, i) = 1;
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    Rational& at(std::size_t i, std::size_t j) { return entries_[i * cols_ + j]; }
    const Rational& at(std::size_t i, std::size_t j) const { return entries_[i * cols_ + j]; }

    bool operator==(const RationalMatrix& o) const {
        return rows_ == o.rows_ && cols_ == o.cols_ && entries_ == o.entries_;
    }

    bool is_symmetric() const {
        if (rows_ != cols_) return false;
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = i + 1; j < cols_; ++j)
                if (at(i, j) != at(j, i)) return false;
        return true;
    }

    RationalMatrix transposed() const {
        RationalMatrix t(cols_, rows_);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j) t.at(j, i) = at(i, j);
        return t;
    }

  private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<Rational> entries_;
};

inline RationalMatrix operator+(const RationalMatrix& a, const RationalMatrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw ValidationError("matrix addition shape mismatch");
    RationalMatrix r(a.rows(), a.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) r.at(i, j) = a.at(i, j) + b.at(i, j);
    return r;
}

inline RationalMatrix operator-(const RationalMatrix& a, const RationalMatrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw ValidationError("matrix subtraction shape mismatch");
    RationalMatrix r(a.rows(), a.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) r.at(i, j) = a.at(i, j) - b.at(i, j);
    return r;
}

inline RationalMatrix operator*(const RationalMatrix& a, const RationalMatrix& b) {
    if (a.cols() != b.rows()) throw ValidationError("matrix product shape mismatch");
    RationalMatrix r(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t k = 0; k < a.cols(); ++k) {
            if (a.at(i, k) == 0) continue;
            for (std::size_t j = 0; j < b.cols(); ++j)
                r.at(i, j) += a.at(i, k) * b.at(k, j);
        }
    return r;
}

inline RationalMatrix operator*(const Rational& c, const RationalMatrix& m) {
    RationalMatrix r(m.rows(), m.cols());
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) r.at(i, j) = c * m.at(i, j);
    return r;
}

inline RationalVector mat_vec(const RationalMatrix& m, const RationalVector& v) {
    if (m.cols() != v.size()) throw ValidationError("matrix-vector shape mismatch");
    RationalVector r(m.rows());
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) r[i] += m.at(i, j) * v[j];
    return r;
}

inline Rational dot(const RationalVector& a, const RationalVector& b) {
    if (a.size() != b.size()) throw ValidationError("dot product shape mismatch");
    Rational s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

// x^T M x
inline Rational quad_form(const RationalMatrix& m, const RationalVector& x) {
    return dot(x, mat_vec(m, x));
}

inline RationalMatrix submatrix(const RationalMatrix& m,
                                const std::vector<std::size_t>& row_idx,
                                const std::vector<std::size_t>& col_idx) {
    RationalMatrix r(row_idx.size(), col_idx.size());
    for (std::size_t i = 0; i < row_idx.size(); ++i)
        for (std::size_t j = 0; j < col_idx.size(); ++j)
            r.at(i, j) = m.at(row_idx[i], col_idx[j]);
    return r;
}

}  // namespace gasket
