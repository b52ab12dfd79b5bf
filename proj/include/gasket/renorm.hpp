#pragma once

// Renormalization data of the level-ν subdivision, all exact: the resistance
// scaling constant r, the per-cell harmonic extension matrices A_i, and the
// spectral decomposition {1, r, s} of the corner extension matrices together
// with the vectors u_i (left) and v_i (normalized right). Every eigen-identity
// is verified with zero residual at construction; a failure means the
// geometry layer produced a wrong network and raises ConsistencyError.

#include "gasket/geometry.hpp"
#include "gasket/linalg.hpp"

#include <array>
#include <map>
#include <mutex>
#include <vector>

namespace gasket {

// The corner operator D on functions over {p1,p2,p3}: diagonal -2,
// off-diagonal 1. The corner energy form is Q(x,y) = (-Dx, y).
inline RationalMatrix corner_operator() {
    return RationalMatrix{{Rational(-2), Rational(1), Rational(1)},
                          {Rational(1), Rational(-2), Rational(1)},
                          {Rational(1), Rational(1), Rational(-2)}};
}

inline RationalMatrix corner_form() {
    return RationalMatrix{{Rational(2), Rational(-1), Rational(-1)},
                          {Rational(-1), Rational(2), Rational(-1)},
                          {Rational(-1), Rational(-1), Rational(2)}};
}

inline Rational q_bilinear(const RationalVector& x, const RationalVector& y) {
    static const RationalMatrix form = corner_form();
    return dot(mat_vec(form, x), y);
}

inline Rational q_value(const RationalVector& x) { return q_bilinear(x, x); }

struct ExtensionMatrix {
    int level = 0;
    int cell = 0;  // 1-based
    RationalMatrix matrix;  // 3×3; row k = values at the cell's corner k
};

struct RBoundsReport {
    int level = 0;
    Rational lower, r, upper;
    bool pass = false;
};

struct SpectralData {
    int level = 0;
    Rational r, s;
    // indexed by corner i-1; right eigenvectors for eigenvalues r and s,
    // the left eigenvector for r, and v_i = v_tilde_i scaled so (u_i,v_i)=1
    std::array<RationalVector, 3> v_tilde, y, u, v;
};

namespace detail {

struct RenormEntry {
    Rational r;
    std::vector<ExtensionMatrix> extensions;
    SpectralData spectral;
};

inline RationalVector unit_vector3(int j) {
    RationalVector e(3);
    e[j] = 1;
    return e;
}

inline const RenormEntry& renorm_entry(int nu) {
    static std::map<int, RenormEntry> cache;
    static std::mutex mutex;
    const auto& net = build_level_one_network(nu);  // validates nu
    std::lock_guard<std::mutex> lock(mutex);
    auto it = cache.find(nu);
    if (it != cache.end()) return it->second;

    RenormEntry entry;

    // r: trace the level-1 form onto the corners; proportionality to the
    // corner form is checked, not assumed.
    std::vector<std::size_t> boundary(net.boundary_indices.begin(), net.boundary_indices.end());
    RationalMatrix traced = schur_complement(net.laplacian, boundary);
    Rational r = traced.at(0, 0) / 2;
    if (!(traced == r * corner_form()))
        throw ConsistencyError("level-1 trace form is not proportional to the corner form at level " +
                               std::to_string(nu));
    if (!(r > 0 && r < 1))
        throw ConsistencyError("renormalization constant out of (0,1) at level " +
                               std::to_string(nu));
    entry.r = r;

    // harmonic extensions of the three boundary basis vectors, read off per cell
    std::vector<std::size_t> interior;
    for (std::size_t i = 0; i < net.vertices.size(); ++i)
        if (i != boundary[0] && i != boundary[1] && i != boundary[2]) interior.push_back(i);
    RationalMatrix m_ii = submatrix(net.laplacian, interior, interior);
    RationalMatrix m_ib = submatrix(net.laplacian, interior, boundary);
    RationalMatrix interior_vals =
        solve_multi(m_ii, Rational(-1) * m_ib, "interior not invertible");  // rows: interior, cols: basis j

    std::vector<RationalVector> all_values(net.vertices.size(), RationalVector(3));
    for (int j = 0; j < 3; ++j) {
        for (int bidx = 0; bidx < 3; ++bidx) all_values[boundary[bidx]][j] = bidx == j ? 1 : 0;
        for (std::size_t k = 0; k < interior.size(); ++k)
            all_values[interior[k]][j] = interior_vals.at(k, j);
    }
    for (std::size_t cell = 0; cell < net.cell_vertices.size(); ++cell) {
        ExtensionMatrix em;
        em.level = nu;
        em.cell = static_cast<int>(cell + 1);
        em.matrix = RationalMatrix(3, 3);
        for (int k = 0; k < 3; ++k)
            for (int j = 0; j < 3; ++j)
                em.matrix.at(k, j) = all_values[net.cell_vertices[cell][k]][j];
        // constants are harmonic: every row sums to 1
        for (int k = 0; k < 3; ++k) {
            if (em.matrix.at(k, 0) + em.matrix.at(k, 1) + em.matrix.at(k, 2) != 1)
                throw ConsistencyError("extension matrix row does not preserve constants");
        }
        entry.extensions.push_back(std::move(em));
    }

    // spectral data from the corner-cell matrices; s from the trace identity
    // (1 and r account for the other two eigenvalues of a 3×3 matrix)
    SpectralData sd;
    sd.level = nu;
    sd.r = r;
    const RationalMatrix& a1 = entry.extensions[0].matrix;
    sd.s = a1.at(0, 0) + a1.at(1, 1) + a1.at(2, 2) - 1 - r;
    if (!(abs(sd.s) < r)) throw ConsistencyError("subdominant eigenvalue not below r");

    sd.v_tilde = {RationalVector{0, 1, 1}, RationalVector{1, 0, 1}, RationalVector{1, 1, 0}};
    sd.y = {RationalVector{0, 1, -1}, RationalVector{-1, 0, 1}, RationalVector{1, -1, 0}};
    RationalMatrix d_op = corner_operator();
    for (int i = 0; i < 3; ++i) {
        RationalVector u(3);
        for (int p = 0; p < 3; ++p) u[p] = d_op.at(p, i);
        sd.u[i] = u;
        Rational norm = dot(u, sd.v_tilde[i]);
        if (norm == 0) throw ConsistencyError("left/right eigenvector pairing degenerate");
        RationalVector v = sd.v_tilde[i];
        for (auto& c : v) c /= norm;
        sd.v[i] = v;
    }

    const RationalVector ones{1, 1, 1};
    for (int i = 0; i < 3; ++i) {
        const RationalMatrix& a = entry.extensions[i].matrix;
        const RationalMatrix at = a.transposed();
        if (mat_vec(a, ones) != ones)
            throw ConsistencyError("extension matrix does not fix constants");
        RationalVector rv = sd.v_tilde[i];
        for (auto& c : rv) c *= sd.r;
        if (mat_vec(a, sd.v_tilde[i]) != rv)
            throw ConsistencyError("eigen-identity for eigenvalue r failed");
        RationalVector sy = sd.y[i];
        for (auto& c : sy) c *= sd.s;
        if (mat_vec(a, sd.y[i]) != sy)
            throw ConsistencyError("eigen-identity for eigenvalue s failed");
        RationalVector ru = sd.u[i];
        for (auto& c : ru) c *= sd.r;
        if (mat_vec(at, sd.u[i]) != ru)
            throw ConsistencyError("left eigen-identity for eigenvalue r failed");
        if (dot(sd.u[i], ones) != 0 || dot(sd.u[i], sd.y[i]) != 0 || dot(sd.u[i], sd.v[i]) != 1)
            throw ConsistencyError("eigenvector pairing identities failed");
    }
    entry.spectral = std::move(sd);

    return cache.emplace(nu, std::move(entry)).first->second;
}

}  // namespace detail

inline const Rational& renormalization_constant(int nu) { return detail::renorm_entry(nu).r; }

inline RBoundsReport verify_r_bounds(int nu) {
    RBoundsReport rep;
    rep.level = nu;
    rep.r = renormalization_constant(nu);
    rep.lower = Rational(1, nu);
    rep.upper = Rational(cell_count(nu), nu * nu);
    rep.pass = rep.lower < rep.r && rep.r < rep.upper;
    return rep;
}

inline const std::vector<ExtensionMatrix>& extension_matrices(int nu) {
    return detail::renorm_entry(nu).extensions;
}

inline const SpectralData& spectral_data(int nu) { return detail::renorm_entry(nu).spectral; }

}  // namespace gasket
