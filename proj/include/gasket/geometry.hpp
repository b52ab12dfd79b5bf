#pragma once

// Combinatorics of the level-ν triangle subdivision in exact barycentric
// integer coordinates: upward cells, the affine cell maps, and the level-1
// vertex network with its graph Laplacian. Integer coordinates make vertex
// identification exact equality — no epsilon tie-breaking; Cartesian floats
// appear only at SVG-render time.

#include "gasket/matrix.hpp"

#include <array>
#include <map>
#include <mutex>
#include <numeric>
#include <string>
#include <tuple>
#include <vector>

namespace gasket {

// Hard cap on subdivision levels; keeps exact elimination cost bounded.
inline constexpr int kMaxLevel = 12;

// Number of upward cells of the ν-fold subdivision.
inline constexpr int cell_count(int nu) { return nu * (nu + 1) / 2; }

// A plane point with nonnegative integer barycentric coordinates (a,b,c)
// summing to `scale`. Stored reduced (gcd(a,b,c,scale) == 1), so two values
// denote the same plane point iff they are fieldwise equal.
struct BaryPoint {
    long long a = 0, b = 0, c = 0;
    long long scale = 1;

    bool operator==(const BaryPoint&) const = default;
    auto operator<=>(const BaryPoint&) const = default;
};

inline BaryPoint make_bary(long long a, long long b, long long c, long long scale) {
    if (scale <= 0 || a < 0 || b < 0 || c < 0 || a + b + c != scale)
        throw ValidationError("barycentric coordinates must be nonnegative and sum to the scale");
    long long g = std::gcd(std::gcd(a, b), std::gcd(c, scale));
    return BaryPoint{a / g, b / g, c / g, scale / g};
}

// Outer corner p_i (1-based): coordinate 1 in slot i at scale 1.
inline BaryPoint corner_point(int i) {
    switch (i) {
        case 1: return BaryPoint{1, 0, 0, 1};
        case 2: return BaryPoint{0, 1, 0, 1};
        case 3: return BaryPoint{0, 0, 1, 1};
    }
    throw ValidationError("corner index must be 1, 2, or 3");
}

inline std::string bary_text(const BaryPoint& p) {
    return "(" + std::to_string(p.a) + "," + std::to_string(p.b) + "," + std::to_string(p.c) +
           ")/" + std::to_string(p.scale);
}

struct CellDescriptor {
    int level = 0;  // ν
    int index = 0;  // 1-based, 1..cell_count(ν)
    std::array<long long, 3> base{};  // (a,b,c), a+b+c = ν-1; corners are base+e_k
    std::array<BaryPoint, 3> corner_points{};
};

// The N(ν) upward cells in canonical order: cells 1..3 are the corner cells
// containing p_1, p_2, p_3; the rest follow in ascending lexicographic order
// of their base point. The ordering is part of the external contract (word
// letters index into it).
inline const std::vector<CellDescriptor>& cells(int nu) {
    if (nu < 2 || nu > kMaxLevel)
        throw ValidationError("subdivision level must be in 2.." + std::to_string(kMaxLevel) +
                              ", got " + std::to_string(nu));
    static std::map<int, std::vector<CellDescriptor>> cache;
    static std::mutex mutex;
    std::lock_guard<std::mutex> lock(mutex);
    auto it = cache.find(nu);
    if (it != cache.end()) return it->second;

    std::vector<std::array<long long, 3>> bases;
    bases.push_back({nu - 1, 0, 0});
    bases.push_back({0, nu - 1, 0});
    bases.push_back({0, 0, nu - 1});
    std::vector<std::array<long long, 3>> rest;
    for (long long a = 0; a <= nu - 1; ++a)
        for (long long b = 0; a + b <= nu - 1; ++b) {
            std::array<long long, 3> base{a, b, nu - 1 - a - b};
            if (base == bases[0] || base == bases[1] || base == bases[2]) continue;
            rest.push_back(base);
        }
    // rest is generated in ascending lexicographic (a,b,c) order already
    bases.insert(bases.end(), rest.begin(), rest.end());

    std::vector<CellDescriptor> out;
    out.reserve(bases.size());
    for (std::size_t k = 0; k < bases.size(); ++k) {
        CellDescriptor cd;
        cd.level = nu;
        cd.index = static_cast<int>(k + 1);
        cd.base = bases[k];
        for (int corner = 0; corner < 3; ++corner) {
            std::array<long long, 3> c = bases[k];
            c[corner] += 1;
            cd.corner_points[corner] = make_bary(c[0], c[1], c[2], nu);
        }
        out.push_back(cd);
    }
    return cache.emplace(nu, std::move(out)).first->second;
}

// Image of p under the contraction onto cell i of the ν-fold subdivision:
// with cell base (A,B,C), a point (x,y,z)/s maps to (As+x, Bs+y, Cs+z)/(sν).
// Composing maps along a word multiplies the scales.
inline BaryPoint apply_cell_map(int nu, int cell_index, const BaryPoint& p) {
    const auto& cs = cells(nu);
    if (cell_index < 1 || cell_index > static_cast<int>(cs.size()))
        throw ValidationError("cell index " + std::to_string(cell_index) +
                              " out of range for level " + std::to_string(nu));
    const auto& base = cs[cell_index - 1].base;
    return make_bary(base[0] * p.scale + p.a, base[1] * p.scale + p.b, base[2] * p.scale + p.c,
                     p.scale * nu);
}

struct LevelOneNetwork {
    int level = 0;
    std::vector<BaryPoint> vertices;  // p1, p2, p3 first, then interior ordering below
    std::array<std::size_t, 3> boundary_indices{0, 1, 2};
    RationalMatrix laplacian;  // sum over cells of the unit corner form
    std::vector<std::array<std::size_t, 3>> cell_vertices;  // per cell, vertex ids of corners
};

// Vertex union of all cell corners, each plane point once. Ordering: the
// three outer corners first, then the remaining vertices in descending
// lexicographic order of their scale-ν coordinates (at ν=2 this reads
// "midpoint opposite p3, opposite p2, opposite p1").
inline const LevelOneNetwork& build_level_one_network(int nu) {
    static std::map<int, LevelOneNetwork> cache;
    static std::mutex mutex;
    const auto& cs = cells(nu);  // validates nu
    std::lock_guard<std::mutex> lock(mutex);
    auto it = cache.find(nu);
    if (it != cache.end()) return it->second;

    // normalized scale-ν coordinates for ordering (reduced scale divides ν)
    auto key_at_nu = [nu](const BaryPoint& p) {
        long long f = nu / p.scale;
        return std::array<long long, 3>{p.a * f, p.b * f, p.c * f};
    };

    LevelOneNetwork net;
    net.level = nu;
    for (int i = 1; i <= 3; ++i) net.vertices.push_back(corner_point(i));
    std::vector<BaryPoint> others;
    for (const auto& cd : cs)
        for (const auto& p : cd.corner_points) {
            bool is_corner = p == corner_point(1) || p == corner_point(2) || p == corner_point(3);
            if (!is_corner) others.push_back(p);
        }
    std::sort(others.begin(), others.end(), [&](const BaryPoint& x, const BaryPoint& y) {
        return key_at_nu(x) > key_at_nu(y);
    });
    others.erase(std::unique(others.begin(), others.end()), others.end());
    net.vertices.insert(net.vertices.end(), others.begin(), others.end());

    std::map<BaryPoint, std::size_t> index_of;
    for (std::size_t i = 0; i < net.vertices.size(); ++i) index_of[net.vertices[i]] = i;

    const std::size_t n = net.vertices.size();
    net.laplacian = RationalMatrix(n, n);
    auto add_edge = [&](std::size_t u, std::size_t v) {
        net.laplacian.at(u, u) += 1;
        net.laplacian.at(v, v) += 1;
        net.laplacian.at(u, v) -= 1;
        net.laplacian.at(v, u) -= 1;
    };
    for (const auto& cd : cs) {
        std::array<std::size_t, 3> ids{};
        for (int k = 0; k < 3; ++k) ids[k] = index_of.at(cd.corner_points[k]);
        add_edge(ids[0], ids[1]);
        add_edge(ids[1], ids[2]);
        add_edge(ids[2], ids[0]);
        net.cell_vertices.push_back(ids);
    }
    return cache.emplace(nu, std::move(net)).first->second;
}

}  // namespace gasket
