#pragma once

// Cylinder-set values of the reference measure λ_q and the energy measures
// attached to harmonic and piecewise-harmonic data, together with the exact
// decomposition identities that make them consistent across depths. Energy
// measures live entirely on the address shift space: a cylinder's mass is
// 2 r_w^{-1} Q(A_w x), and nothing is ever materialized on the plane.

#include "gasket/geometry.hpp"
#include "gasket/renorm.hpp"
#include "gasket/words.hpp"

#include <map>
#include <string>
#include <utility>
#include <vector>

namespace gasket {

namespace detail {

// Product A_{w_m}···A_{w_1} for a word known to be admissible (each letter
// carries its level, so the rule is not consulted).
inline RationalMatrix word_matrix_unchecked(const Word& w) {
    RationalMatrix m = RationalMatrix::identity(3);
    for (const Letter& l : w) m = extension_matrices(l.level)[l.index - 1].matrix * m;
    return m;
}

inline Rational resistance_weight_unchecked(const Word& w) {
    Rational r = 1;
    for (const Letter& l : w) r *= renormalization_constant(l.level);
    return r;
}

}  // namespace detail

// A_w = A_{w_m}···A_{w_1} (letters applied outermost-first to boundary data).
inline RationalMatrix word_matrix(const LabelRule& rule, const Word& w) {
    rule.require_admissible(w);
    return detail::word_matrix_unchecked(w);
}

// r_w = Π_k r^(level of w_k).
inline Rational resistance_weight(const LabelRule& rule, const Word& w) {
    rule.require_admissible(w);
    return detail::resistance_weight_unchecked(w);
}

// λ_q(Σ_w): the product of letter weights, 0 off the admissible tree.
inline Rational reference_cylinder(const LabelRule& rule, const WeightSystem& q, const Word& w) {
    if (!rule.is_admissible(w)) return 0;
    return q.word_weight(w);
}

// λ_⟨x⟩(Σ_w) = 2 r_w^{-1} Q(A_w x), 0 off the admissible tree.
inline Rational energy_cylinder(const LabelRule& rule, const RationalVector& x, const Word& w) {
    if (x.size() != 3) throw ValidationError("boundary vector must have 3 entries");
    if (!rule.is_admissible(w)) return 0;
    Rational qv = q_value(mat_vec(detail::word_matrix_unchecked(w), x));
    return 2 * qv / detail::resistance_weight_unchecked(w);
}

// Exact check of the depth-m refinement identity
//   r_ξ^{-1} Q(A_ξ x) = Σ_{|ζ|=m admissible} r_{ξζ}^{-1} Q(A_{ξζ} x).
inline bool verify_decomposition(const LabelRule& rule, const RationalVector& x, const Word& xi,
                                 int m) {
    if (x.size() != 3) throw ValidationError("boundary vector must have 3 entries");
    rule.require_admissible(xi);
    Rational lhs = q_value(mat_vec(detail::word_matrix_unchecked(xi), x)) /
                   detail::resistance_weight_unchecked(xi);
    Rational rhs = 0;
    enumerate_extensions(rule, xi, m, [&](const Word& w) {
        rhs += q_value(mat_vec(detail::word_matrix_unchecked(w), x)) /
               detail::resistance_weight_unchecked(w);
    });
    return lhs == rhs;
}

// An m-harmonic function given by its corner values on every depth-m cell.
struct PiecewiseHarmonicSpec {
    int base_depth = 0;
    std::map<Word, RationalVector> values;
};

// Barycentric image of corner `corner_index` (1..3) of the cell addressed by w.
inline BaryPoint word_corner_image(const LabelRule& rule, const Word& w, int corner_index) {
    rule.require_admissible(w);
    BaryPoint p = corner_point(corner_index);
    for (auto it = w.rbegin(); it != w.rend(); ++it)
        p = apply_cell_map(it->level, it->index, p);
    return p;
}

// Checks the spec covers exactly the depth-m admissible words and that values
// agree wherever two cells share a vertex in the plane.
inline void validate_piecewise(const LabelRule& rule, const PiecewiseHarmonicSpec& f) {
    if (f.base_depth < 0) throw ValidationError("piecewise spec: negative base depth");
    std::size_t expected = 0;
    std::map<BaryPoint, std::pair<Word, int>> owner;  // vertex -> (word, corner)
    std::map<BaryPoint, Rational> value_at;
    enumerate_admissible(rule, f.base_depth, [&](const Word& v) {
        ++expected;
        auto it = f.values.find(v);
        if (it == f.values.end())
            throw ValidationError("piecewise spec: missing values for cell " + word_text(v));
        if (it->second.size() != 3)
            throw ValidationError("piecewise spec: cell " + word_text(v) +
                                  " needs 3 corner values");
        for (int corner = 1; corner <= 3; ++corner) {
            BaryPoint p = corner_point(corner);
            for (auto lit = v.rbegin(); lit != v.rend(); ++lit)
                p = apply_cell_map(lit->level, lit->index, p);
            const Rational& val = it->second[corner - 1];
            auto [vit, inserted] = value_at.try_emplace(p, val);
            if (inserted) {
                owner.emplace(p, std::make_pair(v, corner));
            } else if (vit->second != val) {
                const auto& [other_word, other_corner] = owner.at(p);
                throw ValidationError(
                    "piecewise spec: values disagree at vertex " + bary_text(p) + ": cell " +
                    word_text(other_word) + " corner " + std::to_string(other_corner) + " gives " +
                    to_string(vit->second) + ", cell " + word_text(v) + " corner " +
                    std::to_string(corner) + " gives " + to_string(val));
            }
        }
    });
    if (f.values.size() != expected)
        throw ValidationError("piecewise spec: " + std::to_string(f.values.size()) +
                              " cells given, " + std::to_string(expected) + " expected");
}

// The m-harmonic data of the harmonic extension of boundary values x.
inline PiecewiseHarmonicSpec harmonic_spec(const LabelRule& rule, const RationalVector& x,
                                           int m) {
    if (x.size() != 3) throw ValidationError("boundary vector must have 3 entries");
    PiecewiseHarmonicSpec f;
    f.base_depth = m;
    enumerate_admissible(rule, m, [&](const Word& v) {
        f.values.emplace(v, mat_vec(detail::word_matrix_unchecked(v), x));
    });
    return f;
}

// λ_⟨f⟩(Σ_w) for |w| ≥ base depth: the energy cylinder of the harmonic piece
// through w's base cell, computed in its shifted environment and scaled by
// the base resistance.
inline Rational piecewise_energy_cylinder(const LabelRule& rule, const PiecewiseHarmonicSpec& f,
                                          const Word& w) {
    validate_piecewise(rule, f);
    if (w.size() < static_cast<std::size_t>(f.base_depth))
        throw ValidationError("word " + word_text(w) + " shorter than the base depth " +
                              std::to_string(f.base_depth));
    if (!rule.is_admissible(w)) return 0;
    Word base(w.begin(), w.begin() + f.base_depth);
    Word tail(w.begin() + f.base_depth, w.end());
    const RationalVector& fv = f.values.at(base);
    Rational qv = q_value(mat_vec(detail::word_matrix_unchecked(tail), fv));
    return 2 * qv /
           (detail::resistance_weight_unchecked(base) *
            detail::resistance_weight_unchecked(tail));
}

// ℰ^(m)(f) = Σ_{v ∈ depth-m cells} r_v^{-1} Q(f at v).
inline Rational finite_level_energy(const LabelRule& rule, const PiecewiseHarmonicSpec& f) {
    validate_piecewise(rule, f);
    Rational total = 0;
    for (const auto& [v, vals] : f.values)
        total += q_value(vals) / detail::resistance_weight_unchecked(v);
    return total;
}

struct CylinderReport {
    Word word;
    Rational q_w;            // per-letter weight product
    Rational r_w;            // resistance scaling along w
    Rational energy_raw;     // Q(A_w x)
    Rational lambda_q;       // reference cylinder mass (= q_w on the tree)
    Rational lambda_energy;  // 2 * energy_raw / r_w
    Rational ratio;          // lambda_energy / lambda_q, 0 when lambda_q = 0
};

inline CylinderReport cylinder_report(const LabelRule& rule, const WeightSystem& q,
                                      const RationalVector& x, const Word& w) {
    if (x.size() != 3) throw ValidationError("boundary vector must have 3 entries");
    rule.require_admissible(w);
    CylinderReport rep;
    rep.word = w;
    rep.q_w = q.word_weight(w);
    rep.r_w = detail::resistance_weight_unchecked(w);
    rep.energy_raw = q_value(mat_vec(detail::word_matrix_unchecked(w), x));
    rep.lambda_q = rep.q_w;
    rep.lambda_energy = 2 * rep.energy_raw / rep.r_w;
    rep.ratio = rep.lambda_q > 0 ? rep.lambda_energy / rep.lambda_q : Rational(0);
    return rep;
}

inline std::string cylinder_tsv_header() {
    return "word\tq_w\tr_w\tlambda_q\tlambda_energy\tratio";
}

inline std::string cylinder_tsv_row(const CylinderReport& rep) {
    return word_text(rep.word) + "\t" + to_string(rep.q_w) + "\t" + to_string(rep.r_w) + "\t" +
           to_string(rep.lambda_q) + "\t" + to_string(rep.lambda_energy) + "\t" +
           to_string(rep.ratio);
}

}  // namespace gasket
