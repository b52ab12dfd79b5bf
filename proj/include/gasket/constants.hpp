#pragma once

// The constants attached to a gasket family (level set T, weight system q)
// that control the singularity estimates: corner pairings, the minimal
// log-gap between resistance and reference weights, extremal weights, the
// spectral ratio, and the quadratic functional φ(x) = Σ_i (u_i, x)².

#include "gasket/renorm.hpp"
#include "gasket/rng.hpp"
#include "gasket/words.hpp"

#include <cmath>
#include <utility>
#include <vector>

namespace gasket {

// φ(x) = Σ_i (u_i, x)²; since u_i is the i-th column of the symmetric corner
// operator, this is |Dx|². Identically 3Q(x).
inline Rational corner_pairing_sum(const RationalVector& x) {
    if (x.size() != 3) throw ValidationError("boundary vector must have 3 entries");
    RationalVector dx = mat_vec(corner_operator(), x);
    return dx[0] * dx[0] + dx[1] * dx[1] + dx[2] * dx[2];
}

// Exact rational point on the shell {2Q(x) = 1}: rational secant lines
// through (1/4, 1/12) on the conic 12a² + 36b² = 1 in the coordinates
// x = a·(1,-1,0) + b·(1,1,-2), plus a random sign flip.
inline RationalVector sample_unit_energy(SplitMix64& rng) {
    Rational t(static_cast<long>(rng.next_below(4001)) - 2000,
               1 + static_cast<long>(rng.next_below(64)));
    Rational lam = -(1 + t) / (2 * (1 + 3 * t * t));
    Rational a = Rational(1, 4) + lam;
    Rational b = Rational(1, 12) + t * lam;
    if (rng.next() & 1) {
        a = -a;
        b = -b;
    }
    RationalVector x{a + b, -a + b, -2 * b};
    if (2 * q_value(x) != 1) throw ConsistencyError("unit-energy sampler left the shell");
    return x;
}

// Scale x onto the shell {2Q(x) = 1} when the factor 1/√(2Q(x)) is rational,
// i.e. when 2Q(x) = p/q in lowest terms has both p and q perfect squares.
inline RationalVector normalize_to_energy_shell(const RationalVector& x) {
    if (x.size() != 3) throw ValidationError("boundary vector must have 3 entries");
    Rational mass = 2 * q_value(x);
    if (mass == 0) throw ValidationError("cannot normalize a constant boundary vector (energy 0)");
    if (mass == 1) return x;
    BigInt p = numerator(mass), q = denominator(mass);
    BigInt sp = sqrt(p), sq = sqrt(q);
    if (sp * sp != p || sq * sq != q)
        throw ValidationError("boundary vector cannot be scaled onto 2Q(x)=1 exactly; its energy "
                              "mass " +
                              to_string(mass) + " is not a squared rational");
    Rational c(sq, sp);
    return {x[0] * c, x[1] * c, x[2] * c};
}

// min |log(r_v/q_v)| over letters with r_v ≠ q_v; min over the empty set is 1
// by convention. The minimizing ratio is kept exact (normalized to ≥ 1); only
// the final logarithm is floating-point.
struct LogGapInfo {
    double value = 1.0;
    bool vacuous = true;
    Rational extremal_ratio = 1;  // max(ρ, 1/ρ) for the minimizing ρ = r_v/q_v
    Letter witness;
};

inline LogGapInfo log_gap_from_pairs(const std::vector<std::pair<Letter, Rational>>& ratios) {
    LogGapInfo info;
    bool have = false;
    Rational best = 1;
    for (const auto& [letter, ratio] : ratios) {
        if (!(ratio > 0)) throw ValidationError("weight ratios must be positive");
        if (ratio == 1) continue;
        Rational normalized = ratio > 1 ? ratio : 1 / ratio;
        if (!have || normalized < best) {
            have = true;
            best = normalized;
            info.witness = letter;
        }
    }
    if (have) {
        info.vacuous = false;
        info.extremal_ratio = best;
        info.value = std::log(to_double(best));
    }
    return info;
}

struct ConstantsTable {
    std::vector<int> levels;
    Rational pairing_min;        // β₁ = min |(u_i, v_j)|
    LogGapInfo log_gap;          // β₂
    Rational weight_min;         // β₃ = min_v q_v
    Rational resistance_min;     // β₄ = min_ν r^(ν)
    Rational unit_pairing_norm;  // β₅ = 2Q(v_i), the same for every i
    Rational pairing_sum_value;  // β₆: value of φ on the unit-energy shell
    Rational corner_gap;         // δ₀
    Rational shell_cover_bound;  // δ′ = β₆/3
    Rational spectral_ratio;     // θ = max_ν |s^(ν)/r^(ν)|
};

inline ConstantsTable constants_table(const std::vector<int>& T, const WeightSystem& q) {
    std::vector<int> levels = detail::validated_level_set(T, "constants table");
    q.require_levels(levels);

    ConstantsTable table;
    table.levels = levels;

    const SpectralData& sd = spectral_data(levels.front());
    table.pairing_min = abs(dot(sd.u[0], sd.v[0]));
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            Rational p = abs(dot(sd.u[i], sd.v[j]));
            if (p < table.pairing_min) table.pairing_min = p;
        }

    std::vector<std::pair<Letter, Rational>> ratios;
    bool first = true;
    for (int nu : levels) {
        const Rational& r = renormalization_constant(nu);
        for (int i = 1; i <= cell_count(nu); ++i) {
            Letter v{i, nu};
            const Rational& qv = q.at(v);
            ratios.emplace_back(v, r / qv);
            if (first || qv < table.weight_min) table.weight_min = qv;
            first = false;
        }
        if (nu == levels.front() || r < table.resistance_min) table.resistance_min = r;
    }
    table.log_gap = log_gap_from_pairs(ratios);

    table.unit_pairing_norm = 2 * q_value(sd.v[0]);
    for (int i = 1; i < 3; ++i)
        if (2 * q_value(sd.v[i]) != table.unit_pairing_norm)
            throw ConsistencyError("2Q(v_i) differs across corners");

    // φ ≡ 3/2 on the shell; sampled cross-check, abort on any mismatch
    table.pairing_sum_value = Rational(3, 2);
    SplitMix64 rng(0x6a5u);
    for (int t = 0; t < 100; ++t) {
        RationalVector x = sample_unit_energy(rng);
        if (corner_pairing_sum(x) != table.pairing_sum_value)
            throw ConsistencyError("pairing sum is not constant on the unit-energy shell");
    }

    table.corner_gap = Rational(1, 2);
    table.shell_cover_bound = table.pairing_sum_value / 3;

    table.spectral_ratio = 0;
    for (int nu : levels) {
        const SpectralData& s = spectral_data(nu);
        Rational ratio = abs(s.s) / s.r;
        if (ratio > table.spectral_ratio) table.spectral_ratio = ratio;
    }
    if (!(table.spectral_ratio < 1)) throw ConsistencyError("spectral ratio reached 1");

    return table;
}

}  // namespace gasket
