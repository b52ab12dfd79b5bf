#pragma once

// Finite-horizon diagnostics for mutual singularity of the reference measure
// λ_q and the energy measure λ_⟨x⟩: Hellinger-affinity decay across cylinder
// depths, and the martingale criterion's partial sums Σ (1 - E[√α_n | two
// blocks back]) along sampled paths. Everything upstream of the final square
// roots is exact rational arithmetic. Nothing here claims divergence; the
// outputs are finite-horizon growth only.

#include "gasket/measures.hpp"
#include "gasket/rng.hpp"
#include "gasket/words.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace gasket {

struct AffinityEntry {
    int depth = 0;
    std::size_t cylinder_count = 0;
    double affinity = 0.0;  // H_depth
};

struct AffinitySeries {
    std::vector<AffinityEntry> entries;  // depths 0..deepest computed
    Rational normalization = 0;          // total energy mass 2Q(x); 1 on the shell
    int requested_depth = 0;
    bool truncated = false;  // enumeration ceiling stopped the series early
};

namespace detail {

// DFS over admissible depth-m words accumulating sqrt(lambda_q * lambda_E)
// leaf by leaf; the product under the root is exact.
inline void affinity_walk(const LabelRule& rule, Word& w, const WeightSystem& q,
                          const RationalVector& y, const Rational& q_w, const Rational& r_w,
                          int remaining, std::size_t ceiling, std::size_t& leaves, double& acc) {
    if (remaining == 0) {
        if (++leaves > ceiling)
            throw EnumerationLimitError("cylinder enumeration exceeds ceiling of " +
                                        std::to_string(ceiling));
        acc += std::sqrt(to_double(q_w * 2 * q_value(y) / r_w));
        return;
    }
    int nu = rule.label_of_admissible(w);
    const Rational& r = renormalization_constant(nu);
    const auto& mats = extension_matrices(nu);
    for (int i = 1; i <= cell_count(nu); ++i) {
        Letter v{i, nu};
        w.push_back(v);
        affinity_walk(rule, w, q, mat_vec(mats[i - 1].matrix, y), q_w * q.at(v), r_w * r,
                      remaining - 1, ceiling, leaves, acc);
        w.pop_back();
    }
}

}  // namespace detail

// H_m = Σ_{w ∈ depth-m cells} √(λ_q(Σ_w)·λ_⟨x⟩(Σ_w)) for m = 0..m_max.
// Requires 2Q(x) = 1 so that both measures are probabilities and H_m ≤ 1.
// When the enumeration ceiling cuts a depth short, the series ends at the
// last complete depth with the truncation flag set.
inline AffinitySeries hellinger_affinity(const LabelRule& rule, const WeightSystem& q,
                                         const RationalVector& x, int m_max,
                                         std::size_t ceiling = default_enum_ceiling()) {
    if (x.size() != 3) throw ValidationError("boundary vector must have 3 entries");
    if (m_max < 0) throw ValidationError("depth must be nonnegative");
    q.require_levels(rule.level_set());
    AffinitySeries series;
    series.normalization = 2 * q_value(x);
    series.requested_depth = m_max;
    if (series.normalization != 1)
        throw ValidationError("boundary vector must satisfy 2Q(x) = 1, got 2Q(x) = " +
                              to_string(series.normalization));
    for (int m = 0; m <= m_max; ++m) {
        Word scratch;
        std::size_t leaves = 0;
        double acc = 0.0;
        try {
            detail::affinity_walk(rule, scratch, q, x, 1, 1, m, ceiling, leaves, acc);
        } catch (const EnumerationLimitError&) {
            series.truncated = true;
            break;
        }
        series.entries.push_back(AffinityEntry{m, leaves, acc});
    }
    return series;
}

struct MartingaleTrace {
    Word path;
    int block_length = 1;  // letters per filtration step
    int blocks = 0;        // N: z_n defined for n = 0..N
    std::vector<Rational> z;           // density ratio at block boundaries
    std::vector<Rational> alpha;       // z_n·z_{n-2}^⊕, zero for n < 2
    std::vector<double> cond_exp;      // E[√α_n | 𝐁_{n-2}] at the path's atom
    std::vector<double> terms;         // 1 - cond_exp_n for n ≥ 2
    std::vector<double> lemma_rhs;     // (1/8)·Σ_ξ (q_ξ - e_ξ)², 0 on degenerate blocks
    std::vector<double> partial_sums;  // S_n = Σ_{k=2..n} terms_k
    std::vector<bool> degenerate;      // z_{n-2} = 0 (term forced to 1)
};

namespace detail {

struct BlockAccumulator {
    Rational weight_total = 0;   // Σ q_ξ, must come back as 1
    Rational energy_total = 0;   // Σ r_ξ^{-1} Q(A_ξ y), must equal Q(y)
    Rational square_gap = 0;     // Σ (q_ξ - e_ξ)²
    double root_sum = 0.0;       // Σ √(q_ξ e_ξ)
};

inline void block_walk(const LabelRule& rule, Word& w, const WeightSystem& q,
                       const RationalVector& y, const Rational& qy, const Rational& q_xi,
                       const Rational& r_xi, int remaining, std::size_t ceiling,
                       std::size_t& leaves, BlockAccumulator& acc) {
    if (remaining == 0) {
        if (++leaves > ceiling)
            throw EnumerationLimitError("block enumeration exceeds ceiling of " +
                                        std::to_string(ceiling));
        acc.weight_total += q_xi;
        Rational energy = q_value(y) / r_xi;
        acc.energy_total += energy;
        if (qy != 0) {
            Rational e = energy / qy;
            acc.root_sum += std::sqrt(to_double(q_xi * e));
            Rational gap = q_xi - e;
            acc.square_gap += gap * gap;
        }
        return;
    }
    int nu = rule.label_of_admissible(w);
    const Rational& r = renormalization_constant(nu);
    const auto& mats = extension_matrices(nu);
    for (int i = 1; i <= cell_count(nu); ++i) {
        Letter v{i, nu};
        w.push_back(v);
        block_walk(rule, w, q, mat_vec(mats[i - 1].matrix, y), qy, q_xi * q.at(v), r_xi * r,
                   remaining - 1, ceiling, leaves, acc);
        w.pop_back();
    }
}

}  // namespace detail

// Exact per-block evaluation of the criterion along a supplied path. At block
// boundary n with w = path prefix of (n-2) blocks and y = A_w x:
//   E[√α_n | 𝐁_{n-2}](path) = Σ_ξ √(q_ξ·e_ξ),  e_ξ = r_ξ^{-1} Q(A_ξ y)/Q(y),
// summed over every admissible two-block extension ξ of w. Both Σ q_ξ = 1 and
// Σ r_ξ^{-1} Q(A_ξ y) = Q(y) are asserted exactly before the square roots.
// α is invariant under scaling of x, so x need not lie on the unit shell.
inline MartingaleTrace martingale_trace(const LabelRule& rule, const WeightSystem& q,
                                        const RationalVector& x, const Word& path,
                                        int block_length,
                                        std::size_t ceiling = default_enum_ceiling()) {
    if (x.size() != 3) throw ValidationError("boundary vector must have 3 entries");
    if (block_length < 1) throw ValidationError("block length must be positive");
    rule.require_admissible(path);
    q.require_levels(rule.level_set());
    const int n_blocks = static_cast<int>(path.size()) / block_length;
    if (n_blocks < 2)
        throw ValidationError("path of " + std::to_string(path.size()) +
                              " letters is shorter than two blocks of " +
                              std::to_string(block_length));

    MartingaleTrace trace;
    trace.path = path;
    trace.block_length = block_length;
    trace.blocks = n_blocks;
    trace.z.assign(n_blocks + 1, 0);
    trace.alpha.assign(n_blocks + 1, 0);
    trace.cond_exp.assign(n_blocks + 1, 0.0);
    trace.terms.assign(n_blocks + 1, 0.0);
    trace.lemma_rhs.assign(n_blocks + 1, 0.0);
    trace.partial_sums.assign(n_blocks + 1, 0.0);
    trace.degenerate.assign(n_blocks + 1, false);

    // density ratios z_n along the path, built incrementally
    std::vector<RationalVector> y_at(n_blocks + 1);  // A_{[path]_{nM}} x
    RationalVector y = x;
    Rational q_w = 1, r_w = 1;
    y_at[0] = y;
    trace.z[0] = 2 * q_value(y);
    for (int k = 0; k < n_blocks * block_length; ++k) {
        const Letter& l = path[k];
        y = mat_vec(extension_matrices(l.level)[l.index - 1].matrix, y);
        q_w *= q.at(l);
        r_w *= renormalization_constant(l.level);
        if ((k + 1) % block_length == 0) {
            int n = (k + 1) / block_length;
            y_at[n] = y;
            trace.z[n] = 2 * q_value(y) / (r_w * q_w);
        }
    }

    double running = 0.0;
    for (int n = 2; n <= n_blocks; ++n) {
        const Rational& z_back = trace.z[n - 2];
        trace.alpha[n] = z_back == 0 ? Rational(0) : trace.z[n] / z_back;
        Word w(path.begin(), path.begin() + static_cast<std::size_t>(n - 2) * block_length);
        const RationalVector& y_base = y_at[n - 2];
        Rational qy = q_value(y_base);
        trace.degenerate[n] = qy == 0;
        detail::BlockAccumulator acc;
        Word scratch = w;
        std::size_t leaves = 0;
        try {
            detail::block_walk(rule, scratch, q, y_base, qy, 1, 1, 2 * block_length, ceiling,
                               leaves, acc);
        } catch (const EnumerationLimitError& e) {
            throw EnumerationLimitError(std::string(e.what()) +
                                        "; choose a smaller block length");
        }
        if (acc.weight_total != 1)
            throw ConsistencyError("block weights do not sum to 1 at block " + std::to_string(n));
        if (acc.energy_total != qy)
            throw ConsistencyError("block energies do not telescope at block " +
                                   std::to_string(n));
        trace.cond_exp[n] = qy == 0 ? 0.0 : acc.root_sum;
        trace.terms[n] = 1.0 - trace.cond_exp[n];
        trace.lemma_rhs[n] = qy == 0 ? 0.0 : to_double(acc.square_gap) / 8.0;
        running += trace.terms[n];
        trace.partial_sums[n] = running;
    }
    for (int n = 0; n < 2 && n <= n_blocks; ++n) trace.partial_sums[n] = 0.0;
    return trace;
}

inline MartingaleTrace martingale_trace(const LabelRule& rule, const WeightSystem& q,
                                        const RationalVector& x, int path_depth,
                                        int block_length, std::uint64_t seed,
                                        std::size_t ceiling = default_enum_ceiling()) {
    return martingale_trace(rule, q, x, sample_path(rule, q, path_depth, seed), block_length,
                            ceiling);
}

struct GapBoundReport {
    bool applies = false;  // |log(t/s)| ≥ a
    double bound = 0.0;    // (1 - e^{-a})·max(s,t)
};

// When the log-ratio of two positive reals is at least a, their absolute gap
// is at least (1 - e^{-a}) times the larger; asserted, not just reported.
inline GapBoundReport gap_bound(double s, double t, double a) {
    if (!(s > 0) || !(t > 0) || !(a > 0))
        throw ValidationError("gap bound requires positive s, t, a");
    GapBoundReport rep;
    rep.bound = (1.0 - std::exp(-a)) * std::max(s, t);
    rep.applies = std::abs(std::log(t / s)) >= a - 1e-12;
    if (rep.applies && std::abs(t - s) < rep.bound * (1.0 - 1e-9))
        throw ConsistencyError("gap bound violated: |t-s| fell below (1-e^-a)max(s,t)");
    return rep;
}

struct AffinityBoundReport {
    double lhs = 0.0;  // Σ √(a_k b_k)
    double rhs = 0.0;  // 1 - |a-b|²/8
    bool holds = false;
};

// Σ √(a_k b_k) ≤ 1 - |a-b|²/8 for probability vectors; the right side is
// exact before conversion.
inline AffinityBoundReport affinity_upper_bound(const std::vector<Rational>& a,
                                                const std::vector<Rational>& b) {
    if (a.size() != b.size() || a.empty())
        throw ValidationError("probability vectors must share a positive dimension");
    Rational sum_a = 0, sum_b = 0, gap_sq = 0;
    AffinityBoundReport rep;
    for (std::size_t k = 0; k < a.size(); ++k) {
        if (a[k] < 0 || b[k] < 0) throw ValidationError("probability vectors must be nonnegative");
        sum_a += a[k];
        sum_b += b[k];
        Rational gap = a[k] - b[k];
        gap_sq += gap * gap;
        rep.lhs += std::sqrt(to_double(a[k] * b[k]));
    }
    if (sum_a != 1 || sum_b != 1)
        throw ValidationError("probability vectors must sum to 1 exactly");
    rep.rhs = 1.0 - to_double(gap_sq) / 8.0;
    rep.holds = rep.lhs <= rep.rhs + 1e-12;
    return rep;
}

struct CriterionSummary {
    int paths = 0;
    int blocks = 0;
    int block_length = 1;
    std::vector<double> final_sums;  // S_N per path, in path-index order
    double min_sum = 0.0;
    double median_sum = 0.0;
    double max_sum = 0.0;
    std::string caveat;
};

// Aggregates martingale traces over independent λ_q-sampled paths. Path i
// uses the derived seed fold_seed(seed, i), so the result is deterministic
// for a given (seed, num_paths) regardless of thread scheduling.
inline CriterionSummary criterion_summary(const LabelRule& rule, const WeightSystem& q,
                                          const RationalVector& x, int num_paths, int blocks,
                                          int block_length, std::uint64_t seed,
                                          std::size_t ceiling = default_enum_ceiling()) {
    if (num_paths < 1) throw ValidationError("need at least one path");
    if (blocks < 2) throw ValidationError("need at least two blocks");
    CriterionSummary summary;
    summary.paths = num_paths;
    summary.blocks = blocks;
    summary.block_length = block_length;
    summary.final_sums.assign(num_paths, 0.0);
    summary.caveat =
        "finite-horizon growth only: increasing partial sums do not decide divergence";

    const int path_depth = blocks * block_length;
    unsigned workers = std::max(1u, std::min(std::thread::hardware_concurrency(),
                                             static_cast<unsigned>(num_paths)));
    std::exception_ptr failure = nullptr;
    std::mutex failure_lock;
    auto run = [&](unsigned offset) {
        for (int i = static_cast<int>(offset); i < num_paths;
             i += static_cast<int>(workers)) {
            try {
                MartingaleTrace t = martingale_trace(rule, q, x, path_depth, block_length,
                                                     fold_seed(seed, i), ceiling);
                summary.final_sums[i] = t.partial_sums[t.blocks];
            } catch (...) {
                std::lock_guard<std::mutex> hold(failure_lock);
                if (!failure) failure = std::current_exception();
                return;
            }
        }
    };
    if (workers == 1) {
        run(0);
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < workers; ++t) pool.emplace_back(run, t);
        for (auto& th : pool) th.join();
    }
    if (failure) std::rethrow_exception(failure);

    std::vector<double> sorted = summary.final_sums;
    std::sort(sorted.begin(), sorted.end());
    summary.min_sum = sorted.front();
    summary.max_sum = sorted.back();
    std::size_t mid = sorted.size() / 2;
    summary.median_sum = sorted.size() % 2 ? sorted[mid] : 0.5 * (sorted[mid - 1] + sorted[mid]);
    return summary;
}

}  // namespace gasket
