#pragma once

// Random recursive gaskets: i.i.d. level draws per word, detection of the
// coverage event behind the label-recurrence condition (after an i-run of
// length l0 and a j-run of length l1, the next #T forced levels cover T, for
// all nine corner pairs), and a Monte Carlo check of its closed-form
// probability (#T!·Π_ν ρ(ν))^9.

#include "gasket/rng.hpp"
#include "gasket/words.hpp"

#include <cmath>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace gasket {

struct LevelDistribution {
    std::vector<int> levels;    // support, sorted distinct
    std::vector<Rational> rho;  // aligned positive weights summing to 1

    LevelDistribution(std::vector<int> levels_in, std::vector<Rational> rho_in)
        : levels(std::move(levels_in)), rho(std::move(rho_in)) {
        std::vector<int> sorted = detail::validated_level_set(levels, "level distribution");
        if (sorted != levels)
            throw ValidationError("level distribution: levels must be sorted and distinct");
        if (rho.size() != levels.size())
            throw ValidationError("level distribution: weight count does not match levels");
        Rational total = 0;
        for (const auto& p : rho) {
            if (!(p > 0))
                throw ValidationError("level distribution: weights must be positive (full support)");
            total += p;
        }
        if (total != 1) throw ValidationError("level distribution: weights must sum to 1");
    }

    static LevelDistribution uniform(std::vector<int> levels_in) {
        std::size_t n = levels_in.size();
        if (n == 0) throw ValidationError("level distribution: empty level set");
        return LevelDistribution(std::move(levels_in),
                                 std::vector<Rational>(n, Rational(1, static_cast<long>(n))));
    }

    LabelRule rule(std::uint64_t seed) const {
        return LabelRule::random_recursive(levels, rho, seed);
    }
};

// (#T!·Π_ν ρ(ν))^9: the probability that all nine coverage windows of length
// #T enumerate T exactly (each window is a fresh i.i.d. block).
inline Rational coverage_event_probability(const LevelDistribution& dist) {
    Rational per_window = 1;
    for (const auto& p : dist.rho) per_window *= p;
    for (std::size_t i = 2; i <= dist.levels.size(); ++i)
        per_window *= static_cast<long>(i);
    Rational p = 1;
    for (int t = 0; t < 9; ++t) p *= per_window;
    return p;
}

// The coverage event at position k with the window length fixed to #T.
inline bool detect_U_event(const LabelRule& labels, const Word& omega_prefix, int k, int l0,
                           int l1) {
    return check_coverage_event(labels, omega_prefix, k, l0, l1,
                                static_cast<int>(labels.level_set().size()));
}

struct EventEstimate {
    int k = 0;
    int l0 = 1;
    int l1 = 1;
    int l2 = 1;
    std::size_t trials = 0;
    std::size_t hits = 0;
    double p_hat = 0.0;
    Rational p_exact = 0;
    double sigma = 0.0;  // binomial sd of p_hat under p_exact
    double interval_lo = 0.0;
    double interval_hi = 0.0;
    bool within_three_sigma = false;
};

namespace detail {

// Deterministic parallel trial loop: trial t derives its own seeds, worker
// results are summed, so the outcome is independent of scheduling.
template <typename Trial>
std::size_t count_hits(std::size_t trials, unsigned threads, Trial&& trial) {
    unsigned workers =
        std::max(1u, std::min(threads, static_cast<unsigned>(std::min<std::size_t>(
                                           trials, 64))));
    std::vector<std::size_t> counts(workers, 0);
    std::exception_ptr failure = nullptr;
    std::mutex failure_lock;
    auto run = [&](unsigned w) {
        std::size_t local = 0;
        try {
            for (std::size_t t = w; t < trials; t += workers)
                if (trial(t)) ++local;
        } catch (...) {
            std::lock_guard<std::mutex> hold(failure_lock);
            if (!failure) failure = std::current_exception();
        }
        counts[w] = local;
    };
    if (workers == 1) {
        run(0);
    } else {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(run, w);
        for (auto& th : pool) th.join();
    }
    if (failure) std::rethrow_exception(failure);
    std::size_t total = 0;
    for (std::size_t c : counts) total += c;
    return total;
}

}  // namespace detail

// Monte Carlo estimate of the coverage-event probability. Each trial draws a
// fresh label environment and a fresh k-letter path prefix (two derived
// seeds), then evaluates the event.
inline EventEstimate estimate_event_probability(
    const LevelDistribution& dist, const WeightSystem& q, int l0, int l1, int k,
    std::size_t trials, std::uint64_t seed,
    unsigned threads = std::thread::hardware_concurrency()) {
    if (trials < 1) throw ValidationError("need at least one trial");
    if (k < 0) throw ValidationError("position k must be nonnegative");
    if (l0 < 1 || l1 < 1) throw ValidationError("run lengths must be positive");
    q.require_levels(dist.levels);

    EventEstimate est;
    est.k = k;
    est.l0 = l0;
    est.l1 = l1;
    est.l2 = static_cast<int>(dist.levels.size());
    est.trials = trials;
    est.p_exact = coverage_event_probability(dist);

    const LabelRule proto = dist.rule(0);
    est.hits = detail::count_hits(trials, threads, [&](std::size_t t) {
        LabelRule labels = proto.reseeded(fold_seed(seed, 2 * t));
        Word prefix = sample_path(labels, q, k, fold_seed(seed, 2 * t + 1));
        return detect_U_event(labels, prefix, k, l0, l1);
    });

    est.p_hat = static_cast<double>(est.hits) / static_cast<double>(trials);
    double p = to_double(est.p_exact);
    est.sigma = std::sqrt(p * (1.0 - p) / static_cast<double>(trials));
    est.interval_lo = p - 3.0 * est.sigma;
    est.interval_hi = p + 3.0 * est.sigma;
    est.within_three_sigma = est.p_hat >= est.interval_lo && est.p_hat <= est.interval_hi;
    return est;
}

inline std::string event_estimate_text(const EventEstimate& e) {
    std::string out = "k\ttrials\thits\tp_hat\tp_exact\tverdict\n";
    out += std::to_string(e.k) + "\t" + std::to_string(e.trials) + "\t" +
           std::to_string(e.hits) + "\t" + format_double17(e.p_hat) + "\t" +
           to_string(e.p_exact) + "\t" + (e.within_three_sigma ? "pass" : "fail");
    return out;
}

struct StarFrequencyTable {
    std::vector<int> ks;
    std::vector<std::size_t> hits;     // aligned with ks
    std::vector<double> frequency;     // hits / trials
    std::size_t trials = 0;
    bool coverage_mode = true;  // window length equals #T
    Rational p_exact = 0;       // coverage probability when in coverage mode
};

// Empirical frequency of the recurrence event along sampled paths, tabulated
// over k = 0, stride, 2·stride, … ≤ path_depth. Window length #T uses the
// exact-coverage test; other lengths fall back to the inclusion test.
inline StarFrequencyTable star_frequency(const LevelDistribution& dist, const WeightSystem& q,
                                         int l0, int l1, int l2, int path_depth, int stride,
                                         std::size_t trials, std::uint64_t seed,
                                         unsigned threads = std::thread::hardware_concurrency()) {
    if (trials < 1) throw ValidationError("need at least one trial");
    if (stride < 1) throw ValidationError("stride must be positive");
    if (path_depth < 0) throw ValidationError("path depth must be nonnegative");
    if (l0 < 1 || l1 < 1 || l2 < 1) throw ValidationError("run lengths must be positive");
    q.require_levels(dist.levels);

    StarFrequencyTable table;
    table.trials = trials;
    table.coverage_mode = l2 == static_cast<int>(dist.levels.size());
    if (table.coverage_mode) table.p_exact = coverage_event_probability(dist);
    for (int k = 0; k <= path_depth; k += stride) table.ks.push_back(k);
    table.hits.assign(table.ks.size(), 0);

    const LabelRule proto = dist.rule(0);
    for (std::size_t idx = 0; idx < table.ks.size(); ++idx) {
        int k = table.ks[idx];
        table.hits[idx] = detail::count_hits(trials, threads, [&](std::size_t t) {
            LabelRule labels = proto.reseeded(fold_seed(seed, 2 * t));
            Word path = sample_path(labels, q, path_depth, fold_seed(seed, 2 * t + 1));
            return table.coverage_mode ? check_coverage_event(labels, path, k, l0, l1, l2)
                                       : check_star_event(labels, path, k, l0, l1, l2);
        });
        table.frequency.push_back(static_cast<double>(table.hits[idx]) /
                                  static_cast<double>(trials));
    }
    return table;
}

}  // namespace gasket
