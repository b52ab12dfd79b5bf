#pragma once

// Address words over the letter alphabet "i^ν", label rules assigning a
// subdivision level to every word (which cuts out the admissible tree), the
// reference weight systems, path sampling, and the checkers for the weight
// and label-recurrence conditions used by the singularity diagnostics.

#include "gasket/renorm.hpp"
#include "gasket/rng.hpp"

#include <algorithm>
#include <cstdlib>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace gasket {

struct Letter {
    int index = 1;  // 1-based cell index, 1..cell_count(level)
    int level = 2;

    bool operator==(const Letter&) const = default;
    auto operator<=>(const Letter&) const = default;
};

using Word = std::vector<Letter>;

inline std::string letter_text(const Letter& l) {
    return std::to_string(l.index) + "^" + std::to_string(l.level);
}

// Text form: letters joined by "."; the empty word is "@".
inline std::string word_text(const Word& w) {
    if (w.empty()) return "@";
    std::string s;
    for (std::size_t i = 0; i < w.size(); ++i) {
        if (i) s += ".";
        s += letter_text(w[i]);
    }
    return s;
}

inline Letter letter_from_text(const std::string& text) {
    std::size_t caret = text.find('^');
    if (caret == std::string::npos || caret == 0 || caret + 1 == text.size())
        throw ValidationError("malformed letter \"" + text + "\" (expected i^level)");
    Letter l;
    try {
        l.index = std::stoi(text.substr(0, caret));
        l.level = std::stoi(text.substr(caret + 1));
    } catch (const std::exception&) {
        throw ValidationError("malformed letter \"" + text + "\" (expected i^level)");
    }
    if (l.level < 2 || l.level > kMaxLevel)
        throw ValidationError("letter level out of range in \"" + text + "\"");
    if (l.index < 1 || l.index > cell_count(l.level))
        throw ValidationError("letter index out of range in \"" + text + "\"");
    return l;
}

inline Word word_from_text(const std::string& text) {
    if (text == "@") return {};
    Word w;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t dot = text.find('.', pos);
        std::string part = text.substr(pos, dot == std::string::npos ? dot : dot - pos);
        w.push_back(letter_from_text(part));
        if (dot == std::string::npos) break;
        pos = dot + 1;
    }
    return w;
}

namespace detail {

inline std::vector<int> validated_level_set(std::vector<int> levels, const char* what) {
    std::sort(levels.begin(), levels.end());
    levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
    if (levels.empty()) throw ValidationError(std::string(what) + ": empty level set");
    for (int nu : levels)
        if (nu < 2 || nu > kMaxLevel)
            throw ValidationError(std::string(what) + ": level " + std::to_string(nu) +
                                  " outside 2.." + std::to_string(kMaxLevel));
    return levels;
}

inline std::uint64_t letter_tag(const Letter& l) {
    return static_cast<std::uint64_t>(l.index) * 16u + static_cast<std::uint64_t>(l.level);
}

}  // namespace detail

// Assignment w ↦ level defining the inhomogeneous subdivision. Four variants:
// a constant level, a depth-indexed sequence (cycling or repeating its last
// entry), an explicit word table with a fallback rule, and an i.i.d. random
// draw per word. Random draws are derived from a hash chain over (seed,
// letters), so the rule is a pure value: repeated queries agree within and
// across runs and need no shared mutable state.
class LabelRule {
  public:
    enum class Kind { constant, level_sequence, explicit_map, random_recursive };

    static LabelRule constant(int level) {
        LabelRule r;
        r.levels_ = detail::validated_level_set({level}, "constant rule");
        r.impl_ = Constant{level};
        return r;
    }

    // entries[d] is the level for words of length d (depths beyond the list
    // cycle through it again when `cycle`, otherwise repeat the last entry).
    static LabelRule level_sequence(std::vector<int> entries, bool cycle) {
        if (entries.empty()) throw ValidationError("level sequence: no entries");
        LabelRule r;
        r.levels_ = detail::validated_level_set(entries, "level sequence");
        r.impl_ = LevelSequence{std::move(entries), cycle};
        return r;
    }

    static LabelRule explicit_map(std::map<Word, int> table, LabelRule fallback) {
        LabelRule r;
        std::vector<int> levels = fallback.levels_;
        for (const auto& [w, level] : table) {
            (void)w;
            levels.push_back(level);
        }
        r.levels_ = detail::validated_level_set(std::move(levels), "explicit map rule");
        r.impl_ = ExplicitMap{std::move(table),
                              std::make_shared<const LabelRule>(std::move(fallback))};
        return r;
    }

    static LabelRule random_recursive(std::vector<int> draw_levels, std::vector<Rational> rho,
                                      std::uint64_t seed) {
        if (draw_levels.size() != rho.size())
            throw ValidationError("random rule: distribution size does not match level count");
        std::vector<int> sorted = detail::validated_level_set(draw_levels, "random rule");
        if (sorted != draw_levels)
            throw ValidationError("random rule: levels must be sorted and distinct");
        Rational total = 0;
        for (const auto& p : rho) {
            if (!(p > 0)) throw ValidationError("random rule: distribution entries must be positive");
            total += p;
        }
        if (total != 1) throw ValidationError("random rule: distribution must sum to 1");
        RandomRecursive rr;
        rr.draw_levels = std::move(draw_levels);
        rr.rho = std::move(rho);
        Rational acc = 0;
        for (const auto& p : rr.rho) {
            acc += p;
            rr.cumulative.push_back(to_double(acc));
        }
        rr.cumulative.back() = 1.0;
        rr.seed = seed;
        LabelRule r;
        r.levels_ = sorted;
        r.impl_ = std::move(rr);
        return r;
    }

    Kind kind() const { return static_cast<Kind>(impl_.index()); }

    // The level set T the rule draws from.
    const std::vector<int>& level_set() const { return levels_; }

    // Widen the declared level set (e.g. when a config declares more levels
    // than the rule ever produces).
    LabelRule with_level_set(std::vector<int> levels) const {
        std::vector<int> widened = detail::validated_level_set(std::move(levels), "level set");
        if (!std::includes(widened.begin(), widened.end(), levels_.begin(), levels_.end()))
            throw ValidationError("declared level set does not contain the rule's levels");
        LabelRule r = *this;
        r.levels_ = std::move(widened);
        return r;
    }

    // The rule seen from inside the cell addressed by `base`: label(w) of the
    // shifted rule equals label(base·w) of this one.
    LabelRule shifted(const Word& base) const {
        LabelRule r = *this;
        r.base_.insert(r.base_.end(), base.begin(), base.end());
        return r;
    }

    const Word& environment() const { return base_; }

    // Label of an already-admissible word; skips the admissibility walk.
    int label_of_admissible(const Word& w) const {
        Word full = base_;
        full.insert(full.end(), w.begin(), w.end());
        return label_full(full);
    }

    bool is_admissible(const Word& w, std::size_t* bad_position = nullptr) const {
        Word full = base_;
        std::size_t base_len = full.size();
        full.resize(base_len + w.size());
        for (std::size_t k = 0; k < w.size(); ++k) {
            Word prefix(full.begin(), full.begin() + base_len + k);
            int nu = label_full(prefix);
            if (w[k].level != nu || w[k].index < 1 || w[k].index > cell_count(nu)) {
                if (bad_position) *bad_position = k;
                return false;
            }
            full[base_len + k] = w[k];
        }
        return true;
    }

    void require_admissible(const Word& w) const {
        std::size_t bad = 0;
        if (!is_admissible(w, &bad))
            throw ValidationError("word " + word_text(w) + " inadmissible at position " +
                                  std::to_string(bad + 1) + " (letter " + letter_text(w[bad]) +
                                  ")");
    }

    int label(const Word& w) const {
        require_admissible(w);
        return label_of_admissible(w);
    }

    std::vector<Letter> admissible_children(const Word& w) const {
        int nu = label(w);
        std::vector<Letter> out;
        out.reserve(cell_count(nu));
        for (int i = 1; i <= cell_count(nu); ++i) out.push_back(Letter{i, nu});
        return out;
    }

    // Depth-indexed level for sequence-driven rules (absolute depth, counting
    // the environment shift).
    int sequence_level_at_depth(std::size_t depth) const {
        const auto* seq = std::get_if<LevelSequence>(&impl_);
        if (!seq) throw ValidationError("operation requires a level-sequence rule");
        return sequence_entry(*seq, base_.size() + depth);
    }

    // Canonical one-line form (the config-file grammar).
    std::string describe() const {
        switch (kind()) {
            case Kind::constant:
                return "constant " + std::to_string(std::get<Constant>(impl_).level);
            case Kind::level_sequence: {
                const auto& s = std::get<LevelSequence>(impl_);
                std::string out = "sequence ";
                for (std::size_t i = 0; i < s.entries.size(); ++i) {
                    if (i) out += ",";
                    out += std::to_string(s.entries[i]);
                }
                out += s.cycle ? " cycle" : " repeat-last";
                return out;
            }
            case Kind::explicit_map: {
                const auto& m = std::get<ExplicitMap>(impl_);
                return "map[" + std::to_string(m.table.size()) + " words] fallback " +
                       m.fallback->describe();
            }
            case Kind::random_recursive: {
                const auto& rr = std::get<RandomRecursive>(impl_);
                std::string out = "random ";
                for (std::size_t i = 0; i < rr.rho.size(); ++i) {
                    if (i) out += ",";
                    out += to_string(rr.rho[i]);
                }
                out += " seed " + std::to_string(rr.seed);
                return out;
            }
        }
        return "";
    }

    std::uint64_t random_seed() const {
        const auto* rr = std::get_if<RandomRecursive>(&impl_);
        if (!rr) throw ValidationError("operation requires a random-recursive rule");
        return rr->seed;
    }

    // Draw support and weights of a random-recursive rule, aligned and sorted.
    const std::vector<int>& random_levels() const {
        const auto* rr = std::get_if<RandomRecursive>(&impl_);
        if (!rr) throw ValidationError("operation requires a random-recursive rule");
        return rr->draw_levels;
    }

    const std::vector<Rational>& random_distribution() const {
        const auto* rr = std::get_if<RandomRecursive>(&impl_);
        if (!rr) throw ValidationError("operation requires a random-recursive rule");
        return rr->rho;
    }

    // Same rule with a different random seed (random-recursive only).
    LabelRule reseeded(std::uint64_t seed) const {
        const auto* rr = std::get_if<RandomRecursive>(&impl_);
        if (!rr) throw ValidationError("operation requires a random-recursive rule");
        LabelRule r = *this;
        std::get<RandomRecursive>(r.impl_).seed = seed;
        return r;
    }

  private:
    struct Constant {
        int level;
    };
    struct LevelSequence {
        std::vector<int> entries;
        bool cycle;
    };
    struct ExplicitMap {
        std::map<Word, int> table;
        std::shared_ptr<const LabelRule> fallback;
    };
    struct RandomRecursive {
        std::vector<int> draw_levels;
        std::vector<Rational> rho;
        std::vector<double> cumulative;
        std::uint64_t seed = 0;
    };

    static int sequence_entry(const LevelSequence& s, std::size_t depth) {
        if (depth < s.entries.size()) return s.entries[depth];
        return s.cycle ? s.entries[depth % s.entries.size()] : s.entries.back();
    }

    int label_full(const Word& full) const {
        switch (kind()) {
            case Kind::constant:
                return std::get<Constant>(impl_).level;
            case Kind::level_sequence:
                return sequence_entry(std::get<LevelSequence>(impl_), full.size());
            case Kind::explicit_map: {
                const auto& m = std::get<ExplicitMap>(impl_);
                auto it = m.table.find(full);
                if (it != m.table.end()) return it->second;
                return m.fallback->label_full(full);
            }
            case Kind::random_recursive: {
                const auto& rr = std::get<RandomRecursive>(impl_);
                std::uint64_t h = mix64(rr.seed ^ 0x5347u);  // stream tag
                for (const Letter& l : full) h = mix64(h ^ detail::letter_tag(l));
                double u = static_cast<double>(h >> 11) * 0x1.0p-53;
                std::size_t k = 0;
                while (k + 1 < rr.cumulative.size() && u >= rr.cumulative[k]) ++k;
                return rr.draw_levels[k];
            }
        }
        throw ConsistencyError("unreachable label rule variant");
    }

    std::variant<Constant, LevelSequence, ExplicitMap, RandomRecursive> impl_;
    Word base_;
    std::vector<int> levels_;
};

// Node ceiling for admissible-tree enumerations; GASKET_ENUM_CEILING overrides.
inline std::size_t default_enum_ceiling() {
    static const std::size_t value = [] {
        const char* env = std::getenv("GASKET_ENUM_CEILING");
        if (!env) return static_cast<std::size_t>(10'000'000);
        char* end = nullptr;
        unsigned long long parsed = std::strtoull(env, &end, 10);
        if (end == env || *end != '\0' || parsed == 0)
            throw ValidationError("GASKET_ENUM_CEILING must be a positive integer");
        return static_cast<std::size_t>(parsed);
    }();
    return value;
}

namespace detail {

template <typename Visitor>
void enumerate_rec(const LabelRule& rule, Word& w, int remaining, std::size_t ceiling,
                   std::size_t& count, Visitor&& visit) {
    if (remaining == 0) {
        if (++count > ceiling)
            throw EnumerationLimitError("admissible enumeration exceeds ceiling of " +
                                        std::to_string(ceiling) + " words");
        visit(std::as_const(w));
        return;
    }
    int nu = rule.label_of_admissible(w);
    int n = cell_count(nu);
    for (int i = 1; i <= n; ++i) {
        w.push_back(Letter{i, nu});
        enumerate_rec(rule, w, remaining - 1, ceiling, count, visit);
        w.pop_back();
    }
}

}  // namespace detail

// Visits every admissible word of length m exactly once, in lexicographic
// order (children in cell order). Returns the word count. Throws
// EnumerationLimitError when the count would exceed the ceiling.
template <typename Visitor>
std::size_t enumerate_admissible(const LabelRule& rule, int m, Visitor&& visit,
                                 std::size_t ceiling = default_enum_ceiling()) {
    if (m < 0) throw ValidationError("enumeration depth must be nonnegative");
    Word scratch;
    std::size_t count = 0;
    detail::enumerate_rec(rule, scratch, m, ceiling, count, visit);
    return count;
}

// Visits every admissible extension of `base` by `extra` letters; the visitor
// receives the full word (base followed by the tail).
template <typename Visitor>
std::size_t enumerate_extensions(const LabelRule& rule, const Word& base, int extra,
                                 Visitor&& visit, std::size_t ceiling = default_enum_ceiling()) {
    if (extra < 0) throw ValidationError("extension depth must be nonnegative");
    rule.require_admissible(base);
    Word scratch = base;
    std::size_t count = 0;
    detail::enumerate_rec(rule, scratch, extra, ceiling, count, visit);
    return count;
}

// Per-letter weights q with, for each level ν in scope, Σ_{v∈S^(ν)} q_v = 1
// and every q_v > 0.
class WeightSystem {
  public:
    WeightSystem() = default;

    static WeightSystem uniform(const std::vector<int>& levels) {
        std::map<int, std::vector<Rational>> lists;
        for (int nu : detail::validated_level_set(levels, "weight system"))
            lists[nu] = std::vector<Rational>(cell_count(nu), Rational(1, cell_count(nu)));
        return WeightSystem(std::move(lists));
    }

    explicit WeightSystem(std::map<int, std::vector<Rational>> level_lists) {
        for (const auto& [nu, list] : level_lists) {
            if (nu < 2 || nu > kMaxLevel)
                throw ValidationError("weight system: level " + std::to_string(nu) +
                                      " outside 2.." + std::to_string(kMaxLevel));
            if (list.size() != static_cast<std::size_t>(cell_count(nu)))
                throw ValidationError("weight system: level " + std::to_string(nu) + " needs " +
                                      std::to_string(cell_count(nu)) + " weights, got " +
                                      std::to_string(list.size()));
            Rational total = 0;
            for (const auto& v : list) {
                if (!(v > 0))
                    throw ValidationError("weight system: nonpositive weight at level " +
                                          std::to_string(nu));
                total += v;
            }
            if (total != 1)
                throw ValidationError("weight system: level " + std::to_string(nu) +
                                      " weights sum to " + to_string(total) + ", expected 1");
            levels_.push_back(nu);
        }
        weights_ = std::move(level_lists);
        for (const auto& [nu, list] : weights_) {
            std::vector<double> cum;
            Rational acc = 0;
            for (const auto& v : list) {
                acc += v;
                cum.push_back(to_double(acc));
            }
            cum.back() = 1.0;
            cumulative_[nu] = std::move(cum);
        }
    }

    const std::vector<int>& levels() const { return levels_; }

    bool has_level(int nu) const { return weights_.count(nu) != 0; }

    void require_levels(const std::vector<int>& levels) const {
        for (int nu : levels)
            if (!has_level(nu))
                throw ValidationError("weight system does not cover level " + std::to_string(nu));
    }

    const std::vector<Rational>& level_weights(int nu) const {
        auto it = weights_.find(nu);
        if (it == weights_.end())
            throw ValidationError("weight system does not cover level " + std::to_string(nu));
        return it->second;
    }

    const Rational& at(const Letter& v) const {
        const auto& list = level_weights(v.level);
        if (v.index < 1 || v.index > static_cast<int>(list.size()))
            throw ValidationError("letter " + letter_text(v) + " outside its alphabet");
        return list[v.index - 1];
    }

    Rational word_weight(const Word& w) const {
        Rational p = 1;
        for (const Letter& l : w) p *= at(l);
        return p;
    }

    const std::vector<double>& cumulative(int nu) const {
        auto it = cumulative_.find(nu);
        if (it == cumulative_.end())
            throw ValidationError("weight system does not cover level " + std::to_string(nu));
        return it->second;
    }

  private:
    std::map<int, std::vector<Rational>> weights_;
    std::map<int, std::vector<double>> cumulative_;
    std::vector<int> levels_;
};

// One letter per step: at prefix u, draw v ∈ S^(L_u) with probability q_v.
inline Word sample_path(const LabelRule& rule, const WeightSystem& q, int depth,
                        std::uint64_t seed) {
    if (depth < 0) throw ValidationError("path depth must be nonnegative");
    q.require_levels(rule.level_set());
    SplitMix64 rng(seed);
    Word w;
    w.reserve(depth);
    for (int step = 0; step < depth; ++step) {
        int nu = rule.label_of_admissible(w);
        const auto& cum = q.cumulative(nu);
        double u = rng.next_unit();
        std::size_t k = 0;
        while (k + 1 < cum.size() && u >= cum[k]) ++k;
        w.push_back(Letter{static_cast<int>(k) + 1, nu});
    }
    return w;
}

struct ConditionAReport {
    bool holds = true;
    std::vector<std::pair<int, int>> violations;  // (corner index, level)
};

// Corner weights must avoid the resistance constants: q_{i^ν} ≠ r^(ν).
inline ConditionAReport check_condition_A(const std::vector<int>& levels, const WeightSystem& q) {
    std::vector<int> T = detail::validated_level_set(levels, "level set");
    q.require_levels(T);
    ConditionAReport rep;
    for (int nu : T) {
        const Rational& r = renormalization_constant(nu);
        for (int i = 1; i <= 3; ++i) {
            if (q.at(Letter{i, nu}) == r) {
                rep.holds = false;
                rep.violations.emplace_back(i, nu);
            }
        }
    }
    return rep;
}

struct ConditionBReport {
    int l2 = 0;                        // window length used for coverage, = |T|
    std::size_t coverage_windows = 0;  // k with {τ_{k+1..k+l2}} = T
    std::size_t max_constant_run = 0;
    bool constant_run_applicable = false;  // run of length l1+1 at position ≥ l0+1
    bool holds_up_to_horizon = false;
};

// Finite-horizon evidence for the two sufficient recurrence conditions of
// sequence-driven gaskets: (a) sliding windows of length |T| covering T;
// (b) constant runs long enough that a single-level window works for the
// given (l0, l1). Never a claim beyond the horizon.
inline ConditionBReport check_condition_B_sufficient(const LabelRule& rule, int l0, int l1,
                                                     int horizon) {
    if (rule.kind() != LabelRule::Kind::level_sequence)
        throw ValidationError("condition check requires a level-sequence rule");
    if (l0 < 1 || l1 < 1) throw ValidationError("run lengths l0, l1 must be positive");
    const std::vector<int>& T = rule.level_set();
    int l2 = static_cast<int>(T.size());
    if (horizon < l0 + l1 + l2)
        throw ValidationError("horizon must be at least l0+l1+|T| = " +
                              std::to_string(l0 + l1 + l2));

    // τ_m for m = 1..horizon: the forced level of the m-th letter
    std::vector<int> tau(horizon + 1, 0);
    for (int m = 1; m <= horizon; ++m) tau[m] = rule.sequence_level_at_depth(m - 1);

    ConditionBReport rep;
    rep.l2 = l2;
    for (int k = 0; k + l2 <= horizon; ++k) {
        std::set<int> window(tau.begin() + k + 1, tau.begin() + k + 1 + l2);
        if (std::vector<int>(window.begin(), window.end()) == T) ++rep.coverage_windows;
    }
    int run = 1;
    for (int m = 1; m <= horizon; ++m) {
        if (m > 1 && tau[m] == tau[m - 1]) ++run;
        else run = 1;
        rep.max_constant_run = std::max<std::size_t>(rep.max_constant_run, run);
        // a run of l1+1 equal values ending at m and starting at ≥ l0+1
        if (run >= l1 + 1 && m - l1 >= l0 + 1) rep.constant_run_applicable = true;
    }
    rep.holds_up_to_horizon = rep.coverage_windows > 0 || rep.constant_run_applicable;
    return rep;
}

namespace detail {

struct StarWindows {
    std::set<int> middle;  // levels of positions k+l0+1 .. k+l0+l1
    std::set<int> tail;    // levels of positions k+l0+l1+1 .. k+l0+l1+l2
};

// Forced-level windows after extending [ω]_k by an i-run of length l0 and a
// j-run of length l1+l2. The extension letters always exist (corner cells
// 1..3 are cells of every level), and the levels along it are determined by
// the rule alone.
inline StarWindows star_windows(const LabelRule& rule, const Word& base, int i, int j, int l0,
                                int l1, int l2) {
    StarWindows out;
    Word u = base;
    for (int t = 0; t < l0; ++t) u.push_back(Letter{i, rule.label_of_admissible(u)});
    for (int t = 0; t < l1; ++t) {
        int nu = rule.label_of_admissible(u);
        out.middle.insert(nu);
        u.push_back(Letter{j, nu});
    }
    for (int t = 0; t < l2; ++t) {
        int nu = rule.label_of_admissible(u);
        out.tail.insert(nu);
        u.push_back(Letter{j, nu});
    }
    return out;
}

inline void validate_star_args(const LabelRule& rule, const Word& omega_prefix, int k, int l0,
                               int l1, int l2) {
    if (k < 0 || static_cast<std::size_t>(k) > omega_prefix.size())
        throw ValidationError("prefix shorter than k");
    if (l0 < 1 || l1 < 1 || l2 < 1) throw ValidationError("run lengths must be positive");
    rule.require_admissible(omega_prefix);
}

}  // namespace detail

// The label-recurrence event at position k: for every pair of corners (i,j),
// the levels seen along the j-run of length l1 are all seen again in the
// following window of length l2.
inline bool check_star_event(const LabelRule& rule, const Word& omega_prefix, int k, int l0,
                             int l1, int l2) {
    detail::validate_star_args(rule, omega_prefix, k, l0, l1, l2);
    Word base(omega_prefix.begin(), omega_prefix.begin() + k);
    for (int i = 1; i <= 3; ++i)
        for (int j = 1; j <= 3; ++j) {
            auto win = detail::star_windows(rule, base, i, j, l0, l1, l2);
            if (!std::includes(win.tail.begin(), win.tail.end(), win.middle.begin(),
                               win.middle.end()))
                return false;
        }
    return true;
}

// Stronger coverage variant: every (i,j) tail window must equal the full
// level set T.
inline bool check_coverage_event(const LabelRule& rule, const Word& omega_prefix, int k, int l0,
                                 int l1, int l2) {
    detail::validate_star_args(rule, omega_prefix, k, l0, l1, l2);
    const std::vector<int>& T = rule.level_set();
    Word base(omega_prefix.begin(), omega_prefix.begin() + k);
    for (int i = 1; i <= 3; ++i)
        for (int j = 1; j <= 3; ++j) {
            auto win = detail::star_windows(rule, base, i, j, l0, l1, l2);
            if (std::vector<int>(win.tail.begin(), win.tail.end()) != T) return false;
        }
    return true;
}

}  // namespace gasket
