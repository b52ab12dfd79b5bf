#pragma once

// INI-style run configuration: [gasket] declares the level set and label
// rule, [measure] the reference weights, [run] boundary vector and default
// parameters. All rationals parse exactly; every diagnostic carries the line
// (and file, for rule files) it came from.

#include "gasket/words.hpp"

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace gasket {

struct RunConfig {
    std::vector<int> levels{2};
    LabelRule rule = LabelRule::constant(2);
    std::string rule_text = "constant 2";  // canonical grammar string, re-parseable
    WeightSystem q = WeightSystem::uniform({2});
    bool q_uniform = true;
    RationalVector boundary{1, 0, 0};
    std::uint64_t seed = 0;
    int depth = 3;
    std::string out_path = "gasket.svg";
};

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

[[noreturn]] inline void config_error(int line, const std::string& msg) {
    throw ValidationError("config line " + std::to_string(line) + ": " + msg);
}

inline std::vector<std::string> split_list(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string piece;
    std::istringstream in(s);
    while (std::getline(in, piece, sep)) out.push_back(trim(piece));
    if (!s.empty() && s.back() == sep) out.push_back("");
    return out;
}

inline std::vector<std::string> split_tokens(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream in(s);
    std::string tok;
    while (in >> tok) out.push_back(tok);
    return out;
}

inline int parse_config_int(const std::string& s, int line, const std::string& what) {
    try {
        std::size_t used = 0;
        int v = std::stoi(s, &used);
        if (used != s.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        config_error(line, what + ": '" + s + "' is not an integer");
    }
}

inline std::uint64_t parse_config_u64(const std::string& s, int line, const std::string& what) {
    try {
        std::size_t used = 0;
        unsigned long long v = std::stoull(s, &used);
        if (used != s.size() || (!s.empty() && s[0] == '-'))
            throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        config_error(line, what + ": '" + s + "' is not a nonnegative integer");
    }
}

inline std::vector<int> parse_int_list(const std::string& s, int line, const std::string& what) {
    std::vector<int> out;
    for (const std::string& piece : split_list(s, ','))
        out.push_back(parse_config_int(piece, line, what));
    if (out.empty()) config_error(line, what + ": empty list");
    return out;
}

inline std::vector<Rational> parse_rational_list(const std::string& s, int line,
                                                 const std::string& what) {
    std::vector<Rational> out;
    for (const std::string& piece : split_list(s, ',')) {
        try {
            out.push_back(parse_rational(piece));
        } catch (const ValidationError& e) {
            config_error(line, what + ": " + e.what());
        }
    }
    if (out.empty()) config_error(line, what + ": empty list");
    return out;
}

inline std::string resolve_path(const std::string& path, const std::string& base_dir) {
    std::filesystem::path p(path);
    if (p.is_absolute() || base_dir.empty()) return path;
    return (std::filesystem::path(base_dir) / p).string();
}

inline std::vector<std::string> read_data_lines(const std::string& path, int line,
                                                const char* kind) {
    std::ifstream in(path);
    if (!in) config_error(line, std::string("cannot open ") + kind + " file " + path);
    std::vector<std::string> lines;
    std::string raw;
    while (std::getline(in, raw)) lines.push_back(raw);
    return lines;
}

// Rule grammar (documented in the README):
//   constant N
//   sequence N1,N2,... [cycle|repeat-last]
//   sequence-file PATH [cycle|repeat-last]
//   map-file PATH fallback <rule...>
//   random p1,p2,... [seed N]
inline LabelRule parse_rule_tokens(const std::vector<std::string>& tokens, std::size_t pos,
                                   int line, const std::string& base_dir,
                                   const std::vector<int>& levels, std::string* canonical) {
    if (pos >= tokens.size()) config_error(line, "rule: missing rule kind");
    const std::string& kind = tokens[pos];

    auto sequence_mode = [&](std::size_t mode_pos, bool* cycle) -> std::size_t {
        *cycle = true;
        if (mode_pos < tokens.size()) {
            if (tokens[mode_pos] == "cycle") return mode_pos + 1;
            if (tokens[mode_pos] == "repeat-last") {
                *cycle = false;
                return mode_pos + 1;
            }
            config_error(line, "rule: expected 'cycle' or 'repeat-last', got '" +
                                   tokens[mode_pos] + "'");
        }
        return mode_pos;
    };
    auto expect_end = [&](std::size_t next) {
        if (next < tokens.size())
            config_error(line, "rule: unexpected trailing token '" + tokens[next] + "'");
    };

    try {
        if (kind == "constant") {
            if (pos + 1 >= tokens.size()) config_error(line, "rule: constant needs a level");
            int level = parse_config_int(tokens[pos + 1], line, "rule level");
            expect_end(pos + 2);
            LabelRule r = LabelRule::constant(level);
            *canonical = r.describe();
            return r;
        }
        if (kind == "sequence") {
            if (pos + 1 >= tokens.size()) config_error(line, "rule: sequence needs entries");
            std::vector<int> entries = parse_int_list(tokens[pos + 1], line, "rule entries");
            bool cycle = true;
            expect_end(sequence_mode(pos + 2, &cycle));
            LabelRule r = LabelRule::level_sequence(std::move(entries), cycle);
            *canonical = r.describe();
            return r;
        }
        if (kind == "sequence-file") {
            if (pos + 1 >= tokens.size()) config_error(line, "rule: sequence-file needs a path");
            std::string path = resolve_path(tokens[pos + 1], base_dir);
            bool cycle = true;
            expect_end(sequence_mode(pos + 2, &cycle));
            std::vector<int> entries;
            int file_line = 0;
            for (const std::string& raw : read_data_lines(path, line, "sequence")) {
                ++file_line;
                std::string t = trim(raw);
                if (t.empty() || t[0] == '#' || t[0] == ';') continue;
                try {
                    entries.push_back(parse_config_int(t, line, "level"));
                } catch (const ValidationError&) {
                    config_error(line, "sequence file " + path + " line " +
                                           std::to_string(file_line) + ": '" + t +
                                           "' is not an integer");
                }
            }
            if (entries.empty()) config_error(line, "sequence file " + path + " has no entries");
            LabelRule r = LabelRule::level_sequence(std::move(entries), cycle);
            *canonical = std::string("sequence-file ") + tokens[pos + 1] +
                         (cycle ? " cycle" : " repeat-last");
            return r;
        }
        if (kind == "map-file") {
            if (pos + 1 >= tokens.size()) config_error(line, "rule: map-file needs a path");
            std::string path = resolve_path(tokens[pos + 1], base_dir);
            if (pos + 2 >= tokens.size() || tokens[pos + 2] != "fallback")
                config_error(line, "rule: map-file needs 'fallback <rule>' after the path");
            std::string fallback_text;
            LabelRule fallback =
                parse_rule_tokens(tokens, pos + 3, line, base_dir, levels, &fallback_text);
            std::map<Word, int> table;
            int file_line = 0;
            for (const std::string& raw : read_data_lines(path, line, "map")) {
                ++file_line;
                std::string t = trim(raw);
                if (t.empty() || t[0] == '#' || t[0] == ';') continue;
                std::size_t tab = t.find('\t');
                if (tab == std::string::npos)
                    config_error(line, "map file " + path + " line " + std::to_string(file_line) +
                                           ": expected 'word<TAB>level'");
                try {
                    Word w = word_from_text(trim(t.substr(0, tab)));
                    int level = parse_config_int(trim(t.substr(tab + 1)), line, "level");
                    if (table.count(w))
                        config_error(line, "map file " + path + " line " +
                                               std::to_string(file_line) + ": duplicate word");
                    table[w] = level;
                } catch (const ValidationError& e) {
                    config_error(line, "map file " + path + " line " + std::to_string(file_line) +
                                           ": " + e.what());
                }
            }
            LabelRule r = LabelRule::explicit_map(std::move(table), std::move(fallback));
            *canonical =
                std::string("map-file ") + tokens[pos + 1] + " fallback " + fallback_text;
            return r;
        }
        if (kind == "random") {
            if (pos + 1 >= tokens.size()) config_error(line, "rule: random needs weights");
            std::vector<Rational> rho = parse_rational_list(tokens[pos + 1], line, "rule weights");
            std::uint64_t seed = 0;
            std::size_t next = pos + 2;
            if (next < tokens.size()) {
                if (tokens[next] != "seed")
                    config_error(line, "rule: expected 'seed N', got '" + tokens[next] + "'");
                if (next + 1 >= tokens.size()) config_error(line, "rule: seed needs a value");
                seed = parse_config_u64(tokens[next + 1], line, "rule seed");
                next += 2;
            }
            expect_end(next);
            LabelRule r = LabelRule::random_recursive(levels, std::move(rho), seed);
            *canonical = r.describe();
            return r;
        }
    } catch (const ValidationError& e) {
        std::string msg = e.what();
        if (msg.rfind("config line", 0) == 0) throw;  // already line-tagged
        config_error(line, msg);
    }
    config_error(line, "rule: unknown rule kind '" + kind + "'");
}

}  // namespace detail

inline RunConfig parse_config(const std::string& text, const std::string& base_dir = "") {
    using Entry = std::pair<std::string, int>;  // value, line
    std::map<std::string, std::map<std::string, Entry>> sections;
    const std::vector<std::string> known_sections{"gasket", "measure", "run"};

    std::istringstream in(text);
    std::string raw;
    std::string section;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        std::string t = detail::trim(raw);
        if (t.empty() || t[0] == '#' || t[0] == ';') continue;
        if (t.front() == '[') {
            if (t.back() != ']') detail::config_error(line, "unterminated section header");
            section = detail::trim(t.substr(1, t.size() - 2));
            if (std::find(known_sections.begin(), known_sections.end(), section) ==
                known_sections.end())
                detail::config_error(line, "unknown section [" + section + "]");
            continue;
        }
        std::size_t eq = t.find('=');
        if (eq == std::string::npos) detail::config_error(line, "expected 'key = value'");
        if (section.empty()) detail::config_error(line, "key before any [section]");
        std::string key = detail::trim(t.substr(0, eq));
        std::string value = detail::trim(t.substr(eq + 1));
        if (key.empty()) detail::config_error(line, "empty key");
        if (sections[section].count(key))
            detail::config_error(line, "duplicate key '" + key + "' in [" + section + "]");
        sections[section][key] = {value, line};
    }

    auto check_known_keys = [&](const std::string& sec, auto&& allowed) {
        auto it = sections.find(sec);
        if (it == sections.end()) return;
        for (const auto& [key, entry] : it->second)
            if (!allowed(key))
                detail::config_error(entry.second,
                                     "unknown key '" + key + "' in [" + sec + "]");
    };
    check_known_keys("gasket",
                     [](const std::string& k) { return k == "levels" || k == "rule"; });
    check_known_keys("measure", [](const std::string& k) {
        if (k == "q") return true;
        if (k.size() < 2 || k[0] != 'q') return false;
        return k.find_first_not_of("0123456789", 1) == std::string::npos;
    });
    check_known_keys("run", [](const std::string& k) {
        return k == "boundary" || k == "seed" || k == "depth" || k == "out";
    });

    RunConfig cfg;

    // [gasket]
    auto gasket = sections.find("gasket");
    if (gasket == sections.end() || !gasket->second.count("levels"))
        throw ValidationError("config: missing required key 'levels' in [gasket]");
    if (!gasket->second.count("rule"))
        throw ValidationError("config: missing required key 'rule' in [gasket]");
    {
        const auto& [value, vline] = gasket->second.at("levels");
        std::vector<int> raw_levels = detail::parse_int_list(value, vline, "levels");
        try {
            cfg.levels = detail::validated_level_set(std::move(raw_levels), "levels");
        } catch (const ValidationError& e) {
            detail::config_error(vline, e.what());
        }
    }
    {
        const auto& [value, vline] = gasket->second.at("rule");
        std::vector<std::string> tokens = detail::split_tokens(value);
        cfg.rule = detail::parse_rule_tokens(tokens, 0, vline, base_dir, cfg.levels,
                                             &cfg.rule_text);
        try {
            if (cfg.rule.level_set() != cfg.levels) cfg.rule = cfg.rule.with_level_set(cfg.levels);
        } catch (const ValidationError& e) {
            detail::config_error(vline, e.what());
        }
    }

    // [measure]
    cfg.q_uniform = true;
    std::map<int, std::vector<Rational>> q_rows;
    if (auto measure = sections.find("measure"); measure != sections.end()) {
        for (const auto& [key, entry] : measure->second) {
            const auto& [value, vline] = entry;
            if (key == "q") {
                if (value != "uniform")
                    detail::config_error(vline,
                                         "q: use 'uniform' or per-level rows like q2 = ...");
            } else {
                int nu = detail::parse_config_int(key.substr(1), vline, "weight level");
                q_rows[nu] = detail::parse_rational_list(value, vline, key);
            }
        }
        if (!q_rows.empty() && measure->second.count("q"))
            throw ValidationError("config: give either q = uniform or qN rows, not both");
    }
    if (q_rows.empty()) {
        cfg.q = WeightSystem::uniform(cfg.levels);
    } else {
        cfg.q_uniform = false;
        for (int nu : cfg.levels)
            if (!q_rows.count(nu))
                throw ValidationError("config: missing weights q" + std::to_string(nu) +
                                      " for level " + std::to_string(nu));
        for (const auto& [nu, row] : q_rows) {
            (void)row;
            if (std::find(cfg.levels.begin(), cfg.levels.end(), nu) == cfg.levels.end())
                throw ValidationError("config: weights q" + std::to_string(nu) +
                                      " for a level outside T");
        }
        cfg.q = WeightSystem(std::move(q_rows));
    }

    // [run]
    if (auto run = sections.find("run"); run != sections.end()) {
        if (auto it = run->second.find("boundary"); it != run->second.end()) {
            const auto& [value, vline] = it->second;
            cfg.boundary = detail::parse_rational_list(value, vline, "boundary");
            if (cfg.boundary.size() != 3)
                detail::config_error(vline, "boundary needs exactly 3 entries");
        }
        if (auto it = run->second.find("seed"); it != run->second.end())
            cfg.seed = detail::parse_config_u64(it->second.first, it->second.second, "seed");
        if (auto it = run->second.find("depth"); it != run->second.end()) {
            cfg.depth = detail::parse_config_int(it->second.first, it->second.second, "depth");
            if (cfg.depth < 0) detail::config_error(it->second.second, "depth must be >= 0");
        }
        if (auto it = run->second.find("out"); it != run->second.end())
            cfg.out_path = it->second.first;
    }

    return cfg;
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open config file " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str(), std::filesystem::path(path).parent_path().string());
}

inline std::string serialize_config(const RunConfig& cfg) {
    std::string s = "[gasket]\nlevels = ";
    for (std::size_t i = 0; i < cfg.levels.size(); ++i)
        s += (i ? "," : "") + std::to_string(cfg.levels[i]);
    s += "\nrule = " + cfg.rule_text + "\n\n[measure]\n";
    if (cfg.q_uniform) {
        s += "q = uniform\n";
    } else {
        for (int nu : cfg.levels) {
            s += "q" + std::to_string(nu) + " = ";
            const auto& row = cfg.q.level_weights(nu);
            for (std::size_t i = 0; i < row.size(); ++i)
                s += (i ? "," : "") + to_string(row[i]);
            s += "\n";
        }
    }
    s += "\n[run]\nboundary = " + to_string(cfg.boundary[0]) + "," + to_string(cfg.boundary[1]) +
         "," + to_string(cfg.boundary[2]) + "\nseed = " + std::to_string(cfg.seed) +
         "\ndepth = " + std::to_string(cfg.depth) + "\nout = " + cfg.out_path + "\n";
    return s;
}

}  // namespace gasket
