#pragma once

// Subcommand dispatch. Every command is deterministic given config + seed.
// Exit codes: 0 success, 1 validation/usage error, 2 internal-consistency
// failure. --machine switches reports from text to JSON with the same field
// names.

#include "gasket/config.hpp"
#include "gasket/constants.hpp"
#include "gasket/render.hpp"
#include "gasket/rsg.hpp"
#include "gasket/singularity.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdint>
#include <fstream>
#include <ostream>
#include <string>
#include <vector>

namespace gasket {

namespace detail {

using nlohmann::json;

inline RationalVector parse_boundary_flag(const std::string& text) {
    std::vector<std::string> pieces = split_list(text, ',');
    if (pieces.size() != 3)
        throw ValidationError("--boundary needs exactly 3 comma-separated rationals");
    RationalVector v;
    for (const std::string& p : pieces) v.push_back(parse_rational(p));
    return v;
}

inline json log_gap_json(const LogGapInfo& info) {
    json j{{"value", info.value},
           {"vacuous", info.vacuous},
           {"extremal_ratio", to_string(info.extremal_ratio)}};
    if (!info.vacuous) j["witness"] = letter_text(info.witness);
    return j;
}

inline std::string yes_no(bool b) { return b ? "yes" : "no"; }

}  // namespace detail

inline int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    using detail::json;

    CLI::App app{"exact measures and singularity diagnostics on inhomogeneous gaskets", "gasket"};
    app.require_subcommand(1);
    bool machine = false;
    app.add_flag("--machine", machine, "emit JSON records instead of text");

    auto* c_renorm =
        app.add_subcommand("renorm", "renormalization constant of a subdivision level");
    c_renorm->fallthrough();
    int renorm_nu = 0;
    bool renorm_all = false;
    c_renorm->add_option("--nu", renorm_nu, "subdivision level (2..12)");
    c_renorm->add_flag("--all", renorm_all, "print r for every level 2..12");

    auto* c_extend = app.add_subcommand("extend", "harmonic extension matrix of one cell");
    c_extend->fallthrough();
    int extend_nu = 0, extend_cell = 0;
    c_extend->add_option("--nu", extend_nu, "subdivision level (2..12)")->required();
    c_extend->add_option("--cell", extend_cell, "cell index (1..N)")->required();

    auto* c_constants =
        app.add_subcommand("constants", "singularity-estimate constants of a configuration");
    c_constants->fallthrough();
    std::string constants_config;
    c_constants->add_option("--config", constants_config, "config file")->required();

    auto* c_cylinders = app.add_subcommand(
        "cylinders", "per-cylinder reference and energy measures at a fixed depth");
    c_cylinders->fallthrough();
    std::string cylinders_config, cylinders_boundary;
    int cylinders_depth = -1;
    c_cylinders->add_option("--config", cylinders_config, "config file")->required();
    c_cylinders->add_option("--depth", cylinders_depth, "cylinder depth");
    c_cylinders->add_option("--boundary", cylinders_boundary, "boundary vector a,b,c");

    auto* c_hellinger =
        app.add_subcommand("hellinger", "Hellinger affinity series of the two measures");
    c_hellinger->fallthrough();
    std::string hellinger_config, hellinger_boundary;
    int hellinger_depth = 8;
    c_hellinger->add_option("--config", hellinger_config, "config file")->required();
    c_hellinger->add_option("--max-depth", hellinger_depth, "deepest level to evaluate");
    c_hellinger->add_option("--boundary", hellinger_boundary, "boundary vector a,b,c");

    auto* c_martingale =
        app.add_subcommand("martingale", "density-ratio martingale criterion along paths");
    c_martingale->fallthrough();
    std::string martingale_config, martingale_boundary;
    int martingale_paths = 1, martingale_blocks = 8, martingale_block_len = 1;
    std::uint64_t martingale_seed = 0;
    c_martingale->add_option("--config", martingale_config, "config file")->required();
    c_martingale->add_option("--paths", martingale_paths, "number of sampled paths");
    c_martingale->add_option("--blocks", martingale_blocks, "filtration blocks per path");
    c_martingale->add_option("--block-len", martingale_block_len, "letters per block");
    c_martingale->add_option("--seed", martingale_seed, "path-sampling seed");
    c_martingale->add_option("--boundary", martingale_boundary, "boundary vector a,b,c");

    auto* c_cond_a =
        app.add_subcommand("condition-a", "corner weights avoid the resistance constants");
    c_cond_a->fallthrough();
    std::string cond_a_config;
    c_cond_a->add_option("--config", cond_a_config, "config file")->required();

    auto* c_cond_b = app.add_subcommand(
        "condition-b", "finite-horizon coverage evidence for a sequence rule");
    c_cond_b->fallthrough();
    std::string cond_b_config;
    int cond_b_l0 = 1, cond_b_l1 = 1, cond_b_horizon = 64;
    c_cond_b->add_option("--config", cond_b_config, "config file")->required();
    c_cond_b->add_option("--l0", cond_b_l0, "offset run length");
    c_cond_b->add_option("--l1", cond_b_l1, "middle run length");
    c_cond_b->add_option("--horizon", cond_b_horizon, "depth horizon to scan");

    auto* c_rsg = app.add_subcommand(
        "rsg-prob", "Monte Carlo check of the coverage-event probability");
    c_rsg->fallthrough();
    std::string rsg_config;
    int rsg_l0 = 1, rsg_l1 = 1, rsg_k = 0;
    std::uint64_t rsg_trials = 100000, rsg_seed = 0;
    c_rsg->add_option("--config", rsg_config, "config file (random rule)")->required();
    c_rsg->add_option("--trials", rsg_trials, "Monte Carlo trials");
    c_rsg->add_option("--l0", rsg_l0, "offset run length");
    c_rsg->add_option("--l1", rsg_l1, "middle run length");
    c_rsg->add_option("--k", rsg_k, "position along the path");
    c_rsg->add_option("--seed", rsg_seed, "trial seed");

    auto* c_render = app.add_subcommand("render", "SVG picture of the depth-m decomposition");
    c_render->fallthrough();
    std::string render_config, render_out, render_color = "ratio", render_boundary;
    int render_depth = -1;
    c_render->add_option("--config", render_config, "config file")->required();
    c_render->add_option("--depth", render_depth, "subdivision depth");
    c_render->add_option("--out", render_out, "output SVG path");
    c_render->add_option("--color-by", render_color, "cell coloring")
        ->check(CLI::IsMember({"ratio", "uniform"}));
    c_render->add_option("--boundary", render_boundary, "boundary vector a,b,c");

    std::vector<const char*> argv;
    argv.push_back("gasket");
    for (const std::string& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e, out, err);
        return code == 0 ? 0 : 1;
    }

    try {
        if (c_renorm->parsed()) {
            if (renorm_all) {
                json list = json::array();
                for (int nu = 2; nu <= kMaxLevel; ++nu) {
                    const Rational& r = renormalization_constant(nu);
                    if (machine)
                        list.push_back({{"nu", nu}, {"r", to_string(r)}});
                    else
                        out << "r(" << nu << ") = " << to_string(r) << "\n";
                }
                if (machine) out << list.dump(2) << "\n";
            } else {
                if (c_renorm->count("--nu") == 0)
                    throw ValidationError("renorm: give --nu N or --all");
                const Rational& r = renormalization_constant(renorm_nu);
                if (machine)
                    out << json{{"nu", renorm_nu}, {"r", to_string(r)}}.dump(2) << "\n";
                else
                    out << "r(" << renorm_nu << ") = " << to_string(r) << "\n";
            }
        } else if (c_extend->parsed()) {
            const std::vector<ExtensionMatrix>& mats = extension_matrices(extend_nu);
            if (extend_cell < 1 || extend_cell > static_cast<int>(mats.size()))
                throw ValidationError("cell index " + std::to_string(extend_cell) +
                                      " outside 1.." + std::to_string(mats.size()));
            const RationalMatrix& A = mats[extend_cell - 1].matrix;
            if (machine) {
                json rows = json::array();
                for (int i = 0; i < 3; ++i) {
                    json row = json::array();
                    for (int j = 0; j < 3; ++j) row.push_back(to_string(A.at(i, j)));
                    rows.push_back(row);
                }
                out << json{{"nu", extend_nu}, {"cell", extend_cell}, {"rows", rows}}.dump(2)
                    << "\n";
            } else {
                for (int i = 0; i < 3; ++i) {
                    for (int j = 0; j < 3; ++j) out << (j ? "\t" : "") << to_string(A.at(i, j));
                    out << "\n";
                }
            }
        } else if (c_constants->parsed()) {
            RunConfig cfg = load_config(constants_config);
            ConstantsTable table = constants_table(cfg.levels, cfg.q);
            if (machine) {
                json j{{"levels", table.levels},
                       {"pairing_min", to_string(table.pairing_min)},
                       {"log_gap", detail::log_gap_json(table.log_gap)},
                       {"weight_min", to_string(table.weight_min)},
                       {"resistance_min", to_string(table.resistance_min)},
                       {"unit_pairing_norm", to_string(table.unit_pairing_norm)},
                       {"pairing_sum_value", to_string(table.pairing_sum_value)},
                       {"corner_gap", to_string(table.corner_gap)},
                       {"shell_cover_bound", to_string(table.shell_cover_bound)},
                       {"spectral_ratio", to_string(table.spectral_ratio)}};
                out << j.dump(2) << "\n";
            } else {
                out << "levels =";
                for (int nu : table.levels) out << " " << nu;
                out << "\n";
                if (table.log_gap.vacuous)
                    out << "log_gap = 1 (vacuous: every r_v equals q_v)\n";
                else
                    out << "log_gap = " << format_double17(table.log_gap.value) << " (witness "
                        << letter_text(table.log_gap.witness) << ", ratio "
                        << to_string(table.log_gap.extremal_ratio) << ")\n";
                out << "pairing_min = " << to_string(table.pairing_min) << "\n"
                    << "weight_min = " << to_string(table.weight_min) << "\n"
                    << "resistance_min = " << to_string(table.resistance_min) << "\n"
                    << "unit_pairing_norm = " << to_string(table.unit_pairing_norm) << "\n"
                    << "pairing_sum_value = " << to_string(table.pairing_sum_value) << "\n"
                    << "corner_gap = " << to_string(table.corner_gap) << "\n"
                    << "shell_cover_bound = " << to_string(table.shell_cover_bound) << "\n"
                    << "spectral_ratio = " << to_string(table.spectral_ratio) << "\n";
            }
        } else if (c_cylinders->parsed()) {
            RunConfig cfg = load_config(cylinders_config);
            int depth = c_cylinders->count("--depth") ? cylinders_depth : cfg.depth;
            RationalVector x = c_cylinders->count("--boundary")
                                   ? detail::parse_boundary_flag(cylinders_boundary)
                                   : cfg.boundary;
            std::vector<Word> words;
            enumerate_admissible(cfg.rule, depth, [&](const Word& w) { words.push_back(w); });
            if (machine) {
                json rows = json::array();
                for (const Word& w : words) {
                    CylinderReport rep = cylinder_report(cfg.rule, cfg.q, x, w);
                    rows.push_back({{"word", word_text(rep.word)},
                                    {"q_w", to_string(rep.q_w)},
                                    {"r_w", to_string(rep.r_w)},
                                    {"lambda_q", to_string(rep.lambda_q)},
                                    {"lambda_energy", to_string(rep.lambda_energy)},
                                    {"ratio", to_string(rep.ratio)}});
                }
                out << json{{"depth", depth}, {"rows", rows}}.dump(2) << "\n";
            } else {
                out << cylinder_tsv_header() << "\n";
                for (const Word& w : words)
                    out << cylinder_tsv_row(cylinder_report(cfg.rule, cfg.q, x, w)) << "\n";
            }
        } else if (c_hellinger->parsed()) {
            RunConfig cfg = load_config(hellinger_config);
            RationalVector x = c_hellinger->count("--boundary")
                                   ? detail::parse_boundary_flag(hellinger_boundary)
                                   : cfg.boundary;
            x = normalize_to_energy_shell(x);
            AffinitySeries series = hellinger_affinity(cfg.rule, cfg.q, x, hellinger_depth);
            if (machine) {
                json entries = json::array();
                for (const AffinityEntry& e : series.entries)
                    entries.push_back({{"depth", e.depth},
                                       {"cylinders", e.cylinder_count},
                                       {"affinity", e.affinity}});
                out << json{{"normalization", to_string(series.normalization)},
                            {"requested_depth", series.requested_depth},
                            {"truncated", series.truncated},
                            {"entries", entries}}
                           .dump(2)
                    << "\n";
            } else {
                out << "depth\tcylinders\taffinity\n";
                for (const AffinityEntry& e : series.entries)
                    out << e.depth << "\t" << e.cylinder_count << "\t"
                        << format_double17(e.affinity) << "\n";
                if (series.truncated)
                    out << "truncated at the enumeration ceiling after depth "
                        << series.entries.back().depth << "\n";
            }
        } else if (c_martingale->parsed()) {
            RunConfig cfg = load_config(martingale_config);
            RationalVector x = c_martingale->count("--boundary")
                                   ? detail::parse_boundary_flag(martingale_boundary)
                                   : cfg.boundary;
            std::uint64_t seed = c_martingale->count("--seed") ? martingale_seed : cfg.seed;
            if (martingale_paths < 1) throw ValidationError("need at least one path");
            if (martingale_paths == 1) {
                MartingaleTrace tr =
                    martingale_trace(cfg.rule, cfg.q, x, martingale_blocks * martingale_block_len,
                                     martingale_block_len, seed);
                if (machine) {
                    json blocks = json::array();
                    for (int n = 0; n <= tr.blocks; ++n) {
                        json b{{"n", n}, {"z", to_string(tr.z[n])}};
                        if (n >= 2) {
                            b["alpha"] = to_string(tr.alpha[n]);
                            b["cond_exp"] = tr.cond_exp[n];
                            b["term"] = tr.terms[n];
                            b["partial_sum"] = tr.partial_sums[n];
                            b["degenerate"] = static_cast<bool>(tr.degenerate[n]);
                        }
                        blocks.push_back(b);
                    }
                    out << json{{"path", word_text(tr.path)},
                                {"block_length", tr.block_length},
                                {"blocks", tr.blocks},
                                {"entries", blocks}}
                               .dump(2)
                        << "\n";
                } else {
                    out << "path = " << word_text(tr.path) << "\n"
                        << "n\tz_n\talpha_n\tcond_exp_n\tterm_n\tS_n\n";
                    for (int n = 0; n <= tr.blocks; ++n) {
                        out << n << "\t" << to_string(tr.z[n]);
                        if (n >= 2)
                            out << "\t" << to_string(tr.alpha[n]) << "\t"
                                << format_double17(tr.cond_exp[n]) << "\t"
                                << format_double17(tr.terms[n]) << "\t"
                                << format_double17(tr.partial_sums[n]);
                        else
                            out << "\t-\t-\t-\t-";
                        out << "\n";
                    }
                }
            } else {
                CriterionSummary s =
                    criterion_summary(cfg.rule, cfg.q, x, martingale_paths, martingale_blocks,
                                      martingale_block_len, seed);
                if (machine) {
                    out << json{{"paths", s.paths},
                                {"blocks", s.blocks},
                                {"block_length", s.block_length},
                                {"final_sums", s.final_sums},
                                {"min_sum", s.min_sum},
                                {"median_sum", s.median_sum},
                                {"max_sum", s.max_sum},
                                {"caveat", s.caveat}}
                               .dump(2)
                        << "\n";
                } else {
                    out << "paths = " << s.paths << "\n"
                        << "blocks = " << s.blocks << "\n"
                        << "block_length = " << s.block_length << "\n"
                        << "min_sum = " << format_double17(s.min_sum) << "\n"
                        << "median_sum = " << format_double17(s.median_sum) << "\n"
                        << "max_sum = " << format_double17(s.max_sum) << "\n"
                        << "caveat: " << s.caveat << "\n";
                }
            }
        } else if (c_cond_a->parsed()) {
            RunConfig cfg = load_config(cond_a_config);
            ConditionAReport rep = check_condition_A(cfg.levels, cfg.q);
            if (machine) {
                json v = json::array();
                for (const auto& [corner, level] : rep.violations)
                    v.push_back({{"corner", corner}, {"level", level}});
                out << json{{"holds", rep.holds}, {"violations", v}}.dump(2) << "\n";
            } else {
                out << "holds = " << detail::yes_no(rep.holds) << "\n";
                for (const auto& [corner, level] : rep.violations)
                    out << "violation: corner " << corner << " at level " << level
                        << " has weight r(" << level << ")\n";
            }
        } else if (c_cond_b->parsed()) {
            RunConfig cfg = load_config(cond_b_config);
            ConditionBReport rep =
                check_condition_B_sufficient(cfg.rule, cond_b_l0, cond_b_l1, cond_b_horizon);
            if (machine) {
                out << json{{"l2", rep.l2},
                            {"coverage_windows", rep.coverage_windows},
                            {"max_constant_run", rep.max_constant_run},
                            {"constant_run_applicable", rep.constant_run_applicable},
                            {"holds_up_to_horizon", rep.holds_up_to_horizon}}
                           .dump(2)
                    << "\n";
            } else {
                out << "l2 = " << rep.l2 << "\n"
                    << "coverage_windows = " << rep.coverage_windows << "\n"
                    << "max_constant_run = " << rep.max_constant_run << "\n"
                    << "constant_run_applicable = " << detail::yes_no(rep.constant_run_applicable)
                    << "\n"
                    << "holds_up_to_horizon = " << detail::yes_no(rep.holds_up_to_horizon)
                    << "\n";
            }
        } else if (c_rsg->parsed()) {
            RunConfig cfg = load_config(rsg_config);
            if (cfg.rule.kind() != LabelRule::Kind::random_recursive)
                throw ValidationError("rsg-prob needs a 'random ...' rule in the config");
            LevelDistribution dist(cfg.rule.random_levels(), cfg.rule.random_distribution());
            std::uint64_t seed = c_rsg->count("--seed") ? rsg_seed : cfg.seed;
            EventEstimate est =
                estimate_event_probability(dist, cfg.q, rsg_l0, rsg_l1, rsg_k, rsg_trials, seed);
            if (machine) {
                out << json{{"k", est.k},
                            {"l0", est.l0},
                            {"l1", est.l1},
                            {"l2", est.l2},
                            {"trials", est.trials},
                            {"hits", est.hits},
                            {"p_hat", est.p_hat},
                            {"p_exact", to_string(est.p_exact)},
                            {"sigma", est.sigma},
                            {"interval_lo", est.interval_lo},
                            {"interval_hi", est.interval_hi},
                            {"within_three_sigma", est.within_three_sigma}}
                           .dump(2)
                    << "\n";
            } else {
                out << event_estimate_text(est) << "\n";
            }
        } else if (c_render->parsed()) {
            RunConfig cfg = load_config(render_config);
            int depth = c_render->count("--depth") ? render_depth : cfg.depth;
            std::string out_path = c_render->count("--out") ? render_out : cfg.out_path;
            RationalVector x = c_render->count("--boundary")
                                   ? detail::parse_boundary_flag(render_boundary)
                                   : cfg.boundary;
            std::string svg =
                render_svg(cfg.rule, cfg.q, x, depth, render_color == "ratio");
            std::ofstream file(out_path, std::ios::binary);
            if (!file) throw ValidationError("cannot write output file " + out_path);
            file << svg;
            std::size_t cells = 0;
            for (std::size_t pos = svg.find("<polygon"); pos != std::string::npos;
                 pos = svg.find("<polygon", pos + 1))
                ++cells;
            if (machine)
                out << json{{"out", out_path}, {"cells", cells}}.dump(2) << "\n";
            else
                out << "wrote " << out_path << ": " << cells << " cells\n";
        }
        return 0;
    } catch (const ValidationError& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    } catch (const EnumerationLimitError& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    } catch (const ConsistencyError& e) {
        err << "internal consistency failure: " << e.what() << "\n";
        return 2;
    }
}

}  // namespace gasket
