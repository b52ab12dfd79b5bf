#pragma once

// SVG rendering of the depth-m cell decomposition. One polygon per admissible
// word; the `ratio` coloring maps log(λ_⟨x⟩/λ_q) through a symmetric diverging
// scale (blue #2166ac ← white #f7f7f7 → red #b2182b, normalized by the
// largest |log ratio| in the picture); cells carrying zero mass in either
// measure are drawn gray #cccccc. Output bytes are deterministic.

#include "gasket/measures.hpp"

#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

namespace gasket {

namespace detail {

inline std::string fixed4(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", v);
    return buf;
}

struct Rgb {
    int r = 0, g = 0, b = 0;
};

inline std::string hex_color(Rgb c) {
    char buf[8];
    std::snprintf(buf, sizeof buf, "#%02x%02x%02x", c.r, c.g, c.b);
    return buf;
}

inline Rgb mix_channelwise(Rgb from, Rgb to, double t) {
    auto ch = [t](int a, int b) { return static_cast<int>(std::lround(a + (b - a) * t)); };
    return {ch(from.r, to.r), ch(from.g, to.g), ch(from.b, to.b)};
}

// diverging scale on [-1, 1]
inline std::string diverging_color(double u) {
    const Rgb neutral{0xf7, 0xf7, 0xf7}, low{0x21, 0x66, 0xac}, high{0xb2, 0x18, 0x2b};
    if (u < -1) u = -1;
    if (u > 1) u = 1;
    return hex_color(u < 0 ? mix_channelwise(neutral, low, -u) : mix_channelwise(neutral, high, u));
}

// Cartesian image of a barycentric point in the fixed 1000-wide canvas:
// corner 1 bottom-left, corner 2 bottom-right, corner 3 apex.
constexpr double kCanvasHeight = 866.0254037844386;  // 500·√3

struct Xy {
    double x = 0, y = 0;
};

inline Xy to_canvas(const BaryPoint& p) {
    double s = static_cast<double>(p.scale);
    double a = static_cast<double>(p.a) / s;
    double b = static_cast<double>(p.b) / s;
    double c = static_cast<double>(p.c) / s;
    return {b * 1000.0 + c * 500.0, a * kCanvasHeight + b * kCanvasHeight};
}

}  // namespace detail

// Full SVG document for the depth-m decomposition of the gasket under `rule`.
// `color_by_ratio` = false paints every cell a flat dark gray.
inline std::string render_svg(const LabelRule& rule, const WeightSystem& q,
                              const RationalVector& x, int depth, bool color_by_ratio,
                              std::size_t ceiling = default_enum_ceiling()) {
    if (color_by_ratio && x.size() != 3)
        throw ValidationError("boundary vector must have 3 entries");
    std::vector<Word> words;
    enumerate_admissible(
        rule, depth, [&](const Word& w) { words.push_back(w); }, ceiling);

    std::vector<std::string> fills;
    if (!color_by_ratio) {
        fills.assign(words.size(), "#444444");
    } else {
        q.require_levels(rule.level_set());
        std::vector<double> logs(words.size(), 0.0);
        std::vector<bool> has_mass(words.size(), false);
        double max_abs = 0.0;
        for (std::size_t i = 0; i < words.size(); ++i) {
            CylinderReport rep = cylinder_report(rule, q, x, words[i]);
            if (rep.lambda_q > 0 && rep.lambda_energy > 0) {
                has_mass[i] = true;
                logs[i] = std::log(to_double(rep.ratio));
                max_abs = std::max(max_abs, std::fabs(logs[i]));
            }
        }
        fills.reserve(words.size());
        for (std::size_t i = 0; i < words.size(); ++i) {
            if (!has_mass[i])
                fills.push_back("#cccccc");
            else
                fills.push_back(detail::diverging_color(max_abs == 0.0 ? 0.0
                                                                       : logs[i] / max_abs));
        }
    }

    std::string svg =
        "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" "
        "viewBox=\"0 0 1000 866.0254\" width=\"1000\" height=\"866.0254\">\n"
        "<rect x=\"0\" y=\"0\" width=\"1000\" height=\"866.0254\" fill=\"#ffffff\"/>\n";
    for (std::size_t i = 0; i < words.size(); ++i) {
        svg += "<polygon points=\"";
        for (int corner = 1; corner <= 3; ++corner) {
            detail::Xy pt = detail::to_canvas(word_corner_image(rule, words[i], corner));
            if (corner > 1) svg += " ";
            svg += detail::fixed4(pt.x) + "," + detail::fixed4(pt.y);
        }
        svg += "\" fill=\"" + fills[i] + "\"/>\n";
    }
    svg += "</svg>\n";
    return svg;
}

}  // namespace gasket
