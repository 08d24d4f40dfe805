#include "xtab/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace xtab {

namespace {

constexpr int kWidth = 720;
constexpr int kLabelWidth = 200;
constexpr int kBarHeight = 18;
constexpr int kGap = 6;
constexpr int kTop = 34;

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

std::string escape(const std::string& s) {
    std::string out;
    for (char ch : s) {
        switch (ch) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            default: out += ch;
        }
    }
    return out;
}

std::string header(const std::string& title, std::size_t items) {
    const int height = kTop + static_cast<int>(items) * (kBarHeight + kGap) + 12;
    std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
                      std::to_string(kWidth) + "\" height=\"" + std::to_string(height) + "\">\n";
    svg += "<style>text{font-family:monospace;font-size:12px;}</style>\n";
    svg += "<text x=\"8\" y=\"18\" font-size=\"14\">" + escape(title) + "</text>\n";
    return svg;
}

} // namespace

std::string signed_bar_chart_svg(const std::string& title, const std::vector<BarItem>& items,
                                 const std::string& positive_color,
                                 const std::string& negative_color) {
    double max_abs = 1e-12;
    for (const auto& it : items) max_abs = std::max(max_abs, std::fabs(it.value));
    const double mid = kLabelWidth + (kWidth - kLabelWidth - 20) / 2.0;
    const double half_span = (kWidth - kLabelWidth - 20) / 2.0;

    std::string svg = header(title, items.size());
    svg += "<line x1=\"" + num(mid) + "\" y1=\"" + std::to_string(kTop - 6) + "\" x2=\"" +
           num(mid) + "\" y2=\"" +
           std::to_string(kTop + static_cast<int>(items.size()) * (kBarHeight + kGap)) +
           "\" stroke=\"#999\"/>\n";
    int y = kTop;
    for (const auto& it : items) {
        const double w = std::fabs(it.value) / max_abs * half_span;
        const double x = it.value >= 0.0 ? mid : mid - w;
        svg += "<text x=\"8\" y=\"" + std::to_string(y + 13) + "\">" + escape(it.label) +
               "</text>\n";
        svg += "<rect x=\"" + num(x) + "\" y=\"" + std::to_string(y) + "\" width=\"" + num(w) +
               "\" height=\"" + std::to_string(kBarHeight) + "\" fill=\"" +
               (it.value >= 0.0 ? positive_color : negative_color) + "\"/>\n";
        svg += "<text x=\"" + num(it.value >= 0.0 ? mid + w + 4 : mid - w - 70) + "\" y=\"" +
               std::to_string(y + 13) + "\">" + num(it.value) + "</text>\n";
        y += kBarHeight + kGap;
    }
    svg += "</svg>\n";
    return svg;
}

std::string magnitude_bar_chart_svg(const std::string& title, const std::vector<BarItem>& items,
                                    const std::string& color) {
    double max_v = 1e-12;
    for (const auto& it : items) max_v = std::max(max_v, it.value);
    const double span = kWidth - kLabelWidth - 90;

    std::string svg = header(title, items.size());
    int y = kTop;
    for (const auto& it : items) {
        const double w = std::max(0.0, it.value) / max_v * span;
        svg += "<text x=\"8\" y=\"" + std::to_string(y + 13) + "\">" + escape(it.label) +
               "</text>\n";
        svg += "<rect x=\"" + std::to_string(kLabelWidth) + "\" y=\"" + std::to_string(y) +
               "\" width=\"" + num(w) + "\" height=\"" + std::to_string(kBarHeight) +
               "\" fill=\"" + color + "\"/>\n";
        svg += "<text x=\"" + num(kLabelWidth + w + 4) + "\" y=\"" + std::to_string(y + 13) +
               "\">" + num(it.value) + "</text>\n";
        y += kBarHeight + kGap;
    }
    svg += "</svg>\n";
    return svg;
}

} // namespace xtab
