#pragma once

#include <string>
#include <vector>

namespace xtab {

struct BarItem {
    std::string label;
    double value = 0.0;
};

// Horizontal bar chart with a central zero axis; positive bars grow right in
// `positive_color`, negative bars grow left in `negative_color`. Direct SVG
// markup with fixed-precision coordinates, so output is byte-stable.
std::string signed_bar_chart_svg(const std::string& title, const std::vector<BarItem>& items,
                                 const std::string& positive_color,
                                 const std::string& negative_color);

// Left-anchored bars for non-negative magnitudes (summary charts).
std::string magnitude_bar_chart_svg(const std::string& title, const std::vector<BarItem>& items,
                                    const std::string& color);

} // namespace xtab
