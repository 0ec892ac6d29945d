#pragma once

#include <string>
#include <vector>

namespace nlt {

struct Series {
    std::string name;
    std::vector<double> x;
    std::vector<double> y;
    bool dashed = false;
};

struct ChartSpec {
    std::string title;
    std::string x_label;
    std::string y_label;
    bool log_x = false;
    bool log_y = false;
    int width = 640;
    int height = 420;
};

/// Standalone SVG line chart. Points that are nonfinite, or nonpositive on a
/// log axis, are dropped.
[[nodiscard]] std::string render_line_chart(const ChartSpec& spec,
                                            const std::vector<Series>& series);

}  // namespace nlt
