#ifndef CHAINCOHORT_SVG_HPP
#define CHAINCOHORT_SVG_HPP

#include <string>
#include <vector>

#include "chaincohort/linalg.hpp"

namespace chaincohort {

/// Minimal static line/scatter charts: axes, optional log scaling, labels.
/// Plots are derived views; they never feed back into CSV content.
struct SvgSeries {
    Vec x;
    Vec y;
    std::string label;
    std::string color = "#1f77b4";
    bool points_only = false;
};

struct SvgOptions {
    std::string title;
    std::string x_label;
    std::string y_label;
    bool log_x = false;
    bool log_y = false;
    int width = 720;
    int height = 480;
};

std::string render_chart(const std::vector<SvgSeries>& series, const SvgOptions& opts);

}  // namespace chaincohort

#endif  // CHAINCOHORT_SVG_HPP
