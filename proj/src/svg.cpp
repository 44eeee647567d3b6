#include "chaincohort/svg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace chaincohort {

namespace {

struct Bounds {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    void add(double v) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
};

double transform(double v, bool log_scale) { return log_scale ? std::log10(v) : v; }

bool usable(double v, bool log_scale) {
    return std::isfinite(v) && (!log_scale || v > 0.0);
}

std::string tick_label(double v, bool log_scale) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", log_scale ? std::pow(10.0, v) : v);
    return buf;
}

}  // namespace

std::string render_chart(const std::vector<SvgSeries>& series, const SvgOptions& opts) {
    const double ml = 70, mr = 20, mt = 40, mb = 50;
    const double pw = opts.width - ml - mr, ph = opts.height - mt - mb;

    Bounds bx, by;
    for (const SvgSeries& s : series)
        for (Eigen::Index i = 0; i < s.x.size(); ++i) {
            if (!usable(s.x[i], opts.log_x) || !usable(s.y[i], opts.log_y)) continue;
            bx.add(transform(s.x[i], opts.log_x));
            by.add(transform(s.y[i], opts.log_y));
        }
    if (!(bx.lo <= bx.hi)) {  // nothing plottable
        bx = {0.0, 1.0};
        by = {0.0, 1.0};
    }
    if (bx.lo == bx.hi) {
        bx.lo -= 0.5;
        bx.hi += 0.5;
    }
    if (by.lo == by.hi) {
        by.lo -= 0.5;
        by.hi += 0.5;
    }

    auto px = [&](double v) { return ml + (v - bx.lo) / (bx.hi - bx.lo) * pw; };
    auto py = [&](double v) { return mt + ph - (v - by.lo) / (by.hi - by.lo) * ph; };

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << opts.width
        << "\" height=\"" << opts.height << "\">\n"
        << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
        << "<text x=\"" << opts.width / 2 << "\" y=\"22\" text-anchor=\"middle\" "
           "font-size=\"15\" font-family=\"sans-serif\">"
        << opts.title << "</text>\n";

    // Frame and ticks.
    svg << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << pw << "\" height=\""
        << ph << "\" fill=\"none\" stroke=\"#333\"/>\n";
    const int nticks = 5;
    for (int i = 0; i <= nticks; ++i) {
        const double fx = bx.lo + (bx.hi - bx.lo) * i / nticks;
        const double fy = by.lo + (by.hi - by.lo) * i / nticks;
        svg << "<line x1=\"" << px(fx) << "\" y1=\"" << mt + ph << "\" x2=\"" << px(fx)
            << "\" y2=\"" << mt + ph + 5 << "\" stroke=\"#333\"/>\n"
            << "<text x=\"" << px(fx) << "\" y=\"" << mt + ph + 18
            << "\" text-anchor=\"middle\" font-size=\"11\" font-family=\"sans-serif\">"
            << tick_label(fx, opts.log_x) << "</text>\n"
            << "<line x1=\"" << ml - 5 << "\" y1=\"" << py(fy) << "\" x2=\"" << ml
            << "\" y2=\"" << py(fy) << "\" stroke=\"#333\"/>\n"
            << "<text x=\"" << ml - 8 << "\" y=\"" << py(fy) + 4
            << "\" text-anchor=\"end\" font-size=\"11\" font-family=\"sans-serif\">"
            << tick_label(fy, opts.log_y) << "</text>\n";
    }
    svg << "<text x=\"" << ml + pw / 2 << "\" y=\"" << opts.height - 10
        << "\" text-anchor=\"middle\" font-size=\"12\" font-family=\"sans-serif\">"
        << opts.x_label << "</text>\n"
        << "<text x=\"16\" y=\"" << mt + ph / 2
        << "\" text-anchor=\"middle\" font-size=\"12\" font-family=\"sans-serif\" "
           "transform=\"rotate(-90 16 "
        << mt + ph / 2 << ")\">" << opts.y_label << "</text>\n";

    double legend_y = mt + 14;
    for (const SvgSeries& s : series) {
        if (s.points_only) {
            for (Eigen::Index i = 0; i < s.x.size(); ++i) {
                if (!usable(s.x[i], opts.log_x) || !usable(s.y[i], opts.log_y)) continue;
                svg << "<circle cx=\"" << px(transform(s.x[i], opts.log_x)) << "\" cy=\""
                    << py(transform(s.y[i], opts.log_y)) << "\" r=\"2\" fill=\"" << s.color
                    << "\"/>\n";
            }
        } else {
            svg << "<polyline fill=\"none\" stroke=\"" << s.color
                << "\" stroke-width=\"1.3\" points=\"";
            bool pen_down = false;
            for (Eigen::Index i = 0; i < s.x.size(); ++i) {
                if (!usable(s.x[i], opts.log_x) || !usable(s.y[i], opts.log_y)) {
                    if (pen_down) svg << "\"/>\n<polyline fill=\"none\" stroke=\""
                                      << s.color << "\" stroke-width=\"1.3\" points=\"";
                    pen_down = false;
                    continue;
                }
                svg << px(transform(s.x[i], opts.log_x)) << ','
                    << py(transform(s.y[i], opts.log_y)) << ' ';
                pen_down = true;
            }
            svg << "\"/>\n";
        }
        if (!s.label.empty()) {
            svg << "<text x=\"" << ml + pw - 8 << "\" y=\"" << legend_y
                << "\" text-anchor=\"end\" font-size=\"11\" font-family=\"sans-serif\" "
                   "fill=\""
                << s.color << "\">" << s.label << "</text>\n";
            legend_y += 14;
        }
    }
    svg << "</svg>\n";
    return svg.str();
}

}  // namespace chaincohort
