#include "chaincohort/powerlaw.hpp"

#include <cmath>
#include <stdexcept>

namespace chaincohort {

LineFit fit_line(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2)
        throw std::invalid_argument("fit_line needs >= 2 paired points");
    const auto n = static_cast<double>(x.size());
    double sx = 0, sy = 0;
    for (size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
    }
    const double mx = sx / n, my = sy / n;
    double sxx = 0, sxy = 0, syy = 0;
    for (size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mx, dy = y[i] - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if (sxx == 0.0) throw std::invalid_argument("fit_line: degenerate x support");
    LineFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    f.r2 = syy == 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
    return f;
}

PowerLawFit powerlaw_fit(std::span<const double> x, std::span<const double> y,
                         const WindowSweep& sweep) {
    if (x.size() != y.size()) throw std::invalid_argument("powerlaw_fit: size mismatch");
    if (sweep.zmax_hi < sweep.zmax_lo || sweep.step < 1)
        throw std::invalid_argument("powerlaw_fit: bad window sweep");

    std::vector<double> lx, ly;
    lx.reserve(x.size());
    ly.reserve(x.size());
    PowerLawFit fit;
    for (size_t i = 0; i < x.size(); ++i) {
        if (x[i] < 1.0)
            throw std::invalid_argument("powerlaw_fit: abscissa below 1");
        if (!(y[i] > 0.0) || std::isnan(y[i])) {
            ++fit.dropped_zero_points;
            continue;
        }
        lx.push_back(std::log(x[i]));
        ly.push_back(std::log(y[i]));
    }
    if (lx.empty()) throw std::invalid_argument("powerlaw_fit: no positive ordinates");

    double sum_b = 0, sum_r2 = 0;
    for (int zmax = sweep.zmax_lo; zmax <= sweep.zmax_hi; zmax += sweep.step) {
        std::vector<double> wx, wy;
        const double lo = std::log(sweep.z_min), hi = std::log(static_cast<double>(zmax));
        for (size_t i = 0; i < lx.size(); ++i) {
            if (lx[i] >= lo - 1e-12 && lx[i] <= hi + 1e-12) {
                wx.push_back(lx[i]);
                wy.push_back(ly[i]);
            }
        }
        if (wx.size() < 5) {
            ++fit.refused_windows;
            continue;
        }
        LineFit line;
        try {
            line = fit_line(wx, wy);
        } catch (const std::invalid_argument&) {
            ++fit.refused_windows;
            continue;
        }
        fit.window_alphas.push_back(-line.slope);
        sum_b += line.intercept;
        sum_r2 += line.r2;
    }
    if (fit.window_alphas.empty())
        throw std::invalid_argument("powerlaw_fit: all windows degenerate (fewer than 5 "
                                    "positive points per window)");

    const double m = static_cast<double>(fit.window_alphas.size());
    double sum_a = 0.0;
    for (double a : fit.window_alphas) sum_a += a;
    fit.alpha = sum_a / m;
    double var = 0.0;  // two-pass: near-identical window exponents must not cancel
    for (double a : fit.window_alphas) var += (a - fit.alpha) * (a - fit.alpha);
    fit.alpha_std = std::sqrt(var / m);
    fit.intercept = sum_b / m;
    fit.r2 = sum_r2 / m;
    fit.implies_finite_mean = fit.alpha > 2.0;
    return fit;
}

}  // namespace chaincohort
