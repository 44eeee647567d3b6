#ifndef CHAINCOHORT_POWERLAW_HPP
#define CHAINCOHORT_POWERLAW_HPP

#include <span>
#include <vector>

#include "chaincohort/linalg.hpp"

namespace chaincohort {

/// Nested calibration windows [z_min, z_max] with z_max swept in integer
/// steps. The default sweep (125..200, step 1) yields 76 calibrations.
struct WindowSweep {
    double z_min = 1.0;
    int zmax_lo = 125;
    int zmax_hi = 200;
    int step = 1;

    int window_count() const { return (zmax_hi - zmax_lo) / step + 1; }
};

/// Power-law calibration ln y = -alpha ln x + beta, least squares per window,
/// aggregated over the nested sweep.
struct PowerLawFit {
    double alpha = 0.0;       // mean exponent over accepted windows
    double alpha_std = 0.0;   // population std over accepted windows
    double intercept = 0.0;   // mean beta over accepted windows
    double r2 = 0.0;          // mean coefficient of determination
    std::vector<double> window_alphas;
    int dropped_zero_points = 0;  // y <= 0 points removed before fitting
    int refused_windows = 0;      // windows with fewer than 5 usable points
    // alpha > 2 would make the mean of a z^-alpha holding-time law finite.
    bool implies_finite_mean = false;
};

/// Fit y ~ x^-alpha over the sweep. x values must be >= 1; points with y <= 0
/// are dropped (and counted). Windows with fewer than 5 surviving points are
/// refused; throws std::invalid_argument when every window is refused or no
/// positive y exists at all.
PowerLawFit powerlaw_fit(std::span<const double> x, std::span<const double> y,
                         const WindowSweep& sweep = {});

/// Plain least-squares line fit, exposed for reuse: returns (slope,
/// intercept, r2) of y on x.
struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
};
LineFit fit_line(std::span<const double> x, std::span<const double> y);

}  // namespace chaincohort

#endif  // CHAINCOHORT_POWERLAW_HPP
