#ifndef CHAINCOHORT_MULTIFRACTAL_HPP
#define CHAINCOHORT_MULTIFRACTAL_HPP

#include <cstdint>
#include <vector>

#include "chaincohort/flow_ledger.hpp"
#include "chaincohort/linalg.hpp"

namespace chaincohort {

/// Exchanged-volume measure of one cohort: v_tau(t) = d(tau, t) / V(t),
/// evaluated over (t_first, t_last]. Steps with V(t) = 0 carry no measure
/// (value 0) and are listed in `skipped`.
struct MeasureSeries {
    int64_t tau = 0;
    int64_t first_t = 0;
    Vec v;
    std::vector<int64_t> skipped;
};

MeasureSeries mf_measure(const FlowLedger& ledger, int64_t tau, int64_t t_first,
                         int64_t t_last);

/// Box masses at scale dt: sums of v over non-overlapping windows of dt
/// consecutive steps (the alignment used for moment estimation). dt = 1
/// returns the series itself; a dt spanning the whole series returns its
/// total as a single box.
Vec box_measure(const Vec& v, int64_t dt);

/// Trailing-window variant m(t) = sum of v over (t - dt, t], one value per
/// step from index dt-1 on; used for time-series views only.
Vec box_measure_trailing(const Vec& v, int64_t dt);

/// Moment scaling M_q(dt) = mean over boxes of m^q and its exponents
/// eta(q): M_q(dt) ~ dt^eta(q). The mean-over-boxes convention makes the
/// uniform measure scale as eta(q) = q and a two-weight multiplicative
/// cascade as eta(q) = 1 - log2(p^q + (1-p)^q). Zero boxes are excluded for
/// q <= 0 (they would diverge) and the exclusions are counted per (q, dt).
struct MfSpectrum {
    int64_t tau = -1;
    std::vector<double> q;
    std::vector<int64_t> dt;
    Mat moments;        // q x dt
    Mat excluded;       // zero-box exclusion counts, q x dt
    Vec eta;
    Vec r2;             // per-q fit quality
    bool concave = false;
    double max_second_diff = 0.0;
};

std::vector<double> default_q_orders();      // -5, -4, ..., 10
std::vector<int64_t> default_box_sizes();    // 1..50

/// Spectrum of a raw measure series (the oracle-testable core).
MfSpectrum mf_spectrum_series(const Vec& v, const std::vector<double>& q,
                              const std::vector<int64_t>& dt);

/// Spectrum of the exchanged-volume measure of cohort tau over a window.
MfSpectrum mf_spectrum(const FlowLedger& ledger, int64_t tau, int64_t t_first,
                       int64_t t_last, const std::vector<double>& q,
                       const std::vector<int64_t>& dt);

}  // namespace chaincohort

#endif  // CHAINCOHORT_MULTIFRACTAL_HPP
