#ifndef CHAINCOHORT_SCALING_HPP
#define CHAINCOHORT_SCALING_HPP

#include <cstdint>
#include <utility>
#include <vector>

#include "chaincohort/flow_ledger.hpp"
#include "chaincohort/linalg.hpp"
#include "chaincohort/powerlaw.hpp"

namespace chaincohort {

/// Anchor times t_first, t_first + stride, ... , <= t_last.
struct SamplingSpec {
    int64_t t_first = 0;
    int64_t t_last = 0;
    int64_t stride = 1;
};

/// Time-averaged transition probability by age: pi(z) = mean over sampled t
/// of d(t-z, t) / n_{t-z}(t-1). Cohorts empty at t-1 are excluded from the
/// mean (and counted); ages with no valid sample are gaps (NaN, flagged).
struct AvgTransition {
    Vec age;           // 1..z_max
    Vec pi_mean;       // NaN at gaps
    VecI n_samples;
    int64_t empty_cohorts = 0;
    PowerLawFit fit;
};

AvgTransition avg_transition(const FlowLedger& ledger, const SamplingSpec& spec,
                             const WindowSweep& sweep = {});

/// The nested-window power-law fit applied to pi_z(t) at every sampled t.
/// Degenerate anchors are flagged invalid and the series continues.
struct AlphaSeries {
    std::vector<int64_t> t;
    Vec alpha;      // mean over the window sweep
    Vec alpha_std;  // std over the window sweep
    std::vector<bool> valid;
};

AlphaSeries alpha_series(const FlowLedger& ledger, const SamplingSpec& spec,
                         const WindowSweep& sweep = {});

/// Per-cluster line fit and correlation of alpha_t against a return series,
/// split at one date. Requires >= 3 points per cluster.
struct ClusterRegression {
    double slope = 0.0;
    double intercept = 0.0;
    double correlation = 0.0;
    int64_t n = 0;
};

std::pair<ClusterRegression, ClusterRegression>
alpha_return_regression(const std::vector<int64_t>& t, const Vec& alpha, const Vec& ret,
                        const std::vector<bool>& valid, int64_t split_t);

}  // namespace chaincohort

#endif  // CHAINCOHORT_SCALING_HPP
