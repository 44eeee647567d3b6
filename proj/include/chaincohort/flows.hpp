#ifndef CHAINCOHORT_FLOWS_HPP
#define CHAINCOHORT_FLOWS_HPP

#include <cstdint>
#include <string>

#include "chaincohort/flow_ledger.hpp"
#include "chaincohort/linalg.hpp"
#include "chaincohort/powerlaw.hpp"

namespace chaincohort {

/// Transaction-flow fractions anchored at one step t, indexed by age.
/// d_plus[z-1]  = d(t-z, t) / (V(t) + S(t))   -- in-flow, z = 1..t
/// d_minus[z-1] = d(t, t+z) / (V(t) + S(t))   -- out-flow, z = 1..horizon-t
/// c_plus/c_minus are their running sums; residual_frac is the cohort mass
/// never spent by the horizon, so sum(d_minus) + residual_frac = 1 and
/// sum(d_plus) + source_frac = 1 (exact in integer mass before division).
struct FlowProfile {
    int64_t t = 0;
    bool empty = false;      // V(t) + S(t) = 0
    double denom = 0.0;      // satoshi
    Vec d_plus, c_plus;
    Vec d_minus, c_minus;
    double source_frac = 0.0;    // S(t) / (V(t) + S(t))
    double residual_frac = 0.0;  // never-spent mass of cohort t / (V(t) + S(t))
};

FlowProfile flow_profile(const FlowLedger& ledger, int64_t t);

struct IdentityCheck {
    bool ok = true;
    std::string defect;
};

/// Verify both normalizations of a profile to 1e-12.
IdentityCheck identity_check(const FlowProfile& profile);

/// Single ages carrying more than `threshold` of the anchor's flow: the
/// sell-off jumps visible as steps in the cumulative curves.
struct FlowJump {
    int64_t age = 0;
    double fraction = 0.0;
    bool outbound = false;  // false: in-flow (d_plus), true: out-flow (d_minus)
};
std::vector<FlowJump> flow_jumps(const FlowProfile& profile, double threshold = 0.02);

/// Age-aligned averages of the flow fractions over sampled anchor times,
/// ragged tails averaged over the number of contributing samples, plus
/// power-law fits of both mean curves.
struct AveragedFlow {
    Vec age;                      // 1, 2, ...
    Vec mean_d_plus, mean_d_minus;
    VecI n_plus, n_minus;         // contributing samples per age
    PowerLawFit fit_plus, fit_minus;
    int64_t skipped_anchors = 0;  // anchors with V + S = 0
};

AveragedFlow averaged_flow(const FlowLedger& ledger, int64_t t_first, int64_t t_last,
                           int64_t stride, const WindowSweep& sweep = {});

}  // namespace chaincohort

#endif  // CHAINCOHORT_FLOWS_HPP
