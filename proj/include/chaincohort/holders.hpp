#ifndef CHAINCOHORT_HOLDERS_HPP
#define CHAINCOHORT_HOLDERS_HPP

#include <cstdint>
#include <vector>

#include "chaincohort/flow_ledger.hpp"
#include "chaincohort/linalg.hpp"

namespace chaincohort {

/// Age bands in days: short [0, short_max], medium (short_max, medium_max],
/// long (medium_max, inf). The bands partition [0, inf); the same-step
/// cohort has age 0 days and always falls in the short band.
struct HolderBands {
    double short_max_days = 30.0;
    double medium_max_days = 365.0;
};

/// Per-step band fractions. Steps where the denominator vanishes are flagged
/// invalid and excluded from downstream statistics; wherever valid the three
/// fractions sum to one.
struct FractionSeries {
    int64_t first_t = 0;
    Vec f_short;
    Vec f_medium;
    Vec f_long;
    std::vector<bool> valid;

    Eigen::Index size() const { return f_short.size(); }
};

/// Fraction of outstanding mass per age band: fh_i(t) = sum_{age in band}
/// n_tau(t) / N(t). Skips (flags) steps with N(t) = 0.
FractionSeries holder_fractions(const FlowLedger& ledger, const HolderBands& bands);

/// Fraction of traded mass per band of the seller's age:
/// Vf_i(t) = sum_{age in band} d(tau, t) / (V(t) + churn(t)); the same-step
/// churn mass has age < one step and belongs to the short band. Skips steps
/// with no trades.
FractionSeries volume_fractions(const FlowLedger& ledger, const HolderBands& bands);

/// First differences of each band fraction; length shrinks by one, validity
/// requires both endpoints.
FractionSeries diff_series(const FractionSeries& series);

/// Pack the valid steps of one band into a dense vector (for the statistics
/// battery). Only the longest contiguous valid run is returned.
Vec valid_run(const FractionSeries& series, int band);

}  // namespace chaincohort

#endif  // CHAINCOHORT_HOLDERS_HPP
