#ifndef CHAINCOHORT_RETURNS_HPP
#define CHAINCOHORT_RETURNS_HPP

#include <cstdint>
#include <optional>
#include <vector>

#include "chaincohort/flow_ledger.hpp"
#include "chaincohort/ledger_io.hpp"
#include "chaincohort/linalg.hpp"

namespace chaincohort {

/// Log-return per day between grid steps tau < t.
double daily_return(int64_t tau, int64_t t, const PriceSeries& prices, const TimeGrid& grid);

/// Weighted per-day return sample set at a fixed analysis time. For kind B2M
/// the weights are the outstanding cohort masses n_tau(t); for kind PnL they
/// are the death flows d(tau, t) (the same-step diagonal is excluded: a
/// round trip within one step has no per-day return).
struct ReturnDistribution {
    enum class Kind { B2M, PnL };

    Kind kind = Kind::B2M;
    int64_t t = 0;
    std::vector<double> r;   // ascending
    std::vector<double> w;   // satoshi, > 0
    double total = 0.0;      // sum of weights

    bool empty() const { return w.empty(); }
    /// P(return <= value); right-continuous, ends at 1.
    double cdf(double value) const;
};

ReturnDistribution b2m_distribution(const FlowLedger& ledger, const PriceSeries& prices,
                                    int64_t t);

/// Empty distribution (distinguished, not an error) when V(t) = 0.
ReturnDistribution pnl_distribution(const FlowLedger& ledger, const PriceSeries& prices,
                                    int64_t t);

/// Profit/loss aggregates of a weighted return sample. Exact weighted sums
/// over the discrete sample set; break-even mass (r = 0) counts as
/// non-profit. Conditional means are absent when the corresponding side
/// carries no mass.
struct PLAggregates {
    double f_p = 0.0;                 // weight fraction with r > 0
    double profit = 0.0;              // P: mean positive part over all mass
    double loss = 0.0;                // L: mean negative part (>= 0)
    std::optional<double> profit_bar; // conditional mean over r > 0 mass
    std::optional<double> loss_bar;   // conditional mean over r <= 0 mass
};
PLAggregates pl_aggregates(const ReturnDistribution& dist);

/// Gaussian-kernel density of a weighted sample on a uniform return grid.
struct KernelDensity {
    Vec grid;
    Vec density;
    double bandwidth = 0.0;
    double integral = 0.0;  // trapezoid; 1 within 1e-6 by construction
};

struct BandwidthPolicy {
    double fixed = 0.0;  // > 0 overrides the weighted Silverman rule
};
KernelDensity b2m_density(const ReturnDistribution& dist, const BandwidthPolicy& policy = {});

/// Per-step realized aggregates with a centered moving average of f_p and of
/// the conditional gain. Steps without trades (or without price coverage of
/// some live cohort) are flagged and skipped.
struct PLAggregatesSeries {
    int64_t first_t = 0;
    std::vector<bool> valid;
    Vec f_p;
    Vec profit, loss;
    Vec profit_bar, loss_bar;    // NaN where undefined
    Vec f_p_smooth;              // centered moving mean, NaN where undefined
    Vec profit_bar_smooth;
};

struct MovingStatConfig {
    double window_days = 90.0;
    bool median = false;  // default centered moving mean
};

PLAggregatesSeries realized_aggregates_series(const FlowLedger& ledger,
                                              const PriceSeries& prices,
                                              const MovingStatConfig& smooth = {});

/// Same aggregates over the unrealized (book-to-market) distribution at
/// every step.
PLAggregatesSeries unrealized_aggregates_series(const FlowLedger& ledger,
                                                const PriceSeries& prices,
                                                const MovingStatConfig& smooth = {});

}  // namespace chaincohort

#endif  // CHAINCOHORT_RETURNS_HPP
