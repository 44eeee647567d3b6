#ifndef CHAINCOHORT_FLOW_LEDGER_HPP
#define CHAINCOHORT_FLOW_LEDGER_HPP

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "chaincohort/time_grid.hpp"
#include "chaincohort/tx.hpp"

namespace chaincohort {

/// Death flow: `amount` satoshi born at grid step `cohort` were spent at the
/// step under which the entry is filed.
struct DeathEntry {
    int64_t cohort;
    int64_t amount;
};

/// Outbound view of the same flows: `amount` satoshi of the cohort under
/// which the entry is filed were spent at step `spend`.
struct SpendEntry {
    int64_t spend;
    int64_t amount;
};

/// Per-grid-step aggregate of a transaction stream. All quantities are
/// integer satoshi and satisfy, step by step,
///
///   births(t) = issuance(t) + volume(t)
///   N(t)      = N(t-1) + issuance(t) = sum of the age distribution at t
///
/// births(t) is the mass whose age counter reads zero at t: freshly mined
/// coins plus every coin that changed hands during (t-1, t]. Mass created and
/// spent within one step is tracked separately in churn(t) so that ages and
/// volume are never double counted.
struct FlowLedger {
    TimeGrid grid;

    std::vector<int64_t> issuance;     // S(t), coinbase mass net of recycled fees
    std::vector<int64_t> births;       // B(t) = S(t) + V(t)
    std::vector<int64_t> volumes;      // V(t) = sum of deaths_at[t]
    std::vector<int64_t> churn;        // same-step birth-and-death mass d(t,t)
    std::vector<int64_t> max_height;   // highest block height seen in step t, -1 if none

    std::vector<std::vector<DeathEntry>> deaths_at;  // keyed by spend step, cohort < t
    std::vector<std::vector<SpendEntry>> deaths_of;  // keyed by birth cohort, spend > cohort

    // Spends whose block time mapped to an earlier grid step than their
    // birth (miner clock skew); folded into churn at the birth step.
    int64_t skew_clamped_count = 0;
    int64_t skew_clamped_mass = 0;

    int64_t horizon() const { return static_cast<int64_t>(issuance.size()) - 1; }
    bool empty() const { return issuance.empty(); }
};

/// Outstanding mass per birth step at a fixed analysis time.
struct AgeSnapshot {
    int64_t t = 0;
    std::vector<std::pair<int64_t, int64_t>> cohorts;  // (tau, n_tau(t)), ascending, > 0
    int64_t total = 0;                                 // equals N(t) exactly
};

struct ConservationReport {
    bool ok = true;
    int64_t defect_t = -1;
    std::string defect;
};

/// Fold a validated transaction sequence into a FlowLedger. Spent outputs add
/// their full value to the death flow keyed by their birth step; every output
/// is a birth at its creation step. Fees (per-transaction input surplus) are
/// netted out of the same step's coinbase mass so that conservation holds
/// exactly whether or not the stream models fee recycling.
FlowLedger build_flow_ledger(std::span<const TxRecord> records, const TimeGrid& grid);

/// n_tau(t) for all tau <= t. Exact integer arithmetic; total equals N(t).
/// Throws std::out_of_range for t beyond the horizon.
AgeSnapshot age_snapshot(const FlowLedger& ledger, int64_t t);

/// V(t): mass spent during (t-1, t] that was born strictly before t.
int64_t volume(const FlowLedger& ledger, int64_t t);

/// N(t): cumulative issuance up to and including t.
int64_t total_minted(const FlowLedger& ledger, int64_t t);

/// n_tau(t) for one cohort, via the cohort's spend list.
int64_t cohort_mass(const FlowLedger& ledger, int64_t tau, int64_t t);

/// Death rate pi_{tau->t}(t) = d(tau,t) / n_tau(t-1). Empty cohorts yield
/// nullopt (undefined), never 0/0. Requires tau < t <= horizon.
std::optional<double> transition_probability(const FlowLedger& ledger, int64_t tau, int64_t t);

/// Verify the conservation identities at every step from the stored arrays;
/// returns the first violation or a clean bill.
ConservationReport conservation_report(const FlowLedger& ledger);

// Versioned little-endian binary cache so re-analysis can skip re-ingestion.
// Layout (all integers little-endian):
//   bytes 0-3   magic "CCFL"
//   u32         version (currently 1)
//   i64         grid epoch_s, i64 grid step_s
//   u64         n = number of grid steps
//   i64[n]      issuance, i64[n] births, i64[n] churn, i64[n] max_height
//   i64         skew_clamped_count, i64 skew_clamped_mass
//   per step t in [0,n): u64 count, then count * (i64 cohort, i64 amount)
void save_flow_ledger(std::ostream& out, const FlowLedger& ledger);
FlowLedger load_flow_ledger(std::istream& in);

/// FNV-1a fingerprint of the cache serialization (cache round-trip checks).
uint64_t flow_ledger_fingerprint(const FlowLedger& ledger);

}  // namespace chaincohort

#endif  // CHAINCOHORT_FLOW_LEDGER_HPP
