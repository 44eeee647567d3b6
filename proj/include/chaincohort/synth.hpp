#ifndef CHAINCOHORT_SYNTH_HPP
#define CHAINCOHORT_SYNTH_HPP

#include <cstdint>
#include <utility>
#include <vector>

#include "chaincohort/time_grid.hpp"
#include "chaincohort/tx.hpp"

namespace chaincohort {

/// Configuration of the synthetic-ledger generator. The target holding-time
/// law is either a power-law death probability pi(z) proportional to z^-alpha
/// (truncated and normalized over the horizon) or an explicit pi(z) table.
struct SynthConfig {
    int64_t horizon_steps = 0;                     // >= 2
    double alpha = 0.0;                            // > 0 unless pi_table given
    int64_t issuance_per_step = 0;                 // coin units minted per step
    uint64_t seed = 1;
    int64_t granularity = 1;                       // satoshi per coin unit

    /// Explicit hazard table: pi_table[z-1] = probability that a coin of age z
    /// is spent this step. Ages beyond the table never trade. Overrides alpha.
    std::vector<double> pi_table;

    /// Optional per-step issuance override (length horizon_steps + 1).
    std::vector<int64_t> issuance_schedule;

    /// Optional regime schedule: (first_step, alpha) pairs, ascending. From
    /// first_step on, deaths follow the new exponent. Empty = constant alpha.
    std::vector<std::pair<int64_t, double>> alpha_schedule;
};

/// Generate a transaction stream with the configured death law. Each step
/// mints the scheduled issuance; coins of cohort tau are spent at age
/// z = t - tau with probability pi(z), whole UTXOs at a time, and are reborn
/// as outputs of a single market transaction at t. Deterministic under a
/// fixed seed. The output always round-trips through parse_ledger.
std::vector<TxRecord> synthesize_ledger(const SynthConfig& cfg, const TimeGrid& grid);

/// The hazard the generator realizes for a given config at absolute step t:
/// pi(z) with regime switching applied. Exposed so tests can compare measured
/// transition probabilities against the exact target.
double synth_hazard(const SynthConfig& cfg, int64_t t, int64_t age);

}  // namespace chaincohort

#endif  // CHAINCOHORT_SYNTH_HPP
