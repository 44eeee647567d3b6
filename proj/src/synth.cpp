#include "chaincohort/synth.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "chaincohort/rng.hpp"

namespace chaincohort {

namespace {

void validate(const SynthConfig& cfg) {
    if (cfg.horizon_steps < 2) throw std::invalid_argument("synth horizon must be >= 2");
    if (cfg.pi_table.empty()) {
        if (!(cfg.alpha > 0.0)) throw std::invalid_argument("synth alpha must be > 0");
        for (const auto& [step, a] : cfg.alpha_schedule)
            if (!(a > 0.0)) throw std::invalid_argument("synth alpha must be > 0");
    } else {
        for (double p : cfg.pi_table)
            if (p < 0.0 || p > 1.0)
                throw std::invalid_argument("pi table entries must lie in [0,1]");
    }
    if (cfg.granularity < 1) throw std::invalid_argument("granularity must be >= 1");
    if (cfg.issuance_per_step < 0) throw std::invalid_argument("negative issuance");
    if (!cfg.issuance_schedule.empty() &&
        cfg.issuance_schedule.size() != static_cast<size_t>(cfg.horizon_steps) + 1)
        throw std::invalid_argument("issuance schedule length must be horizon + 1");
}

double alpha_at(const SynthConfig& cfg, int64_t t) {
    double a = cfg.alpha;
    for (const auto& [step, value] : cfg.alpha_schedule) {
        if (t >= step) a = value;
    }
    return a;
}

double powerlaw_norm(double alpha, int64_t horizon) {
    double s = 0.0;
    for (int64_t z = 1; z <= horizon; ++z) s += std::pow(static_cast<double>(z), -alpha);
    return s;
}

}  // namespace

double synth_hazard(const SynthConfig& cfg, int64_t t, int64_t age) {
    if (age < 1) return 0.0;
    if (!cfg.pi_table.empty()) {
        if (age > static_cast<int64_t>(cfg.pi_table.size())) return 0.0;
        return cfg.pi_table[static_cast<size_t>(age) - 1];
    }
    const double a = alpha_at(cfg, t);
    return std::pow(static_cast<double>(age), -a) / powerlaw_norm(a, cfg.horizon_steps);
}

std::vector<TxRecord> synthesize_ledger(const SynthConfig& cfg, const TimeGrid& grid) {
    validate(cfg);
    Rng rng(cfg.seed);

    const int64_t horizon = cfg.horizon_steps;

    // Per-regime hazard curves, so the inner loop never recomputes norms.
    std::vector<std::pair<int64_t, std::vector<double>>> regimes;
    if (cfg.pi_table.empty()) {
        std::vector<std::pair<int64_t, double>> alphas{{0, cfg.alpha}};
        for (const auto& sw : cfg.alpha_schedule) alphas.push_back(sw);
        for (const auto& [from, a] : alphas) {
            std::vector<double> haz(static_cast<size_t>(horizon) + 1, 0.0);
            const double norm = powerlaw_norm(a, horizon);
            for (int64_t z = 1; z <= horizon; ++z)
                haz[static_cast<size_t>(z)] = std::pow(static_cast<double>(z), -a) / norm;
            regimes.emplace_back(from, std::move(haz));
        }
    } else {
        std::vector<double> haz(cfg.pi_table.size() + 1, 0.0);
        for (size_t i = 0; i < cfg.pi_table.size(); ++i) haz[i + 1] = cfg.pi_table[i];
        regimes.emplace_back(0, std::move(haz));
    }
    auto hazard = [&](int64_t t, int64_t age) -> double {
        const std::vector<double>* cur = &regimes.front().second;
        for (const auto& [from, haz] : regimes)
            if (t >= from) cur = &haz;
        if (age >= static_cast<int64_t>(cur->size())) return 0.0;
        return (*cur)[static_cast<size_t>(age)];
    };

    struct PendingSpend {
        int64_t tx_index;  // into the record vector
        int64_t vout;
        int64_t units;
    };
    std::vector<std::vector<PendingSpend>> due(static_cast<size_t>(horizon) + 1);
    std::vector<TxRecord> records;

    // Draw the full death schedule of a cohort of `units` coins born at step
    // `birth`: sequential binomial thinning with the age-dependent hazard.
    // Every future death bucket becomes one whole output of the birth
    // transaction, so kills always spend whole UTXOs and counts are exact.
    auto emit_tx = [&](int64_t t, std::string txid, std::vector<OutPoint> inputs,
                       int64_t units, bool coinbase) {
        TxRecord tx;
        tx.txid = std::move(txid);
        tx.block_height = t;
        tx.block_time = grid_time(t, grid);
        tx.inputs = std::move(inputs);
        tx.coinbase = coinbase;

        const int64_t tx_index = static_cast<int64_t>(records.size());
        int64_t remaining = units;
        for (int64_t z = 1; z <= horizon - t && remaining > 0; ++z) {
            const double p = hazard(t + z, z);
            if (p <= 0.0) {
                if (!cfg.pi_table.empty() &&
                    z >= static_cast<int64_t>(cfg.pi_table.size()))
                    break;  // table exhausted, nothing dies later
                continue;
            }
            const int64_t k = rng.binomial(remaining, p);
            if (k == 0) continue;
            const int64_t vout = static_cast<int64_t>(tx.outputs.size());
            tx.outputs.push_back(k * cfg.granularity);
            due[static_cast<size_t>(t + z)].push_back({tx_index, vout, k});
            remaining -= k;
        }
        if (remaining > 0) tx.outputs.push_back(remaining * cfg.granularity);
        records.push_back(std::move(tx));
    };

    for (int64_t t = 0; t <= horizon; ++t) {
        const int64_t minted = cfg.issuance_schedule.empty()
                                   ? cfg.issuance_per_step
                                   : cfg.issuance_schedule[static_cast<size_t>(t)];
        if (minted > 0) emit_tx(t, "c" + std::to_string(t), {}, minted, true);

        int64_t dying = 0;
        std::vector<OutPoint> inputs;
        for (const PendingSpend& ps : due[static_cast<size_t>(t)]) {
            inputs.push_back({records[static_cast<size_t>(ps.tx_index)].txid, ps.vout});
            dying += ps.units;
        }
        if (dying > 0)
            emit_tx(t, "m" + std::to_string(t), std::move(inputs), dying, false);
    }
    return records;
}

}  // namespace chaincohort
