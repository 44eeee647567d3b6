#include "chaincohort/flow_ledger.hpp"

#include <algorithm>
#include <cstring>
#include <istream>
#include <map>
#include <ostream>
#include <stdexcept>
#include <unordered_map>

namespace chaincohort {

namespace {

struct LiveTx {
    int64_t birth;                  // grid step the outputs were created at
    std::vector<int64_t> amounts;   // unspent entries only get read once
};

void grow(FlowLedger& fl, int64_t t) {
    if (t < static_cast<int64_t>(fl.issuance.size())) return;
    const size_t n = static_cast<size_t>(t) + 1;
    fl.issuance.resize(n, 0);
    fl.births.resize(n, 0);
    fl.volumes.resize(n, 0);
    fl.churn.resize(n, 0);
    fl.max_height.resize(n, -1);
    fl.deaths_at.resize(n);
    fl.deaths_of.resize(n);
}

}  // namespace

FlowLedger build_flow_ledger(std::span<const TxRecord> records, const TimeGrid& grid) {
    FlowLedger fl;
    fl.grid = grid;

    std::unordered_map<std::string, LiveTx> live;
    // Raw per-step tallies; births/issuance are netted afterwards.
    std::vector<int64_t> coinbase_out, fees, raw_births;
    std::vector<std::map<int64_t, int64_t>> death_acc;  // per spend step: cohort -> mass

    auto grow_raw = [&](int64_t t) {
        if (t < static_cast<int64_t>(coinbase_out.size())) return;
        coinbase_out.resize(static_cast<size_t>(t) + 1, 0);
        fees.resize(static_cast<size_t>(t) + 1, 0);
        raw_births.resize(static_cast<size_t>(t) + 1, 0);
        death_acc.resize(static_cast<size_t>(t) + 1);
        grow(fl, t);
    };

    for (const TxRecord& tx : records) {
        const int64_t g = sample_time(tx.block_time, grid);
        grow_raw(g);
        fl.max_height[static_cast<size_t>(g)] =
            std::max(fl.max_height[static_cast<size_t>(g)], tx.block_height);

        // Block-time skew can map a transaction onto an earlier grid step
        // than one of its inputs was born on; the whole transaction is then
        // shifted to the latest input birth so flows never run backwards.
        int64_t eff = g;
        for (const OutPoint& op : tx.inputs) {
            auto it = live.find(op.txid);
            if (it == live.end() ||
                op.vout >= static_cast<int64_t>(it->second.amounts.size()) ||
                it->second.amounts[static_cast<size_t>(op.vout)] < 0)
                throw std::invalid_argument("unspendable outpoint (" + op.txid + "," +
                                            std::to_string(op.vout) + ")");
            eff = std::max(eff, it->second.birth);
        }
        if (eff != g) {
            grow_raw(eff);
            ++fl.skew_clamped_count;
        }

        int64_t in_total = 0;
        for (const OutPoint& op : tx.inputs) {
            auto& entry = live.find(op.txid)->second;
            int64_t& slot = entry.amounts[static_cast<size_t>(op.vout)];
            const int64_t value = slot;
            slot = -1;  // mark spent
            in_total += value;
            if (eff != g) fl.skew_clamped_mass += value;
            if (eff == entry.birth) {
                fl.churn[static_cast<size_t>(eff)] += value;
            } else {
                death_acc[static_cast<size_t>(eff)][entry.birth] += value;
            }
        }

        const int64_t out_total = tx.output_total();
        raw_births[static_cast<size_t>(eff)] += out_total;
        if (tx.coinbase) {
            coinbase_out[static_cast<size_t>(eff)] += out_total;
        } else {
            fees[static_cast<size_t>(eff)] += in_total - out_total;
        }
        live.emplace(tx.txid, LiveTx{eff, tx.outputs});
    }

    for (size_t t = 0; t < fl.issuance.size(); ++t) {
        int64_t v = 0;
        auto& list = fl.deaths_at[t];
        list.reserve(death_acc[t].size());
        for (const auto& [cohort, amount] : death_acc[t]) {
            list.push_back({cohort, amount});
            v += amount;
        }
        fl.volumes[t] = v;
        // Fees leave the spender's cohort as deaths and come back as coinbase
        // outputs; netting them out of S keeps issuance equal to true minting.
        fl.issuance[t] = coinbase_out[t] - fees[t];
        fl.births[t] = raw_births[t] - fl.churn[t];
    }
    for (int64_t t = 0; t < static_cast<int64_t>(fl.deaths_at.size()); ++t)
        for (const DeathEntry& e : fl.deaths_at[static_cast<size_t>(t)])
            fl.deaths_of[static_cast<size_t>(e.cohort)].push_back({t, e.amount});
    return fl;
}

AgeSnapshot age_snapshot(const FlowLedger& fl, int64_t t) {
    if (t < 0 || t > fl.horizon())
        throw std::out_of_range("snapshot time " + std::to_string(t) +
                                " beyond horizon " + std::to_string(fl.horizon()));
    std::vector<int64_t> n(static_cast<size_t>(t) + 1);
    for (int64_t tau = 0; tau <= t; ++tau)
        n[static_cast<size_t>(tau)] = fl.births[static_cast<size_t>(tau)];
    for (int64_t s = 1; s <= t; ++s)
        for (const DeathEntry& e : fl.deaths_at[static_cast<size_t>(s)])
            n[static_cast<size_t>(e.cohort)] -= e.amount;

    AgeSnapshot snap;
    snap.t = t;
    for (int64_t tau = 0; tau <= t; ++tau) {
        const int64_t mass = n[static_cast<size_t>(tau)];
        if (mass < 0)
            throw std::logic_error("negative cohort mass at tau " + std::to_string(tau));
        if (mass > 0) snap.cohorts.emplace_back(tau, mass);
        snap.total += mass;
    }
    return snap;
}

int64_t volume(const FlowLedger& fl, int64_t t) {
    if (t < 0 || t > fl.horizon())
        throw std::out_of_range("volume time beyond horizon");
    return fl.volumes[static_cast<size_t>(t)];
}

int64_t total_minted(const FlowLedger& fl, int64_t t) {
    if (t < 0 || t > fl.horizon())
        throw std::out_of_range("time beyond horizon");
    int64_t n = 0;
    for (int64_t s = 0; s <= t; ++s) n += fl.issuance[static_cast<size_t>(s)];
    return n;
}

int64_t cohort_mass(const FlowLedger& fl, int64_t tau, int64_t t) {
    if (tau < 0 || tau > fl.horizon() || t < tau || t > fl.horizon())
        throw std::out_of_range("cohort_mass arguments out of range");
    int64_t mass = fl.births[static_cast<size_t>(tau)];
    for (const SpendEntry& e : fl.deaths_of[static_cast<size_t>(tau)]) {
        if (e.spend > t) break;
        mass -= e.amount;
    }
    return mass;
}

std::optional<double> transition_probability(const FlowLedger& fl, int64_t tau, int64_t t) {
    if (!(tau >= 0 && tau < t && t <= fl.horizon()))
        throw std::out_of_range("transition_probability requires 0 <= tau < t <= horizon");
    const int64_t held = cohort_mass(fl, tau, t - 1);
    if (held == 0) return std::nullopt;
    int64_t died = 0;
    for (const SpendEntry& e : fl.deaths_of[static_cast<size_t>(tau)]) {
        if (e.spend == t) died = e.amount;
        if (e.spend >= t) break;
    }
    return static_cast<double>(died) / static_cast<double>(held);
}

ConservationReport conservation_report(const FlowLedger& fl) {
    ConservationReport rep;
    auto fail = [&](int64_t t, std::string what) {
        rep.ok = false;
        rep.defect_t = t;
        rep.defect = std::move(what);
        return rep;
    };
    const int64_t horizon = fl.horizon();
    if (horizon < 0) return rep;  // empty ledger is clean

    std::vector<int64_t> n;  // running cohort masses
    n.reserve(static_cast<size_t>(horizon) + 1);
    int64_t minted = 0;
    // Full re-sum of the age distribution at every step is quadratic; cap the
    // resummed steps on very long grids and always include the horizon.
    const int64_t resum_stride = horizon <= 6000 ? 1 : horizon / 2000;

    for (int64_t t = 0; t <= horizon; ++t) {
        if (fl.churn[static_cast<size_t>(t)] < 0) return fail(t, "negative churn");
        int64_t v = 0;
        for (const DeathEntry& e : fl.deaths_at[static_cast<size_t>(t)]) {
            if (e.cohort < 0 || e.cohort >= t)
                return fail(t, "death entry outside 0 <= tau < t");
            if (e.amount < 0) return fail(t, "negative death flow");
            n[static_cast<size_t>(e.cohort)] -= e.amount;
            if (n[static_cast<size_t>(e.cohort)] < 0)
                return fail(t, "cohort " + std::to_string(e.cohort) +
                                   " overdrawn (deaths exceed births)");
            v += e.amount;
        }
        if (v != fl.volumes[static_cast<size_t>(t)])
            return fail(t, "stored volume disagrees with death flows");
        // Births identity B(t) = S(t) + V(t).
        if (fl.births[static_cast<size_t>(t)] != fl.issuance[static_cast<size_t>(t)] + v)
            return fail(t, "births identity violated: B != S + V");
        n.push_back(fl.births[static_cast<size_t>(t)]);
        minted += fl.issuance[static_cast<size_t>(t)];

        if (t % resum_stride == 0 || t == horizon) {
            int64_t total = 0;
            for (int64_t tau = 0; tau <= t; ++tau) total += n[static_cast<size_t>(tau)];
            if (total != minted)
                return fail(t, "age distribution total " + std::to_string(total) +
                                   " != minted " + std::to_string(minted));
        }
    }
    return rep;
}

namespace {

constexpr char kMagic[4] = {'C', 'C', 'F', 'L'};
constexpr uint32_t kVersion = 1;

void put_u32(std::ostream& out, uint32_t v) {
    unsigned char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    out.write(reinterpret_cast<const char*>(b), 4);
}

void put_u64(std::ostream& out, uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    out.write(reinterpret_cast<const char*>(b), 8);
}

void put_i64(std::ostream& out, int64_t v) { put_u64(out, static_cast<uint64_t>(v)); }

uint32_t get_u32(std::istream& in) {
    unsigned char b[4];
    if (!in.read(reinterpret_cast<char*>(b), 4)) throw std::runtime_error("truncated cache");
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(b[i]) << (8 * i);
    return v;
}

uint64_t get_u64(std::istream& in) {
    unsigned char b[8];
    if (!in.read(reinterpret_cast<char*>(b), 8)) throw std::runtime_error("truncated cache");
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(b[i]) << (8 * i);
    return v;
}

int64_t get_i64(std::istream& in) { return static_cast<int64_t>(get_u64(in)); }

}  // namespace

void save_flow_ledger(std::ostream& out, const FlowLedger& fl) {
    out.write(kMagic, 4);
    put_u32(out, kVersion);
    put_i64(out, fl.grid.epoch_s);
    put_i64(out, fl.grid.step_s);
    const uint64_t n = fl.issuance.size();
    put_u64(out, n);
    for (int64_t v : fl.issuance) put_i64(out, v);
    for (int64_t v : fl.births) put_i64(out, v);
    for (int64_t v : fl.churn) put_i64(out, v);
    for (int64_t v : fl.max_height) put_i64(out, v);
    put_i64(out, fl.skew_clamped_count);
    put_i64(out, fl.skew_clamped_mass);
    for (uint64_t t = 0; t < n; ++t) {
        const auto& list = fl.deaths_at[t];
        put_u64(out, list.size());
        for (const DeathEntry& e : list) {
            put_i64(out, e.cohort);
            put_i64(out, e.amount);
        }
    }
}

FlowLedger load_flow_ledger(std::istream& in) {
    char magic[4];
    if (!in.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0)
        throw std::runtime_error("not a FlowLedger cache (bad magic)");
    const uint32_t version = get_u32(in);
    if (version != kVersion)
        throw std::runtime_error("unsupported cache version " + std::to_string(version));

    FlowLedger fl;
    fl.grid.epoch_s = get_i64(in);
    fl.grid.step_s = get_i64(in);
    const uint64_t n = get_u64(in);
    if (n > (1ULL << 32)) throw std::runtime_error("implausible cache size");
    fl.issuance.resize(n);
    fl.births.resize(n);
    fl.churn.resize(n);
    fl.max_height.resize(n);
    for (auto& v : fl.issuance) v = get_i64(in);
    for (auto& v : fl.births) v = get_i64(in);
    for (auto& v : fl.churn) v = get_i64(in);
    for (auto& v : fl.max_height) v = get_i64(in);
    fl.skew_clamped_count = get_i64(in);
    fl.skew_clamped_mass = get_i64(in);
    fl.deaths_at.resize(n);
    fl.deaths_of.resize(n);
    fl.volumes.assign(n, 0);
    for (uint64_t t = 0; t < n; ++t) {
        const uint64_t count = get_u64(in);
        auto& list = fl.deaths_at[t];
        list.resize(count);
        int64_t v = 0;
        for (auto& e : list) {
            e.cohort = get_i64(in);
            e.amount = get_i64(in);
            if (e.cohort < 0 || e.cohort >= static_cast<int64_t>(t))
                throw std::runtime_error("corrupt cache: death entry outside grid");
            v += e.amount;
        }
        fl.volumes[t] = v;
    }
    for (int64_t t = 0; t < static_cast<int64_t>(n); ++t)
        for (const DeathEntry& e : fl.deaths_at[static_cast<size_t>(t)])
            fl.deaths_of[static_cast<size_t>(e.cohort)].push_back({t, e.amount});
    return fl;
}

uint64_t flow_ledger_fingerprint(const FlowLedger& fl) {
    uint64_t h = 1469598103934665603ULL;
    auto mix = [&](int64_t v) {
        for (int i = 0; i < 8; ++i) {
            h ^= static_cast<uint64_t>(v >> (8 * i)) & 0xff;
            h *= 1099511628211ULL;
        }
    };
    mix(fl.grid.epoch_s);
    mix(fl.grid.step_s);
    mix(static_cast<int64_t>(fl.issuance.size()));
    for (size_t t = 0; t < fl.issuance.size(); ++t) {
        mix(fl.issuance[t]);
        mix(fl.births[t]);
        mix(fl.churn[t]);
        mix(fl.max_height[t]);
        for (const DeathEntry& e : fl.deaths_at[t]) {
            mix(e.cohort);
            mix(e.amount);
        }
    }
    return h;
}

}  // namespace chaincohort
