#ifndef CHAINCOHORT_TESTS_REPLAY_ORACLE_HPP
#define CHAINCOHORT_TESTS_REPLAY_ORACLE_HPP

#include <algorithm>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "chaincohort/time_grid.hpp"
#include "chaincohort/tx.hpp"

namespace chaincohort::testing {

// Brute-force oracle: replay the raw records, give every output its own
// lifetime (birth step, spend step or never), and recompute n_tau(t) from
// scratch. Shares nothing with the FlowLedger build path.
struct ReplayOracle {
    struct Coin {
        int64_t birth;
        int64_t spend;  // -1 while unspent
        int64_t value;
    };
    std::vector<Coin> coins;
    int64_t horizon = 0;

    explicit ReplayOracle(const std::vector<TxRecord>& records, const TimeGrid& grid) {
        std::map<std::pair<std::string, int64_t>, size_t> live;
        for (const TxRecord& tx : records) {
            int64_t g = sample_time(tx.block_time, grid);
            for (const OutPoint& op : tx.inputs)
                g = std::max(g, coins[live.at({op.txid, op.vout})].birth);
            horizon = std::max(horizon, g);
            for (const OutPoint& op : tx.inputs) {
                coins[live.at({op.txid, op.vout})].spend = g;
                live.erase({op.txid, op.vout});
            }
            for (size_t i = 0; i < tx.outputs.size(); ++i) {
                live[{tx.txid, static_cast<int64_t>(i)}] = coins.size();
                coins.push_back({g, -1, tx.outputs[i]});
            }
        }
    }

    int64_t n(int64_t tau, int64_t t) const {
        int64_t sum = 0;
        for (const Coin& c : coins)
            if (c.birth == tau && c.birth <= t && (c.spend < 0 || c.spend > t))
                sum += c.value;
        return sum;
    }

    int64_t total(int64_t t) const {
        int64_t sum = 0;
        for (const Coin& c : coins)
            if (c.birth <= t && (c.spend < 0 || c.spend > t)) sum += c.value;
        return sum;
    }
};

}  // namespace chaincohort::testing

#endif  // CHAINCOHORT_TESTS_REPLAY_ORACLE_HPP
