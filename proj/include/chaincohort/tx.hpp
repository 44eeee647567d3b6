#ifndef CHAINCOHORT_TX_HPP
#define CHAINCOHORT_TX_HPP

#include <cstdint>
#include <string>
#include <vector>

namespace chaincohort {

/// Reference to one output of a previous transaction.
struct OutPoint {
    std::string txid;
    int64_t vout = 0;

    bool operator==(const OutPoint&) const = default;
};

/// One normalized transaction. Amounts are integer satoshi throughout.
/// Coinbase transactions have no inputs; everything else spends previously
/// created, not-yet-spent outputs.
struct TxRecord {
    std::string txid;
    int64_t block_height = 0;
    int64_t block_time = 0;            // Unix seconds
    std::vector<OutPoint> inputs;
    std::vector<int64_t> outputs;      // satoshi, all > 0
    bool coinbase = false;

    bool operator==(const TxRecord&) const = default;

    int64_t output_total() const {
        int64_t s = 0;
        for (int64_t v : outputs) s += v;
        return s;
    }
};

}  // namespace chaincohort

#endif  // CHAINCOHORT_TX_HPP
