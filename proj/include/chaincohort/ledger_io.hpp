#ifndef CHAINCOHORT_LEDGER_IO_HPP
#define CHAINCOHORT_LEDGER_IO_HPP

#include <cstdint>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "chaincohort/time_grid.hpp"
#include "chaincohort/tx.hpp"

namespace chaincohort {

/// Parse/validation failure. `line` is 1-based; 0 when the defect is not tied
/// to a single line.
class ParseError : public std::runtime_error {
public:
    ParseError(size_t line, const std::string& what)
        : std::runtime_error(line ? "line " + std::to_string(line) + ": " + what : what),
          line_(line) {}
    size_t line() const { return line_; }

private:
    size_t line_;
};

/// Parse a JSON-Lines transaction stream and enforce UTXO discipline:
/// every non-coinbase input must reference a previously seen, unspent output,
/// block heights must be non-decreasing, txids must be unique, output amounts
/// positive, and non-coinbase transactions may not create value
/// (sum of outputs <= sum of inputs; the deficit is the fee).
/// Transactions inside a block may spend outputs created earlier in the same
/// block; lines are processed in file order.
std::vector<TxRecord> parse_ledger(std::istream& in, const TimeGrid& grid);

/// Serialize records in the same JSONL schema parse_ledger reads.
void write_ledger(std::ostream& out, std::span<const TxRecord> records);

/// Close prices on a contiguous grid range. Queries outside the range are
/// errors, never extrapolated.
struct PriceSeries {
    int64_t first_index = 0;
    std::vector<double> close_usd;

    bool covers(int64_t index) const {
        return index >= first_index &&
               index < first_index + static_cast<int64_t>(close_usd.size());
    }
    int64_t last_index() const {
        return first_index + static_cast<int64_t>(close_usd.size()) - 1;
    }
    double at(int64_t index) const;
    bool empty() const { return close_usd.empty(); }
};

/// Read a `date,close_usd` CSV; one row per grid step, contiguous, all
/// prices positive.
PriceSeries load_prices(std::istream& in, const TimeGrid& grid);

}  // namespace chaincohort

#endif  // CHAINCOHORT_LEDGER_IO_HPP
