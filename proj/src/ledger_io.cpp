#include "chaincohort/ledger_io.hpp"

#include <istream>
#include <ostream>
#include <unordered_map>

#include <json.hpp>

namespace chaincohort {

namespace {

using nlohmann::json;

struct SeenTx {
    std::vector<int64_t> amounts;
    std::vector<bool> spent;
};

int64_t require_int(const json& j, const char* field, size_t line) {
    if (!j.contains(field) || !j[field].is_number_integer())
        throw ParseError(line, std::string("missing or non-integer field '") + field + "'");
    return j[field].get<int64_t>();
}

}  // namespace

std::vector<TxRecord> parse_ledger(std::istream& in, const TimeGrid& grid) {
    std::vector<TxRecord> records;
    std::unordered_map<std::string, SeenTx> utxo;
    int64_t prev_height = -1;
    std::string line;
    size_t line_no = 0;

    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;

        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw ParseError(line_no, std::string("malformed JSON: ") + e.what());
        }
        if (!j.is_object()) throw ParseError(line_no, "not a JSON object");

        TxRecord tx;
        if (!j.contains("txid") || !j["txid"].is_string())
            throw ParseError(line_no, "missing or non-string field 'txid'");
        tx.txid = j["txid"].get<std::string>();
        tx.block_height = require_int(j, "height", line_no);
        tx.block_time = require_int(j, "time", line_no);
        if (!j.contains("coinbase") || !j["coinbase"].is_boolean())
            throw ParseError(line_no, "missing or non-boolean field 'coinbase'");
        tx.coinbase = j["coinbase"].get<bool>();

        if (tx.block_height < 0) throw ParseError(line_no, "negative block height");
        if (tx.block_height < prev_height)
            throw ParseError(line_no, "non-monotone block height " +
                                          std::to_string(tx.block_height) + " after " +
                                          std::to_string(prev_height));
        prev_height = tx.block_height;
        if (tx.block_time < grid.epoch_s)
            throw ParseError(line_no, "block time precedes grid epoch");

        if (!j.contains("inputs") || !j["inputs"].is_array())
            throw ParseError(line_no, "missing or non-array field 'inputs'");
        for (const auto& ji : j["inputs"]) {
            if (!ji.is_object() || !ji.contains("txid") || !ji["txid"].is_string())
                throw ParseError(line_no, "input without string 'txid'");
            OutPoint op;
            op.txid = ji["txid"].get<std::string>();
            op.vout = require_int(ji, "vout", line_no);
            if (op.vout < 0) throw ParseError(line_no, "negative vout");
            tx.inputs.push_back(std::move(op));
        }

        if (!j.contains("outputs") || !j["outputs"].is_array())
            throw ParseError(line_no, "missing or non-array field 'outputs'");
        for (const auto& jo : j["outputs"]) {
            if (!jo.is_number_integer())
                throw ParseError(line_no, "non-integer output amount");
            int64_t v = jo.get<int64_t>();
            if (v <= 0) throw ParseError(line_no, "non-positive output amount");
            tx.outputs.push_back(v);
        }

        if (tx.coinbase != tx.inputs.empty())
            throw ParseError(line_no, tx.coinbase ? "coinbase with inputs"
                                                  : "non-coinbase without inputs");
        if (!tx.coinbase && tx.outputs.empty())
            throw ParseError(line_no, "non-coinbase without outputs");
        if (utxo.count(tx.txid))
            throw ParseError(line_no, "duplicate txid '" + tx.txid + "'");

        int64_t in_total = 0;
        for (const auto& op : tx.inputs) {
            auto it = utxo.find(op.txid);
            if (it == utxo.end() ||
                op.vout >= static_cast<int64_t>(it->second.amounts.size()))
                throw ParseError(line_no, "dangling reference (" + op.txid + "," +
                                              std::to_string(op.vout) + ")");
            if (it->second.spent[op.vout])
                throw ParseError(line_no, "double-spend of outpoint (" + op.txid + "," +
                                              std::to_string(op.vout) + ")");
            it->second.spent[op.vout] = true;
            in_total += it->second.amounts[op.vout];
        }
        if (!tx.coinbase && tx.output_total() > in_total)
            throw ParseError(line_no, "outputs exceed inputs (value creation)");

        SeenTx entry;
        entry.amounts = tx.outputs;
        entry.spent.assign(tx.outputs.size(), false);
        utxo.emplace(tx.txid, std::move(entry));
        records.push_back(std::move(tx));
    }
    return records;
}

void write_ledger(std::ostream& out, std::span<const TxRecord> records) {
    for (const TxRecord& tx : records) {
        json j;
        j["txid"] = tx.txid;
        j["height"] = tx.block_height;
        j["time"] = tx.block_time;
        json ins = json::array();
        for (const auto& op : tx.inputs) ins.push_back({{"txid", op.txid}, {"vout", op.vout}});
        j["inputs"] = std::move(ins);
        j["outputs"] = tx.outputs;
        j["coinbase"] = tx.coinbase;
        out << j.dump() << '\n';
    }
}

double PriceSeries::at(int64_t index) const {
    if (!covers(index))
        throw std::out_of_range("no price at grid index " + std::to_string(index) +
                                " (covered range " + std::to_string(first_index) + ".." +
                                std::to_string(last_index()) + ")");
    return close_usd[static_cast<size_t>(index - first_index)];
}

PriceSeries load_prices(std::istream& in, const TimeGrid& grid) {
    PriceSeries series;
    std::string line;
    size_t line_no = 0;
    bool header_seen = false;

    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (!header_seen) {
            if (line != "date,close_usd")
                throw ParseError(line_no, "expected header 'date,close_usd'");
            header_seen = true;
            continue;
        }
        auto comma = line.find(',');
        if (comma == std::string::npos) throw ParseError(line_no, "missing comma");
        int64_t ts;
        try {
            ts = parse_iso(line.substr(0, comma));
        } catch (const std::invalid_argument& e) {
            throw ParseError(line_no, e.what());
        }
        double px;
        try {
            size_t used = 0;
            px = std::stod(line.substr(comma + 1), &used);
            if (used != line.size() - comma - 1) throw std::invalid_argument("trailing junk");
        } catch (const std::exception&) {
            throw ParseError(line_no, "unparseable price '" + line.substr(comma + 1) + "'");
        }
        if (!(px > 0.0)) throw ParseError(line_no, "non-positive price");

        int64_t idx = sample_time(ts, grid);
        if (series.close_usd.empty()) {
            series.first_index = idx;
        } else if (idx != series.last_index() + 1) {
            throw ParseError(line_no, "gap in price coverage: grid index " +
                                          std::to_string(idx) + " after " +
                                          std::to_string(series.last_index()));
        }
        series.close_usd.push_back(px);
    }
    if (!header_seen) throw ParseError(0, "empty price file");
    return series;
}

}  // namespace chaincohort
