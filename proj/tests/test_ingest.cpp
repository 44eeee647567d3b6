#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>
#include <sstream>

#include "chaincohort/ledger_io.hpp"
#include "chaincohort/rng.hpp"
#include "chaincohort/synth.hpp"
#include "chaincohort/time_grid.hpp"

using namespace chaincohort;

TEST_CASE("sample_time rounds up onto the grid") {
    TimeGrid grid;  // epoch 1970-01-01, 1 day

    SUBCASE("mid-interval timestamps round to the next boundary") {
        const int64_t ts = parse_iso("2013-04-04T10:00:00Z");
        const int64_t idx = sample_time(ts, grid);
        CHECK(grid_time(idx, grid) == parse_iso("2013-04-05"));
    }
    SUBCASE("exact boundaries map to themselves") {
        const int64_t ts = parse_iso("2013-04-04");
        CHECK(grid_time(sample_time(ts, grid), grid) == ts);
    }
    SUBCASE("the epoch is index 0") { CHECK(sample_time(0, grid) == 0); }
    SUBCASE("pre-epoch timestamps are rejected") {
        CHECK_THROWS_AS(sample_time(-1, grid), std::invalid_argument);
    }
    SUBCASE("monotone non-decreasing in the timestamp") {
        int64_t prev = 0;
        for (int64_t ts = 0; ts < 3 * 86400; ts += 977) {
            const int64_t idx = sample_time(ts, grid);
            CHECK(idx >= prev);
            prev = idx;
        }
    }
    SUBCASE("weekly grid") {
        grid.step_s = 7 * 86400;
        CHECK(sample_time(6 * 86400, grid) == 1);
        CHECK(sample_time(7 * 86400, grid) == 1);
        CHECK(sample_time(7 * 86400 + 1, grid) == 2);
    }
}

TEST_CASE("iso date helpers round-trip") {
    for (const char* d : {"1970-01-01", "2009-01-03", "2013-11-28", "2020-02-29"}) {
        CHECK(format_iso_date(parse_iso(d)) == d);
    }
    CHECK(parse_iso("2013-04-04T10:00:00Z") == parse_iso("2013-04-04") + 36000);
    CHECK_THROWS_AS(parse_iso("not-a-date"), std::invalid_argument);
}

namespace {

std::vector<TxRecord> parse_text(const std::string& text) {
    std::istringstream in(text);
    return parse_ledger(in, TimeGrid{});
}

const char* kGenesisLine =
    R"({"txid":"a","height":0,"time":1231006505,"inputs":[],"outputs":[5000000000],"coinbase":true})";

}  // namespace

TEST_CASE("parse_ledger accepts a single coinbase") {
    const auto records = parse_text(std::string(kGenesisLine) + "\n");
    REQUIRE(records.size() == 1);
    CHECK(records[0].txid == "a");
    CHECK(records[0].coinbase);
    CHECK(records[0].output_total() == 5000000000);  // 50 BTC
}

TEST_CASE("parse_ledger replays the UTXO set") {
    std::string text = std::string(kGenesisLine) + "\n" +
        R"({"txid":"b","height":1,"time":1231009505,"inputs":[{"txid":"a","vout":0}],"outputs":[3000000000,2000000000],"coinbase":false})" +
        "\n";
    const auto records = parse_text(text);
    REQUIRE(records.size() == 2);
    // Hand replay: (a,0) is consumed, UTXO set is exactly b's two outputs.
    CHECK(records[1].inputs.size() == 1);
    CHECK(records[1].output_total() == 5000000000);

    SUBCASE("spending the same outpoint twice is a double-spend") {
        text +=
            R"({"txid":"c","height":2,"time":1231012505,"inputs":[{"txid":"a","vout":0}],"outputs":[1],"coinbase":false})"
            "\n";
        CHECK_THROWS_WITH_AS(parse_text(text),
                             doctest::Contains("double-spend of outpoint (a,0)"),
                             ParseError);
    }
    SUBCASE("unknown outpoints are dangling") {
        text +=
            R"({"txid":"c","height":2,"time":1231012505,"inputs":[{"txid":"zz","vout":0}],"outputs":[1],"coinbase":false})"
            "\n";
        CHECK_THROWS_WITH_AS(parse_text(text), doctest::Contains("dangling"), ParseError);
    }
    SUBCASE("out-of-range vout is dangling") {
        text +=
            R"({"txid":"c","height":2,"time":1231012505,"inputs":[{"txid":"b","vout":7}],"outputs":[1],"coinbase":false})"
            "\n";
        CHECK_THROWS_AS(parse_text(text), ParseError);
    }
}

TEST_CASE("parse_ledger rejects malformed input with its line number") {
    const std::string text = std::string(kGenesisLine) + "\n{broken\n";
    try {
        parse_text(text);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line() == 2);
    }
}

TEST_CASE("parse_ledger validation battery") {
    SUBCASE("non-monotone heights") {
        const std::string text = std::string(kGenesisLine) + "\n" +
            R"({"txid":"b","height":0,"time":1231006505,"inputs":[],"outputs":[1],"coinbase":true})" "\n" +
            R"({"txid":"c","height":-1,"time":1231006505,"inputs":[],"outputs":[1],"coinbase":true})" "\n";
        CHECK_THROWS_AS(parse_text(text), ParseError);
    }
    SUBCASE("value creation") {
        const std::string text = std::string(kGenesisLine) + "\n" +
            R"({"txid":"b","height":1,"time":1231009505,"inputs":[{"txid":"a","vout":0}],"outputs":[5000000001],"coinbase":false})" "\n";
        CHECK_THROWS_WITH_AS(parse_text(text), doctest::Contains("outputs exceed inputs"),
                             ParseError);
    }
    SUBCASE("zero output amount") {
        CHECK_THROWS_AS(
            parse_text(
                R"({"txid":"a","height":0,"time":1231006505,"inputs":[],"outputs":[0],"coinbase":true})" "\n"),
            ParseError);
    }
    SUBCASE("coinbase flag must match empty inputs") {
        CHECK_THROWS_AS(
            parse_text(
                R"({"txid":"a","height":0,"time":1231006505,"inputs":[],"outputs":[5],"coinbase":false})" "\n"),
            ParseError);
    }
    SUBCASE("duplicate txid") {
        const std::string text = std::string(kGenesisLine) + "\n" + kGenesisLine + "\n";
        CHECK_THROWS_WITH_AS(parse_text(text), doctest::Contains("duplicate txid"),
                             ParseError);
    }
    SUBCASE("intra-block spends are legal") {
        const std::string text = std::string(kGenesisLine) + "\n" +
            R"({"txid":"b","height":0,"time":1231006505,"inputs":[{"txid":"a","vout":0}],"outputs":[5000000000],"coinbase":false})" "\n";
        CHECK(parse_text(text).size() == 2);
    }
}

TEST_CASE("parsing is replay deterministic") {
    SynthConfig cfg;
    cfg.horizon_steps = 40;
    cfg.alpha = 1.0;
    cfg.issuance_per_step = 500;
    cfg.seed = 7;
    const auto records = synthesize_ledger(cfg, TimeGrid{});
    std::ostringstream out;
    write_ledger(out, records);
    const auto first = parse_text(out.str());
    const auto second = parse_text(out.str());
    CHECK(first == second);
    CHECK(first == records);  // serialize -> parse round trip
}

TEST_CASE("UTXO closure: unspent mass equals issuance") {
    SynthConfig cfg;
    cfg.horizon_steps = 60;
    cfg.alpha = 0.9;
    cfg.issuance_per_step = 321;
    cfg.granularity = 3;
    cfg.seed = 11;
    const auto records = synthesize_ledger(cfg, TimeGrid{});

    std::map<std::pair<std::string, int64_t>, int64_t> unspent;
    int64_t issued = 0;
    for (const TxRecord& tx : records) {
        for (const OutPoint& op : tx.inputs) unspent.erase({op.txid, op.vout});
        for (size_t i = 0; i < tx.outputs.size(); ++i)
            unspent[{tx.txid, static_cast<int64_t>(i)}] = tx.outputs[i];
        if (tx.coinbase) issued += tx.output_total();
    }
    int64_t held = 0;
    for (const auto& [_, v] : unspent) held += v;
    CHECK(held == issued);
    CHECK(issued == 61 * 321 * 3);
}

TEST_CASE("load_prices") {
    TimeGrid grid;
    SUBCASE("reads event-day closes") {
        std::istringstream in("date,close_usd\n2013-11-27,990.0\n2013-11-28,1012.98\n");
        const PriceSeries p = load_prices(in, grid);
        CHECK(p.at(sample_time(parse_iso("2013-11-28"), grid)) == doctest::Approx(1012.98));
    }
    SUBCASE("trough close") {
        std::istringstream in("date,close_usd\n2013-07-04,79.40\n");
        const PriceSeries p = load_prices(in, grid);
        CHECK(p.at(sample_time(parse_iso("2013-07-04"), grid)) == doctest::Approx(79.40));
    }
    SUBCASE("rejects non-positive prices") {
        std::istringstream in("date,close_usd\n2013-07-04,0\n");
        CHECK_THROWS_AS(load_prices(in, grid), ParseError);
    }
    SUBCASE("rejects coverage gaps") {
        std::istringstream in("date,close_usd\n2013-07-04,79.4\n2013-07-06,80.1\n");
        CHECK_THROWS_WITH_AS(load_prices(in, grid), doctest::Contains("gap"), ParseError);
    }
    SUBCASE("never extrapolates") {
        std::istringstream in("date,close_usd\n2013-07-04,79.4\n");
        const PriceSeries p = load_prices(in, grid);
        CHECK_THROWS_AS(p.at(0), std::out_of_range);
    }
}

TEST_CASE("synthetic generator honors an explicit death table") {
    SynthConfig cfg;
    cfg.horizon_steps = 50;
    cfg.pi_table = {0.5, 0.5};  // half the survivors die at ages 1 and 2
    cfg.issuance_per_step = 10000;
    cfg.seed = 23;
    const auto records = synthesize_ledger(cfg, TimeGrid{});

    // Measure the realized age-1 death fraction per cohort and compare with
    // p = 0.5 within 3-sigma binomial bounds.
    std::map<std::string, int64_t> birth_step;
    std::map<std::pair<std::string, int64_t>, int64_t> amounts;
    std::vector<int64_t> born(51, 0), died_age1(51, 0);
    for (const TxRecord& tx : records) {
        const int64_t step = tx.block_time / 86400;
        birth_step[tx.txid] = step;
        for (size_t i = 0; i < tx.outputs.size(); ++i)
            amounts[{tx.txid, static_cast<int64_t>(i)}] = tx.outputs[i];
        born[static_cast<size_t>(step)] += tx.output_total();
        for (const OutPoint& op : tx.inputs) {
            const int64_t b = birth_step.at(op.txid);
            if (step - b == 1)
                died_age1[static_cast<size_t>(b)] += amounts.at({op.txid, op.vout});
        }
    }
    double all_born = 0, all_died = 0;
    for (int64_t tau = 5; tau + 2 <= 50; ++tau) {
        const double n = static_cast<double>(born[static_cast<size_t>(tau)]);
        const double frac = static_cast<double>(died_age1[static_cast<size_t>(tau)]) / n;
        // 4.5 sigma per cohort: the sweep tests ~45 cohorts at once
        CHECK(std::abs(frac - 0.5) < 4.5 * std::sqrt(0.25 / n) + 1e-12);
        all_born += n;
        all_died += static_cast<double>(died_age1[static_cast<size_t>(tau)]);
    }
    CHECK(std::abs(all_died / all_born - 0.5) < 3.0 * std::sqrt(0.25 / all_born));
}

TEST_CASE("degenerate concentration: every coin trades every step") {
    SynthConfig cfg;
    cfg.horizon_steps = 20;
    cfg.pi_table = {1.0};  // the alpha -> infinity limit
    cfg.issuance_per_step = 100;
    cfg.seed = 1;
    const auto records = synthesize_ledger(cfg, TimeGrid{});

    // V(t) = N(t-1): everything alive yesterday dies today.
    std::vector<int64_t> minted(21, 0), traded(21, 0);
    std::map<std::string, std::vector<int64_t>> outs;
    for (const TxRecord& tx : records) {
        const int64_t step = tx.block_time / 86400;
        outs[tx.txid] = tx.outputs;
        if (tx.coinbase) minted[static_cast<size_t>(step)] += tx.output_total();
        for (const OutPoint& op : tx.inputs)
            traded[static_cast<size_t>(step)] += outs.at(op.txid)[static_cast<size_t>(op.vout)];
    }
    int64_t alive = 0;
    for (int64_t t = 0; t <= 20; ++t) {
        CHECK(traded[static_cast<size_t>(t)] == alive);
        alive += minted[static_cast<size_t>(t)];
    }
}

TEST_CASE("synthesis validates its config") {
    SynthConfig cfg;
    cfg.horizon_steps = 1;
    cfg.alpha = 1.0;
    cfg.issuance_per_step = 10;
    CHECK_THROWS_AS(synthesize_ledger(cfg, TimeGrid{}), std::invalid_argument);
    cfg.horizon_steps = 10;
    cfg.alpha = -0.5;
    CHECK_THROWS_AS(synthesize_ledger(cfg, TimeGrid{}), std::invalid_argument);
}

TEST_CASE("fixed seed means byte-identical output") {
    SynthConfig cfg;
    cfg.horizon_steps = 30;
    cfg.alpha = 0.87;
    cfg.issuance_per_step = 1000;
    cfg.seed = 99;
    std::ostringstream a, b;
    write_ledger(a, synthesize_ledger(cfg, TimeGrid{}));
    write_ledger(b, synthesize_ledger(cfg, TimeGrid{}));
    CHECK(a.str() == b.str());
    cfg.seed = 100;
    std::ostringstream c;
    write_ledger(c, synthesize_ledger(cfg, TimeGrid{}));
    CHECK(a.str() != c.str());
}

TEST_CASE("rng binomial matches its mean and variance") {
    Rng rng(42);
    SUBCASE("small-mean inversion") {
        double sum = 0;
        const int trials = 20000;
        for (int i = 0; i < trials; ++i) sum += static_cast<double>(rng.binomial(40, 0.3));
        CHECK(sum / trials == doctest::Approx(12.0).epsilon(0.02));
    }
    SUBCASE("large-mean branch") {
        double sum = 0;
        const int trials = 2000;
        for (int i = 0; i < trials; ++i)
            sum += static_cast<double>(rng.binomial(1000000, 0.25));
        CHECK(sum / trials == doctest::Approx(250000.0).epsilon(0.001));
    }
    SUBCASE("edges") {
        CHECK(rng.binomial(100, 0.0) == 0);
        CHECK(rng.binomial(100, 1.0) == 100);
        CHECK(rng.binomial(0, 0.5) == 0);
    }
}
