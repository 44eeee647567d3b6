// chaincohort: rebuild the age-cohort ledger of a UTXO transaction stream and
// run the statistical pipeline on it.

#include <CLI11.hpp>

#include <iostream>
#include <sstream>
#include <string>

#include "chaincohort/report.hpp"

namespace {

int64_t parse_dt(const std::string& text) {
    size_t used = 0;
    const long long value = std::stoll(text, &used);
    const std::string unit = text.substr(used);
    if (value < 1) throw CLI::ValidationError("--dt must be positive");
    if (unit.empty() || unit == "d") return value * 86400;
    if (unit == "w") return value * 7 * 86400;
    throw CLI::ValidationError("--dt expects <N>d or <N>w, got '" + text + "'");
}

std::vector<std::string> split_csv(const std::string& text) {
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(item);
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"age-cohort ledger reconstruction and statistics"};
    app.require_subcommand(1);

    chaincohort::IngestOptions ingest_opt;
    std::string dt_text = "1d";
    CLI::App* ingest = app.add_subcommand("ingest", "parse a JSONL ledger into a cache");
    ingest->add_option("--ledger", ingest_opt.ledger_path, "JSONL transaction stream")
        ->required();
    ingest->add_option("--dt", dt_text, "grid step, e.g. 1d or 1w (default 1d)");
    ingest->add_option("--out", ingest_opt.out_dir, "cache directory")->required();

    chaincohort::SynthOptions synth_opt;
    CLI::App* synth = app.add_subcommand("synth", "generate a synthetic ledger");
    synth->add_option("--config", synth_opt.config_path, "TOML or JSON generator config")
        ->required();
    synth->add_option("--out", synth_opt.out_path, "output JSONL path")->required();

    chaincohort::ReportOptions rep_opt;
    std::string at_text, format_text = "csv";
    CLI::App* report = app.add_subcommand(
        "report", "write analysis tables (holders|b2m|pnl|flows|scaling|multifractal|sanity)");
    report->add_option("subreport", rep_opt.subreport, "which report to run")->required();
    report->add_option("--cache", rep_opt.cache_dir, "cache directory from ingest")
        ->required();
    report->add_option("--out", rep_opt.out_dir, "output directory (default: cache dir)");
    report->add_option("--prices", rep_opt.prices_path, "date,close_usd CSV");
    report->add_option("--at", at_text, "comma-separated analysis dates (ISO)");
    report->add_option("--format", format_text, "csv or csv,svg (default csv)");
    report->add_option("--band-short", rep_opt.band_short_days, "short band upper edge, days");
    report->add_option("--band-medium", rep_opt.band_medium_days,
                       "medium band upper edge, days");
    report->add_option("--window-start", rep_opt.window_start,
                       "sampling window start (ISO date)");
    report->add_option("--window-end", rep_opt.window_end, "sampling window end (ISO date)");
    report->add_option("--stride-days", rep_opt.stride_days,
                       "sampling stride for time averages, days (default 7)");
    report->add_option("--zmax-lo", rep_opt.zmax_lo, "calibration sweep lower z_max");
    report->add_option("--zmax-hi", rep_opt.zmax_hi, "calibration sweep upper z_max");
    report->add_option("--mf-tau", rep_opt.mf_tau_date, "multifractal cohort date (ISO)");
    std::string mf_dt_text, mf_q_text;
    report->add_option("--mf-dt", mf_dt_text,
                       "comma-separated box sizes (default 1..50)");
    report->add_option("--mf-q", mf_q_text,
                       "comma-separated moment orders (default -5..10)");
    report->add_option("--jump-threshold", rep_opt.jump_threshold,
                       "single-age flow share reported as a jump (default 0.02)");
    report->add_option("--arma-max", rep_opt.arma_max, "ARMA grid bound (default 5)");
    report->add_option("--split-date", rep_opt.split_date,
                       "cluster split for the alpha/return regression");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? chaincohort::kExitOk : chaincohort::kExitUsage;
    }

    try {
        if (*ingest) {
            ingest_opt.dt_seconds = parse_dt(dt_text);
            return chaincohort::run_ingest(ingest_opt);
        }
        if (*synth) return chaincohort::run_synth(synth_opt);
        rep_opt.at_dates = split_csv(at_text);
        for (const std::string& v : split_csv(mf_dt_text))
            rep_opt.mf_dt.push_back(std::stoll(v));
        for (const std::string& v : split_csv(mf_q_text))
            rep_opt.mf_q.push_back(std::stod(v));
        for (const std::string& f : split_csv(format_text)) {
            if (f == "svg") rep_opt.svg = true;
            else if (f != "csv") {
                std::cerr << "unknown format '" << f << "'\n";
                return chaincohort::kExitUsage;
            }
        }
        return chaincohort::run_report(rep_opt);
    } catch (const CLI::Error& e) {
        std::cerr << e.what() << "\n";
        return chaincohort::kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << e.what() << "\n";
        return chaincohort::kExitData;
    }
}
