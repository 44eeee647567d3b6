#ifndef CHAINCOHORT_REPORT_HPP
#define CHAINCOHORT_REPORT_HPP

#include <cstdint>
#include <string>
#include <vector>

namespace chaincohort {

// Exit-code contract shared by all subcommands (stable for CI):
//   0 success, 1 usage error, 2 data or invariant failure.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;

struct IngestOptions {
    std::string ledger_path;
    std::string out_dir;
    int64_t dt_seconds = 86400;
};

struct SynthOptions {
    std::string config_path;  // TOML (flat keys) or JSON
    std::string out_path;
};

struct ReportOptions {
    std::string subreport;  // holders|b2m|pnl|flows|scaling|multifractal|sanity
    std::string cache_dir;
    std::string out_dir;     // defaults to cache_dir
    std::string prices_path;
    std::vector<std::string> at_dates;  // ISO; empty selects built-in defaults in range
    bool svg = false;

    double band_short_days = 30.0;
    double band_medium_days = 365.0;

    std::string window_start;  // ISO; sampling window for time averages
    std::string window_end;
    double stride_days = 7.0;

    int zmax_lo = 125;  // nested power-law calibration sweep
    int zmax_hi = 200;

    std::string mf_tau_date;  // cohort for the multifractal measure
    std::vector<int64_t> mf_dt;  // box sizes; empty selects 1..50
    std::vector<double> mf_q;    // moment orders; empty selects -5..10

    double jump_threshold = 0.02;  // single-age flow share flagged as a jump
    int arma_max = 5;
    std::string split_date;  // cluster split for the alpha/return regression
};

int run_ingest(const IngestOptions& opt);
int run_synth(const SynthOptions& opt);
int run_report(const ReportOptions& opt);

/// Default analysis dates (major price peak/trough events).
const std::vector<std::string>& default_analysis_dates();

}  // namespace chaincohort

#endif  // CHAINCOHORT_REPORT_HPP
