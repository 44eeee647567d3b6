#include "chaincohort/report.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "chaincohort/csv.hpp"
#include "chaincohort/flow_ledger.hpp"
#include "chaincohort/flows.hpp"
#include "chaincohort/holders.hpp"
#include "chaincohort/ledger_io.hpp"
#include "chaincohort/multifractal.hpp"
#include "chaincohort/returns.hpp"
#include "chaincohort/scaling.hpp"
#include "chaincohort/stats.hpp"
#include "chaincohort/svg.hpp"
#include "chaincohort/synth.hpp"

namespace fs = std::filesystem;

namespace chaincohort {

namespace {

constexpr const char* kCacheFile = "flowledger.bin";

const std::vector<std::string> kDefaultDates = {
    "2013-04-04", "2013-07-04", "2013-11-28", "2015-01-15", "2017-12-21", "2019-01-31"};

int thread_budget() {
    if (const char* env = std::getenv("CHAINCOHORT_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v >= 1) return static_cast<int>(v);
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

/// Run independent jobs on up to CHAINCOHORT_THREADS workers. Jobs write
/// distinct files and share no mutable state, so scheduling order never
/// affects output bytes.
void run_parallel(const std::vector<std::function<void()>>& jobs) {
    const int workers = std::min<int>(thread_budget(), static_cast<int>(jobs.size()));
    if (workers <= 1) {
        for (const auto& job : jobs) job();
        return;
    }
    std::atomic<size_t> next{0};
    std::mutex err_mutex;
    std::exception_ptr first_error;
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(workers));
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                const size_t i = next.fetch_add(1);
                if (i >= jobs.size()) return;
                try {
                    jobs[i]();
                } catch (...) {
                    std::lock_guard lock(err_mutex);
                    if (!first_error) first_error = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

std::string date_of(int64_t index, const TimeGrid& grid) {
    return format_iso_date(grid_time(index, grid));
}

double sat_to_btc(int64_t sat) { return static_cast<double>(sat) / 1e8; }

// Block subsidy under the halving schedule, satoshi per block.
int64_t block_reward(int64_t height) {
    const int64_t halvings = height / 210000;
    if (halvings >= 63) return 0;
    return 5000000000LL >> halvings;
}

FlowLedger load_cache(const std::string& cache_dir) {
    const fs::path path = fs::path(cache_dir) / kCacheFile;
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open cache " + path.string());
    FlowLedger fl = load_flow_ledger(in);
    const ConservationReport rep = conservation_report(fl);
    if (!rep.ok)
        throw std::runtime_error("cache violates conservation at t=" +
                                 std::to_string(rep.defect_t) + ": " + rep.defect);
    return fl;
}

std::vector<int64_t> resolve_dates(const ReportOptions& opt, const FlowLedger& fl) {
    std::vector<int64_t> indices;
    if (!opt.at_dates.empty()) {
        for (const std::string& d : opt.at_dates) {
            const int64_t idx = sample_time(parse_iso(d), fl.grid);
            if (idx > fl.horizon())
                throw std::runtime_error("analysis date " + d + " beyond ledger horizon " +
                                         date_of(fl.horizon(), fl.grid));
            indices.push_back(idx);
        }
        return indices;
    }
    for (const std::string& d : kDefaultDates) {
        const int64_t ts = parse_iso(d);
        if (ts < fl.grid.epoch_s) continue;
        const int64_t idx = sample_time(ts, fl.grid);
        if (idx >= 1 && idx <= fl.horizon()) indices.push_back(idx);
    }
    if (indices.empty()) indices.push_back(fl.horizon());
    return indices;
}

struct Sampling {
    SamplingSpec spec;
    WindowSweep sweep;
};

Sampling resolve_sampling(const ReportOptions& opt, const FlowLedger& fl) {
    Sampling s;
    const int64_t horizon = fl.horizon();
    s.spec.stride = std::max<int64_t>(
        1, std::llround(opt.stride_days / fl.grid.days_per_step()));
    s.spec.t_first = opt.window_start.empty()
                         ? std::min(horizon, std::max<int64_t>(1, horizon / 10))
                         : sample_time(parse_iso(opt.window_start), fl.grid);
    s.spec.t_last =
        opt.window_end.empty() ? horizon : sample_time(parse_iso(opt.window_end), fl.grid);
    s.spec.t_first = std::max<int64_t>(1, s.spec.t_first);
    s.spec.t_last = std::min(horizon, s.spec.t_last);
    if ((s.spec.t_last - s.spec.t_first) / s.spec.stride + 1 < 20) s.spec.stride = 1;

    // Clip the calibration sweep to the age range the data can support.
    const int64_t max_age = s.spec.t_last;
    s.sweep.zmax_hi = static_cast<int>(std::min<int64_t>(opt.zmax_hi, max_age));
    s.sweep.zmax_lo = std::min(opt.zmax_lo, s.sweep.zmax_hi);
    if (s.sweep.zmax_hi < 10)
        throw std::runtime_error("ledger too short for the calibration sweep");
    return s;
}

void maybe_svg(const ReportOptions& opt, const fs::path& path,
               const std::vector<SvgSeries>& series, const SvgOptions& so) {
    if (!opt.svg) return;
    atomic_write(path, render_chart(series, so));
}

PriceSeries require_prices(const ReportOptions& opt, const FlowLedger& fl) {
    if (opt.prices_path.empty())
        throw std::runtime_error("subreport '" + opt.subreport + "' needs --prices");
    std::ifstream in(opt.prices_path);
    if (!in) throw std::runtime_error("cannot open prices " + opt.prices_path);
    return load_prices(in, fl.grid);
}

// ---------------------------------------------------------------------------
// Subreports
// ---------------------------------------------------------------------------

void report_holders(const ReportOptions& opt, const FlowLedger& fl, const fs::path& out) {
    const HolderBands bands{opt.band_short_days, opt.band_medium_days};
    const FractionSeries fh = holder_fractions(fl, bands);
    const FractionSeries vf = volume_fractions(fl, bands);

    for (const FractionSeries* s : {&fh, &vf}) {
        for (size_t t = 0; t < s->valid.size(); ++t) {
            if (!s->valid[t]) continue;
            const double sum = s->f_short[static_cast<Eigen::Index>(t)] +
                               s->f_medium[static_cast<Eigen::Index>(t)] +
                               s->f_long[static_cast<Eigen::Index>(t)];
            if (std::abs(sum - 1.0) > 1e-12)
                throw std::runtime_error("band fractions do not sum to 1 at t=" +
                                         std::to_string(t));
        }
    }

    auto write_fractions = [&](const FractionSeries& s, const char* name) {
        std::ostringstream csv;
        csv << "t,fh_s,fh_m,fh_l\n";
        for (Eigen::Index t = 0; t < s.size(); ++t) {
            if (!s.valid[static_cast<size_t>(t)]) continue;
            csv << date_of(s.first_t + t, fl.grid) << ',' << fmt_g12(s.f_short[t]) << ','
                << fmt_g12(s.f_medium[t]) << ',' << fmt_g12(s.f_long[t]) << '\n';
        }
        atomic_write(out / name, csv.str());
    };
    write_fractions(fh, "holder_fractions.csv");
    write_fractions(vf, "volume_fractions.csv");

    // Statistical battery on the fraction series and their differences.
    nlohmann::ordered_json stats_json;
    const FractionSeries dfh = diff_series(fh);
    const std::vector<std::pair<std::string, Vec>> levels = {
        {"fh_s", valid_run(fh, 0)}, {"fh_m", valid_run(fh, 1)}, {"fh_l", valid_run(fh, 2)}};
    const std::vector<std::pair<std::string, Vec>> diffs = {
        {"d_fh_s", valid_run(dfh, 0)}, {"d_fh_m", valid_run(dfh, 1)},
        {"d_fh_l", valid_run(dfh, 2)}};

    auto corr_json = [&](const std::vector<std::pair<std::string, Vec>>& named) {
        std::vector<Vec> vs;
        for (const auto& [_, v] : named) vs.push_back(v);
        const stats::CorrMatrix cm = stats::corr_matrix(vs);
        nlohmann::ordered_json j;
        for (size_t i = 0; i < named.size(); ++i)
            for (size_t j2 = 0; j2 < named.size(); ++j2)
                j[named[i].first][named[j2].first] =
                    cm.defined[i][j2]
                        ? nlohmann::ordered_json(cm.r(static_cast<Eigen::Index>(i),
                                                      static_cast<Eigen::Index>(j2)))
                        : nlohmann::ordered_json();
        return j;
    };
    stats_json["correlation"]["levels"] = corr_json(levels);
    stats_json["correlation"]["diffs"] = corr_json(diffs);

    // Short or degenerate extracts (a constant band, say) make individual
    // tests inapplicable; that is recorded per entry, not a report failure.
    auto guarded = [&](nlohmann::ordered_json& slot, auto&& compute) {
        try {
            slot = compute();
        } catch (const std::exception& e) {
            slot = {{"skipped", e.what()}};
        }
    };

    auto adf_json = [](const stats::AdfResult& adf) {
        return nlohmann::ordered_json{{"t_stat", adf.t_stat},
                                      {"crit_5pct", adf.crit_5pct},
                                      {"reject_unit_root_95", adf.reject_at_95},
                                      {"lags", adf.lags}};
    };
    for (const auto& [name, v] : levels) {
        for (const auto reg : {stats::AdfRegression::Drift, stats::AdfRegression::DriftTrend}) {
            const char* key = reg == stats::AdfRegression::Drift ? "drift" : "drift_trend";
            guarded(stats_json["adf"][name][key],
                    [&] { return adf_json(stats::adf_test(v, reg)); });
        }
    }
    for (const auto& [name, v] : diffs) {
        guarded(stats_json["adf"][name]["drift"], [&] {
            return adf_json(stats::adf_test(v, stats::AdfRegression::Drift));
        });
        guarded(stats_json["ljung_box"][name], [&] {
            const stats::LjungBoxResult lb =
                stats::ljung_box(v, std::min<int>(20, static_cast<int>(v.size() / 4)));
            return nlohmann::ordered_json{
                {"Q", lb.q}, {"p_value", lb.p_value}, {"lags", lb.lags}};
        });
        guarded(stats_json["arma"][name], [&] {
            const stats::ArmaSelection sel =
                stats::arma_select(v, opt.arma_max, opt.arma_max);
            nlohmann::ordered_json cell;
            cell["aic_order"] = {sel.aic_order.first, sel.aic_order.second};
            cell["bic_order"] = {sel.bic_order.first, sel.bic_order.second};
            cell["bic_fit"] = {
                {"mu", sel.bic_fit.mu},
                {"phi", std::vector<double>(sel.bic_fit.phi.begin(), sel.bic_fit.phi.end())},
                {"theta",
                 std::vector<double>(sel.bic_fit.theta.begin(), sel.bic_fit.theta.end())},
                {"sigma2", sel.bic_fit.sigma2}};
            cell["aic_fit"] = {
                {"mu", sel.aic_fit.mu},
                {"phi", std::vector<double>(sel.aic_fit.phi.begin(), sel.aic_fit.phi.end())},
                {"theta",
                 std::vector<double>(sel.aic_fit.theta.begin(), sel.aic_fit.theta.end())},
                {"sigma2", sel.aic_fit.sigma2}};
            if (!sel.skipped_cells.empty()) {
                nlohmann::ordered_json skipped = nlohmann::ordered_json::array();
                for (const auto& [p, q] : sel.skipped_cells) skipped.push_back({p, q});
                cell["skipped_cells"] = skipped;
            }
            return cell;
        });
    }

    auto var_json = [&](const Vec& a, const Vec& b) {
        const Eigen::Index n = std::min(a.size(), b.size());
        const stats::VarFit var = stats::var_fit(a.tail(n), b.tail(n));
        nlohmann::ordered_json j;
        const char* cols[3] = {"const", "lag_1", "lag_2"};
        for (int eq = 0; eq < 2; ++eq)
            for (int c = 0; c < 3; ++c)
                j[eq == 0 ? "eq1" : "eq2"][cols[c]] = {{"coef", var.coef(eq, c)},
                                                       {"t", var.tstat(eq, c)}};
        return j;
    };
    guarded(stats_json["var"]["d_fh_s__d_fh_m"],
            [&] { return var_json(diffs[0].second, diffs[1].second); });
    guarded(stats_json["var"]["d_fh_m__d_fh_l"],
            [&] { return var_json(diffs[1].second, diffs[2].second); });

    // Correlation of the band increments against the simple price return.
    if (!opt.prices_path.empty()) {
        const PriceSeries prices = require_prices(opt, fl);
        std::vector<Vec> joint;
        std::vector<std::string> names;
        const int64_t lo = std::max<int64_t>(dfh.first_t, prices.first_index + 1);
        const int64_t hi = std::min<int64_t>(dfh.first_t + dfh.size() - 1, prices.last_index());
        if (hi - lo >= 10) {
            Vec ret(hi - lo + 1);
            for (int64_t t = lo; t <= hi; ++t)
                ret[t - lo] = prices.at(t) / prices.at(t - 1) - 1.0;
            for (int b = 0; b < 3; ++b) {
                const Vec* src = b == 0 ? &dfh.f_short : b == 1 ? &dfh.f_medium : &dfh.f_long;
                joint.push_back(src->segment(lo - dfh.first_t, hi - lo + 1));
                names.push_back(b == 0 ? "d_fh_s" : b == 1 ? "d_fh_m" : "d_fh_l");
            }
            joint.push_back(ret);
            names.push_back("r_t");
            const stats::CorrMatrix cm = stats::corr_matrix(joint);
            for (size_t i = 0; i < names.size(); ++i)
                stats_json["correlation"]["diffs_vs_return"][names[i]] =
                    cm.defined[i][3] ? nlohmann::ordered_json(
                                           cm.r(static_cast<Eigen::Index>(i), 3))
                                     : nlohmann::ordered_json();
        }
    }
    atomic_write(out / "stats_report.json", stats_json.dump(2) + "\n");

    std::vector<SvgSeries> chart;
    Vec tx = Vec::LinSpaced(fh.size(), 0, static_cast<double>(fh.size() - 1));
    chart.push_back({tx, fh.f_short, "short", "#ff7f0e", false});
    chart.push_back({tx, fh.f_medium, "medium", "#2ca02c", false});
    chart.push_back({tx, fh.f_long, "long", "#d62728", false});
    maybe_svg(opt, out / "holder_fractions.svg", chart,
              {"Holder fractions by age band", "grid step", "fraction", false, false});
}

void report_b2m_or_pnl(const ReportOptions& opt, const FlowLedger& fl, const fs::path& out,
                       bool realized) {
    const PriceSeries prices = require_prices(opt, fl);
    const std::vector<int64_t> dates = resolve_dates(opt, fl);

    std::vector<std::function<void()>> jobs;
    for (const int64_t t : dates) {
        jobs.emplace_back([&, t] {
            const ReturnDistribution dist = realized ? pnl_distribution(fl, prices, t)
                                                     : b2m_distribution(fl, prices, t);
            const std::string date = date_of(t, fl.grid);
            std::ostringstream csv;
            csv << "r,cdf\n";
            double acc = 0.0, prev = -1.0;
            for (size_t i = 0; i < dist.r.size(); ++i) {
                acc += dist.w[i];
                const double c = acc / dist.total;
                if (c < prev - 1e-15)
                    throw std::runtime_error("cdf not monotone at t=" + std::to_string(t));
                prev = c;
                csv << fmt_g12(dist.r[i]) << ',' << fmt_g12(c) << '\n';
            }
            if (!dist.empty() && std::abs(acc / dist.total - 1.0) > 1e-12)
                throw std::runtime_error("cdf does not end at 1 at t=" + std::to_string(t));
            atomic_write(out / ((realized ? "pnl_cdf_" : "b2m_cdf_") + date + ".csv"),
                         csv.str());

            std::vector<SvgSeries> chart;
            if (!dist.empty()) {
                Vec xs = Eigen::Map<const Vec>(dist.r.data(),
                                               static_cast<Eigen::Index>(dist.r.size()));
                Vec cdf(xs.size());
                double a2 = 0.0;
                for (Eigen::Index i = 0; i < xs.size(); ++i) {
                    a2 += dist.w[static_cast<size_t>(i)];
                    cdf[i] = a2 / dist.total;
                }
                chart.push_back({xs, cdf, "cdf", "#1f77b4", false});
                if (!realized) {
                    const KernelDensity kd = b2m_density(dist);
                    if (std::abs(kd.integral - 1.0) > 1e-6)
                        throw std::runtime_error("kernel density integral off at t=" +
                                                 std::to_string(t));
                    chart.push_back(
                        {kd.grid, kd.density / kd.density.maxCoeff(), "density (scaled)",
                         "#d62728", false});
                }
            }
            maybe_svg(opt, out / ((realized ? "pnl_" : "b2m_") + date + ".svg"), chart,
                      {(realized ? "Realized returns " : "Book-to-market returns ") + date,
                       "return per day", "cdf", false, false});
        });
    }
    run_parallel(jobs);

    const PLAggregatesSeries series = realized
                                          ? realized_aggregates_series(fl, prices)
                                          : unrealized_aggregates_series(fl, prices);
    std::ostringstream csv;
    csv << "t,f_p,P,L,Pbar,Lbar,f_p_ma90\n";
    for (Eigen::Index t = 0; t < series.f_p.size(); ++t) {
        if (!series.valid[static_cast<size_t>(t)]) continue;
        // Definitional identities, checked on every emitted row.
        const double pbar = series.profit_bar[t];
        if (!std::isnan(pbar) &&
            std::abs(series.profit[t] - series.f_p[t] * pbar) > 1e-12)
            throw std::runtime_error("P != f_p * Pbar at t=" + std::to_string(t));
        csv << date_of(series.first_t + t, fl.grid) << ',' << fmt_g12(series.f_p[t]) << ','
            << fmt_g12(series.profit[t]) << ',' << fmt_g12(series.loss[t]) << ','
            << fmt_g12(series.profit_bar[t]) << ',' << fmt_g12(series.loss_bar[t]) << ','
            << fmt_g12(series.f_p_smooth[t]) << '\n';
    }
    atomic_write(out / (realized ? "realized_aggregates.csv" : "pl_aggregates.csv"),
                 csv.str());
}

void report_flows(const ReportOptions& opt, const FlowLedger& fl, const fs::path& out) {
    const std::vector<int64_t> dates = resolve_dates(opt, fl);
    std::vector<std::function<void()>> jobs;
    for (const int64_t t : dates) {
        jobs.emplace_back([&, t] {
            const FlowProfile prof = flow_profile(fl, t);
            const IdentityCheck check = identity_check(prof);
            if (!check.ok) throw std::runtime_error(check.defect);

            const double step_days = fl.grid.days_per_step();
            std::ostringstream csv;
            csv << "age_days,d_plus,c_plus,d_minus,c_minus\n";
            const Eigen::Index zmax = std::max(prof.d_plus.size(), prof.d_minus.size());
            for (Eigen::Index z = 0; z < zmax; ++z) {
                csv << fmt_g12(static_cast<double>(z + 1) * step_days) << ',';
                if (z < prof.d_plus.size())
                    csv << fmt_g12(prof.d_plus[z]) << ',' << fmt_g12(prof.c_plus[z]) << ',';
                else
                    csv << ",,";
                if (z < prof.d_minus.size())
                    csv << fmt_g12(prof.d_minus[z]) << ',' << fmt_g12(prof.c_minus[z]);
                else
                    csv << ',';
                csv << '\n';
            }
            atomic_write(out / ("flow_profile_" + date_of(t, fl.grid) + ".csv"), csv.str());

            // Sell-off jumps: single ages above the threshold share of the flow.
            std::ostringstream jumps_csv;
            jumps_csv << "age_days,fraction,direction\n";
            for (const FlowJump& j : flow_jumps(prof, opt.jump_threshold))
                jumps_csv << fmt_g12(static_cast<double>(j.age) * step_days) << ','
                          << fmt_g12(j.fraction) << ',' << (j.outbound ? "out" : "in")
                          << '\n';
            atomic_write(out / ("flow_jumps_" + date_of(t, fl.grid) + ".csv"),
                         jumps_csv.str());
        });
    }
    run_parallel(jobs);

    const Sampling s = resolve_sampling(opt, fl);
    const AveragedFlow avg =
        averaged_flow(fl, s.spec.t_first, s.spec.t_last, s.spec.stride, s.sweep);
    std::ostringstream csv;
    csv << "age,mean_d_plus,mean_d_minus,n_samples\n";
    for (Eigen::Index z = 0; z < avg.age.size(); ++z)
        csv << fmt_g12(avg.age[z]) << ',' << fmt_g12(avg.mean_d_plus[z]) << ','
            << fmt_g12(avg.mean_d_minus[z]) << ',' << avg.n_plus[z] << '\n';
    atomic_write(out / "avg_flows.csv", csv.str());

    std::cout << "averaged flows: alpha_plus = " << fmt_g12(avg.fit_plus.alpha)
              << " (std " << fmt_g12(avg.fit_plus.alpha_std)
              << "), alpha_minus = " << fmt_g12(avg.fit_minus.alpha) << " (std "
              << fmt_g12(avg.fit_minus.alpha_std) << ")\n";

    maybe_svg(opt, out / "avg_flows.svg",
              {{avg.age, avg.mean_d_plus, "mean D+", "#1f77b4", true},
               {avg.age, avg.mean_d_minus, "mean D-", "#2ca02c", true}},
              {"Time-averaged flow fractions", "age (steps)", "fraction", true, true});
}

void report_scaling(const ReportOptions& opt, const FlowLedger& fl, const fs::path& out) {
    const Sampling s = resolve_sampling(opt, fl);

    const AvgTransition avg = avg_transition(fl, s.spec, s.sweep);
    std::ostringstream pi_csv;
    pi_csv << "z,pi_mean,n_samples\n";
    for (Eigen::Index z = 0; z < avg.age.size(); ++z)
        pi_csv << fmt_g12(avg.age[z]) << ',' << fmt_g12(avg.pi_mean[z]) << ','
               << avg.n_samples[z] << '\n';
    atomic_write(out / "pi_z.csv", pi_csv.str());
    std::cout << "avg transition: alpha = " << fmt_g12(avg.fit.alpha) << " (std "
              << fmt_g12(avg.fit.alpha_std) << ", windows "
              << avg.fit.window_alphas.size() << ")\n";

    const AlphaSeries series = alpha_series(fl, s.spec, s.sweep);
    std::ostringstream a_csv;
    a_csv << "t,alpha_mean,alpha_std\n";
    for (size_t i = 0; i < series.t.size(); ++i) {
        if (!series.valid[i]) continue;
        a_csv << date_of(series.t[i], fl.grid) << ','
              << fmt_g12(series.alpha[static_cast<Eigen::Index>(i)]) << ','
              << fmt_g12(series.alpha_std[static_cast<Eigen::Index>(i)]) << '\n';
    }
    atomic_write(out / "alpha_t.csv", a_csv.str());

    if (!opt.prices_path.empty()) {
        const PriceSeries prices = require_prices(opt, fl);
        const PLAggregatesSeries realized = realized_aggregates_series(fl, prices);
        Vec ret(static_cast<Eigen::Index>(series.t.size()));
        for (size_t i = 0; i < series.t.size(); ++i) {
            const int64_t t = series.t[i];
            ret[static_cast<Eigen::Index>(i)] =
                t < realized.profit_bar.size() ? realized.profit_bar[t]
                                               : std::numeric_limits<double>::quiet_NaN();
        }
        const int64_t split = sample_time(
            parse_iso(opt.split_date.empty() ? "2015-01-14" : opt.split_date), fl.grid);
        try {
            const auto [before, after] =
                alpha_return_regression(series.t, series.alpha, ret, series.valid, split);
            std::ostringstream reg;
            reg << "cluster,slope,intercept,correlation,n\n";
            reg << "before," << fmt_g12(before.slope) << ',' << fmt_g12(before.intercept)
                << ',' << fmt_g12(before.correlation) << ',' << before.n << '\n';
            reg << "after," << fmt_g12(after.slope) << ',' << fmt_g12(after.intercept)
                << ',' << fmt_g12(after.correlation) << ',' << after.n << '\n';
            atomic_write(out / "alpha_regression.csv", reg.str());
        } catch (const std::invalid_argument& e) {
            std::cerr << "alpha/return regression skipped: " << e.what() << "\n";
        }
    }

    maybe_svg(opt, out / "pi_z.svg", {{avg.age, avg.pi_mean, "pi(z)", "#1f77b4", true}},
              {"Time-averaged transition probability", "age z (steps)", "pi", true, true});
    Vec vt(static_cast<Eigen::Index>(series.t.size()));
    for (size_t i = 0; i < series.t.size(); ++i)
        vt[static_cast<Eigen::Index>(i)] = static_cast<double>(series.t[i]);
    maybe_svg(opt, out / "alpha_t.svg", {{vt, series.alpha, "alpha_t", "#ff7f0e", false}},
              {"Holding-time exponent over time", "grid step", "alpha", false, false});
}

void report_multifractal(const ReportOptions& opt, const FlowLedger& fl,
                         const fs::path& out) {
    const Sampling s = resolve_sampling(opt, fl);
    int64_t tau;
    if (!opt.mf_tau_date.empty()) {
        tau = sample_time(parse_iso(opt.mf_tau_date), fl.grid);
    } else {
        const int64_t preferred_ts = parse_iso("2014-01-11");
        if (preferred_ts >= fl.grid.epoch_s &&
            sample_time(preferred_ts, fl.grid) < fl.horizon()) {
            tau = sample_time(preferred_ts, fl.grid);
        } else {
            tau = 0;
            while (tau < fl.horizon() && fl.births[static_cast<size_t>(tau)] == 0) ++tau;
        }
    }
    if (tau >= fl.horizon()) throw std::runtime_error("multifractal cohort beyond horizon");

    const std::vector<int64_t> dts = opt.mf_dt.empty() ? default_box_sizes() : opt.mf_dt;
    const std::vector<double> qs = opt.mf_q.empty() ? default_q_orders() : opt.mf_q;
    const MfSpectrum spec = mf_spectrum(fl, tau, s.spec.t_first, s.spec.t_last, qs, dts);

    std::ostringstream mom;
    mom << "q,dt,M,excluded\n";
    for (size_t iq = 0; iq < spec.q.size(); ++iq)
        for (size_t d = 0; d < spec.dt.size(); ++d)
            mom << fmt_g12(spec.q[iq]) << ',' << spec.dt[d] << ','
                << fmt_g12(spec.moments(static_cast<Eigen::Index>(iq),
                                        static_cast<Eigen::Index>(d)))
                << ','
                << static_cast<int64_t>(spec.excluded(static_cast<Eigen::Index>(iq),
                                                      static_cast<Eigen::Index>(d)))
                << '\n';
    atomic_write(out / "mf_moments.csv", mom.str());

    std::ostringstream eta;
    eta << "q,eta,r2\n";
    for (size_t iq = 0; iq < spec.q.size(); ++iq)
        eta << fmt_g12(spec.q[iq]) << ','
            << fmt_g12(spec.eta[static_cast<Eigen::Index>(iq)]) << ','
            << fmt_g12(spec.r2[static_cast<Eigen::Index>(iq)]) << '\n';
    atomic_write(out / "eta_q.csv", eta.str());
    std::cout << "multifractal spectrum at cohort " << date_of(tau, fl.grid)
              << ": concave = " << (spec.concave ? "yes" : "no")
              << ", max second difference = " << fmt_g12(spec.max_second_diff) << "\n";

    Vec qv = Eigen::Map<const Vec>(spec.q.data(), static_cast<Eigen::Index>(spec.q.size()));
    maybe_svg(opt, out / "eta_q.svg", {{qv, spec.eta, "eta(q)", "#1f77b4", false}},
              {"Moment scaling exponents", "q", "eta", false, false});
}

void report_sanity(const ReportOptions& opt, const FlowLedger& fl, const fs::path& out) {
    std::ostringstream csv;
    csv << "t,N_sat,S_sat,expected_S_sat\n";
    int64_t minted = 0;
    Vec tx(fl.horizon() + 1), ncurve(fl.horizon() + 1);
    for (int64_t t = 0; t <= fl.horizon(); ++t) {
        minted += fl.issuance[static_cast<size_t>(t)];
        // 144 blocks per day at the protocol's ten-minute target.
        const int64_t h = fl.max_height[static_cast<size_t>(t)];
        const int64_t expected =
            h < 0 ? 0
                  : static_cast<int64_t>(144.0 * fl.grid.days_per_step() *
                                         static_cast<double>(block_reward(h)));
        csv << date_of(t, fl.grid) << ',' << minted << ','
            << fl.issuance[static_cast<size_t>(t)] << ',' << expected << '\n';
        tx[t] = static_cast<double>(t);
        ncurve[t] = sat_to_btc(minted);
    }
    atomic_write(out / "sanity.csv", csv.str());
    std::cout << "sanity: N(horizon) = " << fmt_g12(sat_to_btc(minted)) << " BTC over "
              << fl.horizon() + 1 << " steps\n";
    maybe_svg(opt, out / "sanity_n.svg", {{tx, ncurve, "N(t)", "#d62728", false}},
              {"Total minted coins", "grid step", "BTC", false, false});
}

}  // namespace

const std::vector<std::string>& default_analysis_dates() { return kDefaultDates; }

// ---------------------------------------------------------------------------
// Subcommands
// ---------------------------------------------------------------------------

int run_ingest(const IngestOptions& opt) {
    try {
        std::ifstream in(opt.ledger_path);
        if (!in) {
            std::cerr << "cannot open ledger " << opt.ledger_path << "\n";
            return kExitData;
        }
        TimeGrid grid;
        grid.step_s = opt.dt_seconds;
        const std::vector<TxRecord> records = parse_ledger(in, grid);
        const FlowLedger fl = build_flow_ledger(records, grid);

        const ConservationReport rep = conservation_report(fl);
        if (!rep.ok) {
            std::cerr << "conservation FAILED at t=" << rep.defect_t << ": " << rep.defect
                      << "\n";
            return kExitData;
        }

        fs::create_directories(opt.out_dir);
        std::ostringstream cache;
        save_flow_ledger(cache, fl);
        atomic_write(fs::path(opt.out_dir) / kCacheFile, cache.str());

        int64_t total_volume = 0;
        for (int64_t v : fl.volumes) total_volume += v;
        std::cout << records.size() << " transactions over " << fl.horizon() + 1
                  << " grid steps\n"
                  << "N = " << fmt_g12(sat_to_btc(total_minted(fl, fl.horizon())))
                  << " BTC, total volume = " << fmt_g12(sat_to_btc(total_volume))
                  << " BTC, churn = "
                  << fmt_g12(sat_to_btc(std::accumulate(fl.churn.begin(), fl.churn.end(),
                                                        int64_t{0})))
                  << " BTC\n"
                  << "conservation OK; cache fingerprint "
                  << flow_ledger_fingerprint(fl) << "\n";
        if (fl.skew_clamped_count > 0)
            std::cout << "note: " << fl.skew_clamped_count
                      << " spends with block-time skew folded into same-step churn\n";
        return kExitOk;
    } catch (const std::exception& e) {
        std::cerr << "ingest failed: " << e.what() << "\n";
        return kExitData;
    }
}

int run_synth(const SynthOptions& opt) {
    try {
        std::ifstream in(opt.config_path);
        if (!in) {
            std::cerr << "cannot open config " << opt.config_path << "\n";
            return kExitData;
        }
        SynthConfig cfg;
        if (fs::path(opt.config_path).extension() == ".toml") {
            // Flat key = value TOML subset: the documented scalar keys only.
            std::string line;
            while (std::getline(in, line)) {
                const auto hash = line.find('#');
                if (hash != std::string::npos) line.erase(hash);
                const auto eq = line.find('=');
                if (eq == std::string::npos) continue;
                auto trim = [](std::string s) {
                    const auto a = s.find_first_not_of(" \t\r");
                    const auto b = s.find_last_not_of(" \t\r");
                    return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
                };
                const std::string key = trim(line.substr(0, eq));
                const std::string value = trim(line.substr(eq + 1));
                if (key == "horizon_steps") cfg.horizon_steps = std::stoll(value);
                else if (key == "alpha") cfg.alpha = std::stod(value);
                else if (key == "issuance_per_step") cfg.issuance_per_step = std::stoll(value);
                else if (key == "seed") cfg.seed = std::stoull(value);
                else if (key == "granularity") cfg.granularity = std::stoll(value);
                else throw std::runtime_error("unknown TOML key '" + key + "'");
            }
        } else {
            nlohmann::json j = nlohmann::json::parse(in);
            cfg.horizon_steps = j.value("horizon_steps", int64_t{0});
            cfg.alpha = j.value("alpha", 0.0);
            cfg.issuance_per_step = j.value("issuance_per_step", int64_t{0});
            cfg.seed = j.value("seed", uint64_t{1});
            cfg.granularity = j.value("granularity", int64_t{1});
            if (j.contains("pi_table"))
                cfg.pi_table = j["pi_table"].get<std::vector<double>>();
            if (j.contains("issuance_schedule"))
                cfg.issuance_schedule = j["issuance_schedule"].get<std::vector<int64_t>>();
            if (j.contains("alpha_schedule"))
                for (const auto& pair : j["alpha_schedule"])
                    cfg.alpha_schedule.emplace_back(pair.at(0).get<int64_t>(),
                                                    pair.at(1).get<double>());
        }

        TimeGrid grid;
        const std::vector<TxRecord> records = synthesize_ledger(cfg, grid);
        std::ostringstream body;
        write_ledger(body, records);
        atomic_write(opt.out_path, body.str());
        std::cout << "wrote " << records.size() << " transactions to " << opt.out_path
                  << "\n";
        return kExitOk;
    } catch (const std::exception& e) {
        std::cerr << "synth failed: " << e.what() << "\n";
        return kExitData;
    }
}

int run_report(const ReportOptions& opt) {
    const std::vector<std::string> known = {"holders", "b2m",     "pnl",   "flows",
                                            "scaling", "multifractal", "sanity"};
    if (std::find(known.begin(), known.end(), opt.subreport) == known.end()) {
        std::cerr << "unknown subreport '" << opt.subreport << "'\n";
        return kExitUsage;
    }
    try {
        const FlowLedger fl = load_cache(opt.cache_dir);
        resolve_dates(opt, fl);  // every analysis date must be on the ledger
        const fs::path out = opt.out_dir.empty() ? fs::path(opt.cache_dir)
                                                 : fs::path(opt.out_dir);
        fs::create_directories(out);

        if (opt.subreport == "holders") report_holders(opt, fl, out);
        else if (opt.subreport == "b2m") report_b2m_or_pnl(opt, fl, out, false);
        else if (opt.subreport == "pnl") report_b2m_or_pnl(opt, fl, out, true);
        else if (opt.subreport == "flows") report_flows(opt, fl, out);
        else if (opt.subreport == "scaling") report_scaling(opt, fl, out);
        else if (opt.subreport == "multifractal") report_multifractal(opt, fl, out);
        else report_sanity(opt, fl, out);
        return kExitOk;
    } catch (const std::exception& e) {
        std::cerr << "report failed: " << e.what() << "\n";
        return kExitData;
    }
}

}  // namespace chaincohort
