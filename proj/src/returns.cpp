#include "chaincohort/returns.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace chaincohort {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

}  // namespace

double daily_return(int64_t tau, int64_t t, const PriceSeries& prices, const TimeGrid& grid) {
    if (tau >= t) throw std::invalid_argument("daily_return requires tau < t");
    const double holding_days = static_cast<double>(t - tau) * grid.days_per_step();
    return std::log(prices.at(t) / prices.at(tau)) / holding_days;
}

double ReturnDistribution::cdf(double value) const {
    double acc = 0.0;
    for (size_t i = 0; i < r.size() && r[i] <= value; ++i) acc += w[i];
    return total > 0.0 ? acc / total : 0.0;
}

namespace {

ReturnDistribution sorted_distribution(ReturnDistribution::Kind kind, int64_t t,
                                       std::vector<std::pair<double, double>> samples) {
    std::sort(samples.begin(), samples.end());
    ReturnDistribution dist;
    dist.kind = kind;
    dist.t = t;
    dist.r.reserve(samples.size());
    dist.w.reserve(samples.size());
    for (const auto& [r, w] : samples) {
        dist.r.push_back(r);
        dist.w.push_back(w);
        dist.total += w;
    }
    return dist;
}

}  // namespace

ReturnDistribution b2m_distribution(const FlowLedger& fl, const PriceSeries& prices,
                                    int64_t t) {
    const AgeSnapshot snap = age_snapshot(fl, t);
    std::vector<std::pair<double, double>> samples;
    samples.reserve(snap.cohorts.size());
    for (const auto& [tau, mass] : snap.cohorts) {
        if (tau == t) continue;  // age zero: no per-day return
        samples.emplace_back(daily_return(tau, t, prices, fl.grid),
                             static_cast<double>(mass));
    }
    return sorted_distribution(ReturnDistribution::Kind::B2M, t, std::move(samples));
}

ReturnDistribution pnl_distribution(const FlowLedger& fl, const PriceSeries& prices,
                                    int64_t t) {
    if (t < 0 || t > fl.horizon()) throw std::out_of_range("pnl_distribution: bad t");
    std::vector<std::pair<double, double>> samples;
    const auto& deaths = fl.deaths_at[static_cast<size_t>(t)];
    samples.reserve(deaths.size());
    for (const DeathEntry& e : deaths)
        samples.emplace_back(daily_return(e.cohort, t, prices, fl.grid),
                             static_cast<double>(e.amount));
    return sorted_distribution(ReturnDistribution::Kind::PnL, t, std::move(samples));
}

PLAggregates pl_aggregates(const ReturnDistribution& dist) {
    if (dist.empty()) throw std::invalid_argument("pl_aggregates: empty distribution");
    double w_pos = 0.0, sum_pos = 0.0, sum_neg = 0.0;
    for (size_t i = 0; i < dist.r.size(); ++i) {
        if (dist.r[i] > 0.0) {
            w_pos += dist.w[i];
            sum_pos += dist.r[i] * dist.w[i];
        } else {
            sum_neg += dist.r[i] * dist.w[i];
        }
    }
    const double w_all = dist.total;
    PLAggregates agg;
    agg.f_p = w_pos / w_all;
    agg.profit = sum_pos / w_all;
    agg.loss = -sum_neg / w_all;
    if (w_pos > 0.0) agg.profit_bar = sum_pos / w_pos;
    if (w_all - w_pos > 0.0) agg.loss_bar = -sum_neg / (w_all - w_pos);
    return agg;
}

KernelDensity b2m_density(const ReturnDistribution& dist, const BandwidthPolicy& policy) {
    if (dist.empty()) throw std::invalid_argument("b2m_density: empty distribution");

    double h = policy.fixed;
    if (h <= 0.0) {
        // Weighted Silverman rule with a Kish effective sample size.
        double w2 = 0.0, mean = 0.0;
        for (size_t i = 0; i < dist.r.size(); ++i) {
            mean += dist.r[i] * dist.w[i];
            w2 += dist.w[i] * dist.w[i];
        }
        mean /= dist.total;
        double var = 0.0;
        for (size_t i = 0; i < dist.r.size(); ++i)
            var += dist.w[i] * (dist.r[i] - mean) * (dist.r[i] - mean);
        var /= dist.total;
        const double sigma = std::sqrt(var);

        auto quantile = [&](double p) {
            double acc = 0.0;
            for (size_t i = 0; i < dist.r.size(); ++i) {
                acc += dist.w[i];
                if (acc >= p * dist.total) return dist.r[i];
            }
            return dist.r.back();
        };
        const double iqr = quantile(0.75) - quantile(0.25);
        double scale = sigma;
        if (iqr > 0.0) scale = std::min(scale, iqr / 1.34);
        const double n_eff = dist.total * dist.total / w2;
        h = 0.9 * scale * std::pow(n_eff, -0.2);
    }
    if (!(h > 0.0))
        throw std::invalid_argument("b2m_density: degenerate sample with zero bandwidth");

    const double lo = dist.r.front() - 8.0 * h;
    const double hi = dist.r.back() + 8.0 * h;
    Eigen::Index npts =
        static_cast<Eigen::Index>(std::ceil((hi - lo) / (0.5 * h))) + 1;
    npts = std::clamp<Eigen::Index>(npts, 33, (1 << 22) + 1);
    const double spacing = (hi - lo) / static_cast<double>(npts - 1);

    KernelDensity kd;
    kd.bandwidth = h;
    kd.grid = Vec::LinSpaced(npts, lo, hi);
    kd.density = Vec::Zero(npts);
    const double inv = 1.0 / (dist.total * h * std::sqrt(2.0 * M_PI));
    for (size_t i = 0; i < dist.r.size(); ++i) {
        const auto first = static_cast<Eigen::Index>(
            std::max(0.0, std::floor((dist.r[i] - 8.0 * h - lo) / spacing)));
        const auto last = std::min<Eigen::Index>(
            npts - 1,
            static_cast<Eigen::Index>(std::ceil((dist.r[i] + 8.0 * h - lo) / spacing)));
        for (Eigen::Index g = first; g <= last; ++g) {
            const double u = (kd.grid[g] - dist.r[i]) / h;
            kd.density[g] += dist.w[i] * inv * std::exp(-0.5 * u * u);
        }
    }
    for (Eigen::Index g = 0; g + 1 < npts; ++g)
        kd.integral += 0.5 * (kd.density[g] + kd.density[g + 1]) * spacing;
    return kd;
}

namespace {

PLAggregatesSeries aggregate_series(const FlowLedger& fl, const PriceSeries& prices,
                                    const MovingStatConfig& smooth, bool realized) {
    const int64_t horizon = fl.horizon();
    if (horizon < 0) throw std::invalid_argument("aggregate series on empty ledger");

    PLAggregatesSeries out;
    const Eigen::Index n = horizon + 1;
    out.valid.assign(static_cast<size_t>(n), false);
    out.f_p = Vec::Constant(n, kNaN);
    out.profit = Vec::Constant(n, kNaN);
    out.loss = Vec::Constant(n, kNaN);
    out.profit_bar = Vec::Constant(n, kNaN);
    out.loss_bar = Vec::Constant(n, kNaN);

    std::vector<int64_t> cohorts;  // running masses for the unrealized pass
    cohorts.reserve(static_cast<size_t>(n));

    for (int64_t t = 0; t <= horizon; ++t) {
        if (!realized) {
            for (const DeathEntry& e : fl.deaths_at[static_cast<size_t>(t)])
                cohorts[static_cast<size_t>(e.cohort)] -= e.amount;
            cohorts.push_back(fl.births[static_cast<size_t>(t)]);
        }
        if (!prices.covers(t)) continue;

        double w_pos = 0.0, w_all = 0.0, sum_pos = 0.0, sum_neg = 0.0;
        bool priced = true;
        auto add = [&](int64_t tau, int64_t mass) {
            if (!prices.covers(tau)) {
                priced = false;
                return;
            }
            const double r = daily_return(tau, t, prices, fl.grid);
            const double w = static_cast<double>(mass);
            w_all += w;
            if (r > 0.0) {
                w_pos += w;
                sum_pos += r * w;
            } else {
                sum_neg += r * w;
            }
        };

        if (realized) {
            for (const DeathEntry& e : fl.deaths_at[static_cast<size_t>(t)]) {
                add(e.cohort, e.amount);
                if (!priced) break;
            }
        } else {
            for (int64_t tau = 0; tau < t && priced; ++tau)
                if (cohorts[static_cast<size_t>(tau)] > 0)
                    add(tau, cohorts[static_cast<size_t>(tau)]);
        }
        if (!priced || w_all == 0.0) continue;  // gap: flagged by staying invalid

        out.valid[static_cast<size_t>(t)] = true;
        out.f_p[t] = w_pos / w_all;
        out.profit[t] = sum_pos / w_all;
        out.loss[t] = -sum_neg / w_all;
        if (w_pos > 0.0) out.profit_bar[t] = sum_pos / w_pos;
        if (w_all - w_pos > 0.0) out.loss_bar[t] = -sum_neg / (w_all - w_pos);
    }

    // Centered moving statistic over valid entries.
    const auto window_steps =
        std::max<int64_t>(1, std::llround(smooth.window_days / fl.grid.days_per_step()));
    const int64_t half = window_steps / 2;
    out.f_p_smooth = Vec::Constant(n, kNaN);
    out.profit_bar_smooth = Vec::Constant(n, kNaN);
    for (int64_t t = 0; t <= horizon; ++t) {
        std::vector<double> wf, wp;
        for (int64_t s = std::max<int64_t>(0, t - half);
             s <= std::min(horizon, t + half); ++s) {
            if (!out.valid[static_cast<size_t>(s)]) continue;
            wf.push_back(out.f_p[s]);
            if (!std::isnan(out.profit_bar[s])) wp.push_back(out.profit_bar[s]);
        }
        auto stat = [&](std::vector<double>& v) {
            if (v.empty()) return kNaN;
            if (smooth.median) {
                std::nth_element(v.begin(), v.begin() + v.size() / 2, v.end());
                return v[v.size() / 2];
            }
            return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
        };
        out.f_p_smooth[t] = stat(wf);
        out.profit_bar_smooth[t] = stat(wp);
    }
    return out;
}

}  // namespace

PLAggregatesSeries realized_aggregates_series(const FlowLedger& fl, const PriceSeries& prices,
                                              const MovingStatConfig& smooth) {
    return aggregate_series(fl, prices, smooth, true);
}

PLAggregatesSeries unrealized_aggregates_series(const FlowLedger& fl,
                                                const PriceSeries& prices,
                                                const MovingStatConfig& smooth) {
    return aggregate_series(fl, prices, smooth, false);
}

}  // namespace chaincohort
