#include "chaincohort/holders.hpp"

#include <stdexcept>

namespace chaincohort {

namespace {

void check_bands(const HolderBands& bands) {
    if (!(bands.short_max_days >= 0.0) || !(bands.medium_max_days > bands.short_max_days))
        throw std::invalid_argument("holder bands must be strictly increasing");
}

int band_of(double age_days, const HolderBands& bands) {
    if (age_days <= bands.short_max_days) return 0;
    if (age_days <= bands.medium_max_days) return 1;
    return 2;
}

}  // namespace

FractionSeries holder_fractions(const FlowLedger& fl, const HolderBands& bands) {
    check_bands(bands);
    const int64_t horizon = fl.horizon();
    if (horizon < 1) throw std::invalid_argument("holder_fractions: horizon must be >= 1");

    FractionSeries out;
    out.f_short = Vec::Zero(horizon + 1);
    out.f_medium = Vec::Zero(horizon + 1);
    out.f_long = Vec::Zero(horizon + 1);
    out.valid.assign(static_cast<size_t>(horizon) + 1, false);

    const double step_days = fl.grid.days_per_step();
    std::vector<int64_t> n;  // running cohort masses
    n.reserve(static_cast<size_t>(horizon) + 1);
    int64_t minted = 0;

    for (int64_t t = 0; t <= horizon; ++t) {
        for (const DeathEntry& e : fl.deaths_at[static_cast<size_t>(t)])
            n[static_cast<size_t>(e.cohort)] -= e.amount;
        n.push_back(fl.births[static_cast<size_t>(t)]);
        minted += fl.issuance[static_cast<size_t>(t)];
        if (minted == 0) continue;  // flagged: no coins yet

        int64_t mass[3] = {0, 0, 0};
        for (int64_t tau = 0; tau <= t; ++tau) {
            const int64_t m = n[static_cast<size_t>(tau)];
            if (m == 0) continue;
            mass[band_of(static_cast<double>(t - tau) * step_days, bands)] += m;
        }
        const double total = static_cast<double>(minted);
        out.f_short[t] = static_cast<double>(mass[0]) / total;
        out.f_medium[t] = static_cast<double>(mass[1]) / total;
        out.f_long[t] = static_cast<double>(mass[2]) / total;
        out.valid[static_cast<size_t>(t)] = true;
    }
    return out;
}

FractionSeries volume_fractions(const FlowLedger& fl, const HolderBands& bands) {
    check_bands(bands);
    const int64_t horizon = fl.horizon();
    if (horizon < 1) throw std::invalid_argument("volume_fractions: horizon must be >= 1");

    FractionSeries out;
    out.f_short = Vec::Zero(horizon + 1);
    out.f_medium = Vec::Zero(horizon + 1);
    out.f_long = Vec::Zero(horizon + 1);
    out.valid.assign(static_cast<size_t>(horizon) + 1, false);

    const double step_days = fl.grid.days_per_step();
    for (int64_t t = 0; t <= horizon; ++t) {
        int64_t mass[3] = {fl.churn[static_cast<size_t>(t)], 0, 0};  // age 0: short
        int64_t traded = fl.churn[static_cast<size_t>(t)];
        for (const DeathEntry& e : fl.deaths_at[static_cast<size_t>(t)]) {
            mass[band_of(static_cast<double>(t - e.cohort) * step_days, bands)] += e.amount;
            traded += e.amount;
        }
        if (traded == 0) continue;  // no trades this step, flagged
        const double total = static_cast<double>(traded);
        out.f_short[t] = static_cast<double>(mass[0]) / total;
        out.f_medium[t] = static_cast<double>(mass[1]) / total;
        out.f_long[t] = static_cast<double>(mass[2]) / total;
        out.valid[static_cast<size_t>(t)] = true;
    }
    return out;
}

FractionSeries diff_series(const FractionSeries& s) {
    if (s.size() < 2) throw std::invalid_argument("diff_series: need >= 2 points");
    FractionSeries out;
    out.first_t = s.first_t + 1;
    const Eigen::Index n = s.size() - 1;
    out.f_short = s.f_short.tail(n) - s.f_short.head(n);
    out.f_medium = s.f_medium.tail(n) - s.f_medium.head(n);
    out.f_long = s.f_long.tail(n) - s.f_long.head(n);
    out.valid.assign(static_cast<size_t>(n), false);
    for (Eigen::Index i = 0; i < n; ++i)
        out.valid[static_cast<size_t>(i)] =
            s.valid[static_cast<size_t>(i)] && s.valid[static_cast<size_t>(i) + 1];
    return out;
}

Vec valid_run(const FractionSeries& s, int band) {
    const Vec* src = band == 0 ? &s.f_short : band == 1 ? &s.f_medium : &s.f_long;
    size_t best_start = 0, best_len = 0, start = 0, len = 0;
    for (size_t i = 0; i <= s.valid.size(); ++i) {
        if (i < s.valid.size() && s.valid[i]) {
            if (len == 0) start = i;
            ++len;
        } else {
            if (len > best_len) {
                best_len = len;
                best_start = start;
            }
            len = 0;
        }
    }
    return src->segment(static_cast<Eigen::Index>(best_start),
                        static_cast<Eigen::Index>(best_len));
}

}  // namespace chaincohort
