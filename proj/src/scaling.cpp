#include "chaincohort/scaling.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "chaincohort/powerlaw.hpp"
#include "chaincohort/stats.hpp"

namespace chaincohort {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void check_spec(const FlowLedger& fl, const SamplingSpec& spec, int64_t min_samples) {
    if (spec.stride < 1) throw std::invalid_argument("sampling stride must be >= 1");
    if (spec.t_first < 1 || spec.t_last > fl.horizon() || spec.t_first > spec.t_last)
        throw std::invalid_argument("sampling window outside ledger");
    const int64_t samples = (spec.t_last - spec.t_first) / spec.stride + 1;
    if (samples < min_samples)
        throw std::invalid_argument("need >= " + std::to_string(min_samples) +
                                    " sampled times, got " + std::to_string(samples));
}

/// Walk anchor times in ascending order while maintaining the cohort masses
/// n_tau(t-1); hand each sampled anchor the previous-step masses and the
/// death list of the step itself.
template <typename Visit>
void sweep_anchors(const FlowLedger& fl, const SamplingSpec& spec, Visit&& visit) {
    std::vector<int64_t> held;  // n_tau(u) as u advances
    held.reserve(static_cast<size_t>(spec.t_last) + 1);
    int64_t u = -1;
    auto advance_to = [&](int64_t target) {
        while (u < target) {
            ++u;
            for (const DeathEntry& e : fl.deaths_at[static_cast<size_t>(u)])
                held[static_cast<size_t>(e.cohort)] -= e.amount;
            held.push_back(fl.births[static_cast<size_t>(u)]);
        }
    };
    for (int64_t t = spec.t_first; t <= spec.t_last; t += spec.stride) {
        advance_to(t - 1);
        visit(t, held, fl.deaths_at[static_cast<size_t>(t)]);
    }
}

}  // namespace

AvgTransition avg_transition(const FlowLedger& fl, const SamplingSpec& spec,
                             const WindowSweep& sweep) {
    check_spec(fl, spec, 20);

    const int64_t zcap = spec.t_last;
    Vec sums = Vec::Zero(zcap);
    VecI counts = VecI::Zero(zcap);
    AvgTransition out;

    sweep_anchors(fl, spec, [&](int64_t t, const std::vector<int64_t>& held,
                                const std::vector<DeathEntry>& deaths) {
        // Dense death lookup for this anchor.
        std::vector<int64_t> died(static_cast<size_t>(t), 0);
        for (const DeathEntry& e : deaths) died[static_cast<size_t>(e.cohort)] = e.amount;
        for (int64_t tau = 0; tau < t; ++tau) {
            const int64_t n_prev = held[static_cast<size_t>(tau)];
            if (n_prev == 0) {
                ++out.empty_cohorts;
                continue;
            }
            const int64_t z = t - tau;
            sums[z - 1] += static_cast<double>(died[static_cast<size_t>(tau)]) /
                           static_cast<double>(n_prev);
            ++counts[z - 1];
        }
    });

    out.age = Vec::LinSpaced(zcap, 1.0, static_cast<double>(zcap));
    out.pi_mean = Vec::Constant(zcap, kNaN);
    out.n_samples = counts;
    std::vector<double> fx, fy;
    for (Eigen::Index z = 0; z < zcap; ++z) {
        if (counts[z] == 0) continue;  // gap, flagged by the NaN
        out.pi_mean[z] = sums[z] / static_cast<double>(counts[z]);
        fx.push_back(out.age[z]);
        fy.push_back(out.pi_mean[z]);
    }
    out.fit = powerlaw_fit(fx, fy, sweep);
    return out;
}

AlphaSeries alpha_series(const FlowLedger& fl, const SamplingSpec& spec,
                         const WindowSweep& sweep) {
    check_spec(fl, spec, 1);

    AlphaSeries out;
    std::vector<double> alphas, stds;
    sweep_anchors(fl, spec, [&](int64_t t, const std::vector<int64_t>& held,
                                const std::vector<DeathEntry>& deaths) {
        std::vector<int64_t> died(static_cast<size_t>(t), 0);
        for (const DeathEntry& e : deaths) died[static_cast<size_t>(e.cohort)] = e.amount;
        std::vector<double> z, pi;
        for (int64_t tau = t - 1; tau >= 0; --tau) {
            const int64_t n_prev = held[static_cast<size_t>(tau)];
            if (n_prev == 0) continue;
            z.push_back(static_cast<double>(t - tau));
            pi.push_back(static_cast<double>(died[static_cast<size_t>(tau)]) /
                         static_cast<double>(n_prev));
        }
        out.t.push_back(t);
        double a = kNaN, s = kNaN;
        bool ok = false;
        try {
            const PowerLawFit fit = powerlaw_fit(z, pi, sweep);
            a = fit.alpha;
            s = fit.alpha_std;
            ok = true;
        } catch (const std::invalid_argument&) {
            // degenerate anchor; the series continues
        }
        out.valid.push_back(ok);
        alphas.push_back(a);
        stds.push_back(s);
    });
    out.alpha = Eigen::Map<Vec>(alphas.data(), static_cast<Eigen::Index>(alphas.size()));
    out.alpha_std = Eigen::Map<Vec>(stds.data(), static_cast<Eigen::Index>(stds.size()));
    return out;
}

std::pair<ClusterRegression, ClusterRegression>
alpha_return_regression(const std::vector<int64_t>& t, const Vec& alpha, const Vec& ret,
                        const std::vector<bool>& valid, int64_t split_t) {
    if (static_cast<Eigen::Index>(t.size()) != alpha.size() || alpha.size() != ret.size())
        throw std::invalid_argument("alpha_return_regression: length mismatch");

    std::vector<double> x[2], y[2];
    for (size_t i = 0; i < t.size(); ++i) {
        if (!valid[i] || std::isnan(ret[static_cast<Eigen::Index>(i)])) continue;
        const int side = t[i] < split_t ? 0 : 1;
        x[side].push_back(ret[static_cast<Eigen::Index>(i)]);
        y[side].push_back(alpha[static_cast<Eigen::Index>(i)]);
    }

    std::pair<ClusterRegression, ClusterRegression> out;
    ClusterRegression* clusters[2] = {&out.first, &out.second};
    for (int side = 0; side < 2; ++side) {
        if (x[side].size() < 3)
            throw std::invalid_argument("alpha_return_regression: cluster " +
                                        std::to_string(side) + " has fewer than 3 points");
        const LineFit line = fit_line(x[side], y[side]);
        clusters[side]->slope = line.slope;
        clusters[side]->intercept = line.intercept;
        clusters[side]->n = static_cast<int64_t>(x[side].size());
        Vec vx = Eigen::Map<Vec>(x[side].data(), static_cast<Eigen::Index>(x[side].size()));
        Vec vy = Eigen::Map<Vec>(y[side].data(), static_cast<Eigen::Index>(y[side].size()));
        clusters[side]->correlation = stats::pearson(vx, vy);
    }
    return out;
}

}  // namespace chaincohort
