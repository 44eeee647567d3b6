#include "chaincohort/flows.hpp"

#include <cmath>
#include <stdexcept>

namespace chaincohort {

FlowProfile flow_profile(const FlowLedger& fl, int64_t t) {
    if (!(t > 0 && t <= fl.horizon()))
        throw std::out_of_range("flow_profile requires 0 < t <= horizon");

    FlowProfile prof;
    prof.t = t;
    const int64_t denom_sat =
        fl.volumes[static_cast<size_t>(t)] + fl.issuance[static_cast<size_t>(t)];
    if (denom_sat == 0) {
        prof.empty = true;
        return prof;
    }
    prof.denom = static_cast<double>(denom_sat);

    prof.d_plus = Vec::Zero(t);
    for (const DeathEntry& e : fl.deaths_at[static_cast<size_t>(t)])
        prof.d_plus[t - e.cohort - 1] = static_cast<double>(e.amount) / prof.denom;

    const int64_t forward = fl.horizon() - t;
    prof.d_minus = Vec::Zero(forward);
    int64_t spent = 0;
    for (const SpendEntry& e : fl.deaths_of[static_cast<size_t>(t)]) {
        prof.d_minus[e.spend - t - 1] = static_cast<double>(e.amount) / prof.denom;
        spent += e.amount;
    }

    prof.source_frac =
        static_cast<double>(fl.issuance[static_cast<size_t>(t)]) / prof.denom;
    prof.residual_frac =
        static_cast<double>(fl.births[static_cast<size_t>(t)] - spent) / prof.denom;

    prof.c_plus = Vec::Zero(prof.d_plus.size());
    double acc = 0.0;
    for (Eigen::Index i = 0; i < prof.d_plus.size(); ++i) {
        acc += prof.d_plus[i];
        prof.c_plus[i] = acc;
    }
    prof.c_minus = Vec::Zero(prof.d_minus.size());
    acc = 0.0;
    for (Eigen::Index i = 0; i < prof.d_minus.size(); ++i) {
        acc += prof.d_minus[i];
        prof.c_minus[i] = acc;
    }
    return prof;
}

IdentityCheck identity_check(const FlowProfile& prof) {
    IdentityCheck check;
    if (prof.empty) return check;  // nothing to conserve

    const double in_sum = prof.d_plus.sum() + prof.source_frac;
    if (std::abs(in_sum - 1.0) > 1e-12) {
        check.ok = false;
        check.defect = "in-flow normalization off by " + std::to_string(in_sum - 1.0) +
                       " at t=" + std::to_string(prof.t);
        return check;
    }
    const double out_sum = prof.d_minus.sum() + prof.residual_frac;
    if (std::abs(out_sum - 1.0) > 1e-12) {
        check.ok = false;
        check.defect = "out-flow normalization off by " + std::to_string(out_sum - 1.0) +
                       " at t=" + std::to_string(prof.t);
    }
    return check;
}

std::vector<FlowJump> flow_jumps(const FlowProfile& prof, double threshold) {
    std::vector<FlowJump> jumps;
    if (prof.empty) return jumps;
    for (Eigen::Index z = 0; z < prof.d_plus.size(); ++z)
        if (prof.d_plus[z] > threshold) jumps.push_back({z + 1, prof.d_plus[z], false});
    for (Eigen::Index z = 0; z < prof.d_minus.size(); ++z)
        if (prof.d_minus[z] > threshold) jumps.push_back({z + 1, prof.d_minus[z], true});
    return jumps;
}

AveragedFlow averaged_flow(const FlowLedger& fl, int64_t t_first, int64_t t_last,
                           int64_t stride, const WindowSweep& sweep) {
    if (stride < 1) throw std::invalid_argument("averaged_flow: stride must be >= 1");
    if (t_first < 1 || t_last > fl.horizon() || t_first > t_last)
        throw std::invalid_argument("averaged_flow: window outside ledger");
    const int64_t samples = (t_last - t_first) / stride + 1;
    if (samples < 20)
        throw std::invalid_argument("averaged_flow: need >= 20 sampled anchors, got " +
                                    std::to_string(samples));

    const int64_t max_age = fl.horizon();
    Vec sum_plus = Vec::Zero(max_age), sum_minus = Vec::Zero(max_age);
    VecI n_plus = VecI::Zero(max_age), n_minus = VecI::Zero(max_age);

    AveragedFlow out;
    for (int64_t t = t_first; t <= t_last; t += stride) {
        const FlowProfile prof = flow_profile(fl, t);
        if (prof.empty) {
            ++out.skipped_anchors;
            continue;
        }
        for (Eigen::Index z = 0; z < prof.d_plus.size(); ++z) {
            sum_plus[z] += prof.d_plus[z];
            ++n_plus[z];
        }
        for (Eigen::Index z = 0; z < prof.d_minus.size(); ++z) {
            sum_minus[z] += prof.d_minus[z];
            ++n_minus[z];
        }
    }

    Eigen::Index zmax = 0;
    for (Eigen::Index z = 0; z < max_age; ++z)
        if (n_plus[z] > 0 || n_minus[z] > 0) zmax = z + 1;
    if (zmax == 0) throw std::invalid_argument("averaged_flow: no flow at any age");

    out.age = Vec::LinSpaced(zmax, 1.0, static_cast<double>(zmax));
    out.mean_d_plus = Vec::Constant(zmax, std::nan(""));
    out.mean_d_minus = Vec::Constant(zmax, std::nan(""));
    out.n_plus = n_plus.head(zmax);
    out.n_minus = n_minus.head(zmax);
    for (Eigen::Index z = 0; z < zmax; ++z) {
        if (out.n_plus[z] > 0)
            out.mean_d_plus[z] = sum_plus[z] / static_cast<double>(out.n_plus[z]);
        if (out.n_minus[z] > 0)
            out.mean_d_minus[z] = sum_minus[z] / static_cast<double>(out.n_minus[z]);
    }

    std::vector<double> zp, vp, zm, vm;
    for (Eigen::Index z = 0; z < zmax; ++z) {
        if (out.n_plus[z] > 0) {
            zp.push_back(out.age[z]);
            vp.push_back(out.mean_d_plus[z]);
        }
        if (out.n_minus[z] > 0) {
            zm.push_back(out.age[z]);
            vm.push_back(out.mean_d_minus[z]);
        }
    }
    out.fit_plus = powerlaw_fit(zp, vp, sweep);
    out.fit_minus = powerlaw_fit(zm, vm, sweep);
    return out;
}

}  // namespace chaincohort
