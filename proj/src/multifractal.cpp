#include "chaincohort/multifractal.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "chaincohort/powerlaw.hpp"

namespace chaincohort {

MeasureSeries mf_measure(const FlowLedger& fl, int64_t tau, int64_t t_first,
                         int64_t t_last) {
    if (tau < 0 || tau >= fl.horizon())
        throw std::invalid_argument("mf_measure: cohort outside ledger");
    if (t_first <= tau) t_first = tau + 1;
    if (t_last > fl.horizon() || t_first > t_last)
        throw std::invalid_argument("mf_measure: bad window");

    MeasureSeries out;
    out.tau = tau;
    out.first_t = t_first;
    out.v = Vec::Zero(t_last - t_first + 1);
    std::vector<int64_t> died(static_cast<size_t>(t_last - t_first + 1), 0);
    for (const SpendEntry& e : fl.deaths_of[static_cast<size_t>(tau)])
        if (e.spend >= t_first && e.spend <= t_last)
            died[static_cast<size_t>(e.spend - t_first)] = e.amount;

    for (int64_t t = t_first; t <= t_last; ++t) {
        const int64_t v_t = fl.volumes[static_cast<size_t>(t)];
        if (v_t == 0) {
            out.skipped.push_back(t);
            continue;
        }
        out.v[t - t_first] = static_cast<double>(died[static_cast<size_t>(t - t_first)]) /
                             static_cast<double>(v_t);
    }
    return out;
}

Vec box_measure(const Vec& v, int64_t dt) {
    if (dt < 1) throw std::invalid_argument("box_measure: dt must be >= 1");
    if (dt > v.size()) throw std::invalid_argument("box_measure: dt exceeds series span");
    const Eigen::Index boxes = v.size() / dt;
    Vec m(boxes);
    for (Eigen::Index b = 0; b < boxes; ++b) m[b] = v.segment(b * dt, dt).sum();
    return m;
}

Vec box_measure_trailing(const Vec& v, int64_t dt) {
    if (dt < 1) throw std::invalid_argument("box_measure_trailing: dt must be >= 1");
    if (dt > v.size())
        throw std::invalid_argument("box_measure_trailing: dt exceeds series span");
    Vec m(v.size() - dt + 1);
    double acc = v.head(dt).sum();
    m[0] = acc;
    for (Eigen::Index t = dt; t < v.size(); ++t) {
        acc += v[t] - v[t - dt];
        m[t - dt + 1] = acc;
    }
    return m;
}

std::vector<double> default_q_orders() {
    std::vector<double> q;
    for (int k = -5; k <= 10; ++k) q.push_back(static_cast<double>(k));
    return q;
}

std::vector<int64_t> default_box_sizes() {
    std::vector<int64_t> dt;
    for (int64_t k = 1; k <= 50; ++k) dt.push_back(k);
    return dt;
}

MfSpectrum mf_spectrum_series(const Vec& v, const std::vector<double>& q,
                              const std::vector<int64_t>& dt) {
    if (q.empty() || dt.empty()) throw std::invalid_argument("mf_spectrum: empty grids");
    if (v.size() < 2 * dt.back())
        throw std::invalid_argument("mf_spectrum: series too short for largest box");

    MfSpectrum spec;
    spec.q = q;
    spec.dt = dt;
    const auto nq = static_cast<Eigen::Index>(q.size());
    const auto nd = static_cast<Eigen::Index>(dt.size());
    spec.moments = Mat::Zero(nq, nd);
    spec.excluded = Mat::Zero(nq, nd);

    for (Eigen::Index d = 0; d < nd; ++d) {
        const Vec boxes = box_measure(v, dt[static_cast<size_t>(d)]);
        Eigen::Index zeros = 0;
        for (Eigen::Index b = 0; b < boxes.size(); ++b)
            if (boxes[b] <= 0.0) ++zeros;
        if (zeros == boxes.size())
            throw std::invalid_argument("mf_spectrum: all boxes empty at dt = " +
                                        std::to_string(dt[static_cast<size_t>(d)]));
        for (Eigen::Index iq = 0; iq < nq; ++iq) {
            const double qq = q[static_cast<size_t>(iq)];
            double sum = 0.0;
            Eigen::Index used = 0;
            for (Eigen::Index b = 0; b < boxes.size(); ++b) {
                if (boxes[b] <= 0.0) {
                    // zero mass diverges for q <= 0; excluded and counted
                    if (qq <= 0.0) continue;
                    ++used;
                    continue;
                }
                sum += std::pow(boxes[b], qq);
                ++used;
            }
            spec.moments(iq, d) = sum / static_cast<double>(used);
            spec.excluded(iq, d) = qq <= 0.0 ? static_cast<double>(zeros) : 0.0;
        }
    }

    // eta(q): slope of ln M against ln dt over the full box-size range.
    spec.eta = Vec::Zero(nq);
    spec.r2 = Vec::Zero(nq);
    std::vector<double> lx(dt.size()), ly(dt.size());
    for (size_t d = 0; d < dt.size(); ++d) lx[d] = std::log(static_cast<double>(dt[d]));
    for (Eigen::Index iq = 0; iq < nq; ++iq) {
        size_t kept = 0;
        std::vector<double> fx, fy;
        for (Eigen::Index d = 0; d < nd; ++d) {
            const double m = spec.moments(iq, d);
            if (!(m > 0.0) || !std::isfinite(m)) continue;
            fx.push_back(lx[static_cast<size_t>(d)]);
            fy.push_back(std::log(m));
            ++kept;
        }
        if (kept < 3)
            throw std::invalid_argument("mf_spectrum: fewer than 3 box sizes survive at q = " +
                                        std::to_string(q[static_cast<size_t>(iq)]));
        const LineFit line = fit_line(fx, fy);
        spec.eta[iq] = line.slope;
        spec.r2[iq] = line.r2;
    }

    // Concavity from discrete second differences (reported, not assumed).
    spec.max_second_diff = -std::numeric_limits<double>::infinity();
    for (Eigen::Index iq = 1; iq + 1 < nq; ++iq) {
        const double dq1 = q[static_cast<size_t>(iq)] - q[static_cast<size_t>(iq) - 1];
        const double dq2 = q[static_cast<size_t>(iq) + 1] - q[static_cast<size_t>(iq)];
        const double second = (spec.eta[iq + 1] - spec.eta[iq]) / dq2 -
                              (spec.eta[iq] - spec.eta[iq - 1]) / dq1;
        spec.max_second_diff = std::max(spec.max_second_diff, second);
    }
    if (nq < 3) spec.max_second_diff = 0.0;  // no interior point, no curvature
    spec.concave = spec.max_second_diff <= 1e-6;
    return spec;
}

MfSpectrum mf_spectrum(const FlowLedger& fl, int64_t tau, int64_t t_first, int64_t t_last,
                       const std::vector<double>& q, const std::vector<int64_t>& dt) {
    const MeasureSeries series = mf_measure(fl, tau, t_first, t_last);
    MfSpectrum spec = mf_spectrum_series(series.v, q, dt);
    spec.tau = tau;
    return spec;
}

}  // namespace chaincohort
