#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "chaincohort/flow_ledger.hpp"
#include "chaincohort/multifractal.hpp"
#include "chaincohort/rng.hpp"
#include "chaincohort/synth.hpp"

using namespace chaincohort;

namespace {

/// Deterministic two-weight multiplicative cascade on 2^levels cells:
/// each refinement sends mass p left and 1-p right.
Vec binomial_cascade(double p, int levels) {
    Vec v = Vec::Ones(1);
    for (int l = 0; l < levels; ++l) {
        Vec next(v.size() * 2);
        for (Eigen::Index i = 0; i < v.size(); ++i) {
            next[2 * i] = v[i] * p;
            next[2 * i + 1] = v[i] * (1.0 - p);
        }
        v = std::move(next);
    }
    return v;
}

double cascade_eta(double p, double q) {
    return 1.0 - std::log2(std::pow(p, q) + std::pow(1.0 - p, q));
}

}  // namespace

TEST_CASE("box_measure identities") {
    Vec v(6);
    v << 0.1, 0.2, 0.3, 0.1, 0.2, 0.1;
    SUBCASE("dt = 1 returns the series") {
        CHECK(box_measure(v, 1) == v);
        CHECK(box_measure_trailing(v, 1) == v);
    }
    SUBCASE("dt = span collapses to the total") {
        const Vec m = box_measure(v, 6);
        REQUIRE(m.size() == 1);
        CHECK(m[0] == doctest::Approx(1.0));
    }
    SUBCASE("uniform measure: every box is dt/T") {
        const Vec u = Vec::Constant(100, 1.0 / 100.0);
        for (int64_t dt : {1, 2, 5, 10, 33}) {
            const Vec m = box_measure(u, dt);
            for (Eigen::Index b = 0; b < m.size(); ++b)
                CHECK(m[b] == doctest::Approx(static_cast<double>(dt) / 100.0)
                                  .epsilon(1e-12));
        }
    }
    SUBCASE("trailing windows slide one step at a time") {
        const Vec m = box_measure_trailing(v, 3);
        REQUIRE(m.size() == 4);
        CHECK(m[0] == doctest::Approx(0.6));
        CHECK(m[1] == doctest::Approx(0.6));
        CHECK(m[2] == doctest::Approx(0.6));
        CHECK(m[3] == doctest::Approx(0.4));
    }
    SUBCASE("dt beyond the span is an error") {
        CHECK_THROWS_AS(box_measure(v, 7), std::invalid_argument);
    }
}

TEST_CASE("uniform measure: eta(q) = q to high precision") {
    const Vec u = Vec::Constant(2048, 1.0 / 2048.0);
    const MfSpectrum spec = mf_spectrum_series(u, default_q_orders(), default_box_sizes());
    for (size_t iq = 0; iq < spec.q.size(); ++iq) {
        CHECK(std::abs(spec.eta[static_cast<Eigen::Index>(iq)] - spec.q[iq]) < 0.01);
        CHECK(spec.r2[static_cast<Eigen::Index>(iq)] > 0.999999);
    }
    SUBCASE("eta(1) is the total-mass scaling and eta(0) the mean convention") {
        // q grid is -5..10, so q=0 is index 5 and q=1 index 6.
        CHECK(spec.q[5] == 0.0);
        CHECK(std::abs(spec.eta[5]) < 1e-9);   // M_0 = 1 per box under the mean
        CHECK(spec.q[6] == 1.0);
        CHECK(std::abs(spec.eta[6] - 1.0) < 1e-9);
    }
    SUBCASE("linearity within 0.01 means zero second differences") {
        CHECK(spec.concave);  // linear counts as (weakly) concave
        CHECK(std::abs(spec.max_second_diff) < 1e-9);
    }
}

TEST_CASE("binomial cascade matches the analytic spectrum") {
    const Vec v = binomial_cascade(0.7, 10);  // 1024 cells
    REQUIRE(v.size() == 1024);
    CHECK(v.sum() == doctest::Approx(1.0));

    SUBCASE("dyadic box sizes: exact partition-function exponents") {
        const std::vector<int64_t> dts{1, 2, 4, 8, 16, 32};
        const MfSpectrum spec = mf_spectrum_series(v, default_q_orders(), dts);
        for (size_t iq = 0; iq < spec.q.size(); ++iq) {
            const double target = cascade_eta(0.7, spec.q[iq]);
            CHECK(std::abs(spec.eta[static_cast<Eigen::Index>(iq)] - target) < 0.05);
        }
        CHECK(spec.concave);
        CHECK(spec.excluded.maxCoeff() == 0.0);  // the cascade has no zero boxes
    }
    SUBCASE("strict concavity shows in the second differences") {
        const std::vector<int64_t> dts{1, 2, 4, 8, 16, 32};
        const MfSpectrum spec = mf_spectrum_series(v, default_q_orders(), dts);
        for (Eigen::Index iq = 1; iq + 1 < static_cast<Eigen::Index>(spec.q.size()); ++iq)
            CHECK(spec.eta[iq + 1] - 2.0 * spec.eta[iq] + spec.eta[iq - 1] < 1e-9);
    }
}

TEST_CASE("zero boxes are excluded for q <= 0 and counted") {
    Vec v = Vec::Zero(64);
    for (Eigen::Index i = 0; i < 64; i += 2) v[i] = 1.0 / 32.0;  // half the cells empty
    const std::vector<double> qs{-2.0, 0.0, 2.0};
    const std::vector<int64_t> dts{1, 2, 4, 8};
    const MfSpectrum spec = mf_spectrum_series(v, qs, dts);
    CHECK(spec.excluded(0, 0) == 32.0);  // q=-2, dt=1: all odd cells dropped
    CHECK(spec.excluded(1, 0) == 32.0);  // q=0 likewise
    CHECK(spec.excluded(2, 0) == 0.0);   // positive moments keep zero boxes
    CHECK(spec.excluded(0, 1) == 0.0);   // dt=2 boxes all carry mass
    // M_0 over surviving boxes is identically 1.
    CHECK(spec.moments(1, 0) == doctest::Approx(1.0));
    CHECK(spec.moments(1, 3) == doctest::Approx(1.0));
}

TEST_CASE("mf_measure on a ledger") {
    SynthConfig cfg;
    cfg.horizon_steps = 300;
    cfg.alpha = 0.9;
    cfg.issuance_per_step = 5000;
    cfg.seed = 41;
    const FlowLedger fl = build_flow_ledger(synthesize_ledger(cfg, TimeGrid{}), TimeGrid{});

    SUBCASE("normalization: the measure sums to one across cohorts") {
        Rng rng(42);
        for (int trial = 0; trial < 100; ++trial) {
            const int64_t t = 50 + static_cast<int64_t>(rng.below(250));
            if (volume(fl, t) == 0) continue;
            double sum = 0.0;
            for (int64_t tau = 0; tau < t; ++tau) {
                const MeasureSeries m = mf_measure(fl, tau, t, t);
                sum += m.v[0];
            }
            CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
        }
    }
    SUBCASE("a cohort that never trades has measure zero") {
        // cohort index horizon-1 can only trade at the horizon
        const MeasureSeries m = mf_measure(fl, 5, 200, 280);
        double direct = 0.0;
        for (const SpendEntry& e : fl.deaths_of[5])
            if (e.spend >= 200 && e.spend <= 280)
                direct += static_cast<double>(e.amount);
        if (direct == 0.0) CHECK(m.v.maxCoeff() == 0.0);
    }
    SUBCASE("only trading cohort carries the full measure") {
        std::vector<TxRecord> records{{"a", 0, 0, {}, {100}, true}};
        records.push_back({"s", 3, 3 * 86400, {{"a", 0}}, {100}, false});
        const FlowLedger tiny = build_flow_ledger(records, TimeGrid{});
        const MeasureSeries m = mf_measure(tiny, 0, 1, 3);
        CHECK(m.v[2] == doctest::Approx(1.0));
        CHECK(m.v[0] == 0.0);
        // steps with V = 0 are flagged
        CHECK(m.skipped.size() == 2);
    }
    SUBCASE("ledger-level spectrum runs end to end") {
        const std::vector<int64_t> dts{1, 2, 4, 8, 16};
        const MfSpectrum spec =
            mf_spectrum(fl, 10, 40, 300, {0.0, 1.0, 2.0, 3.0}, dts);
        CHECK(spec.tau == 10);
        // eta(1) close to 1: total measure mass scales linearly with box size
        CHECK(spec.eta[1] == doctest::Approx(1.0).epsilon(0.25));
    }
}

TEST_CASE("mf_spectrum error paths") {
    SUBCASE("all-zero measure") {
        const Vec v = Vec::Zero(64);
        CHECK_THROWS_AS(mf_spectrum_series(v, {1.0}, {1, 2, 4}), std::invalid_argument);
    }
    SUBCASE("series too short for the largest box") {
        const Vec v = Vec::Constant(10, 0.1);
        CHECK_THROWS_AS(mf_spectrum_series(v, {1.0}, {1, 2, 8}), std::invalid_argument);
    }
    SUBCASE("fewer than 3 box sizes") {
        const Vec v = Vec::Constant(64, 1.0 / 64);
        CHECK_THROWS_AS(mf_spectrum_series(v, {1.0}, {1, 2}), std::invalid_argument);
    }
}

TEST_CASE("moment monotonicity in q on sub-unit boxes") {
    const Vec v = binomial_cascade(0.6, 8);
    const std::vector<int64_t> dts{1, 2, 4, 8, 16};
    std::vector<double> qs;
    for (int k = 1; k <= 8; ++k) qs.push_back(static_cast<double>(k));
    const MfSpectrum spec = mf_spectrum_series(v, qs, dts);
    for (size_t d = 0; d < dts.size(); ++d)
        for (size_t iq = 1; iq < qs.size(); ++iq)
            CHECK(spec.moments(static_cast<Eigen::Index>(iq), static_cast<Eigen::Index>(d)) <=
                  spec.moments(static_cast<Eigen::Index>(iq) - 1,
                               static_cast<Eigen::Index>(d)) +
                      1e-15);
}
