#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include <Eigen/Eigenvalues>

#include "chaincohort/rng.hpp"
#include "chaincohort/stats.hpp"

using namespace chaincohort;
using namespace chaincohort::stats;

namespace {

Vec white_noise(Eigen::Index n, uint64_t seed) {
    Rng rng(seed);
    Vec y(n);
    for (Eigen::Index i = 0; i < n; ++i) y[i] = rng.normal();
    return y;
}

Vec random_walk(Eigen::Index n, uint64_t seed) {
    Rng rng(seed);
    Vec y(n);
    double acc = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        acc += rng.normal();
        y[i] = acc;
    }
    return y;
}

Vec ar1(Eigen::Index n, double phi, uint64_t seed, double mu = 0.0) {
    Rng rng(seed);
    Vec y(n);
    double prev = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        prev = phi * prev + rng.normal();
        y[i] = mu + prev;
    }
    return y;
}

Vec arma11(Eigen::Index n, double phi, double theta, uint64_t seed) {
    Rng rng(seed);
    Vec y(n);
    double prev = 0.0, e_prev = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double e = rng.normal();
        prev = phi * prev + e + theta * e_prev;
        e_prev = e;
        y[i] = prev;
    }
    return y;
}

}  // namespace

TEST_CASE("pearson closed-form oracle") {
    Vec x(3), y(3);
    x << 1, 2, 3;
    y << 2, 4, 6.5;
    // Hand sums: Sxy = 4.5, Sxx = 2, Syy = 366/36.
    const double expected = 4.5 / std::sqrt(2.0 * (366.0 / 36.0));
    CHECK(pearson(x, y) == doctest::Approx(expected).epsilon(1e-12));

    SUBCASE("self correlation is 1, negation is -1") {
        const Vec v = white_noise(50, 3);
        CHECK(pearson(v, v) == doctest::Approx(1.0));
        CHECK(pearson(v, Vec(-v)) == doctest::Approx(-1.0));
    }
    SUBCASE("zero variance is rejected") {
        const Vec c = Vec::Constant(10, 3.0);
        CHECK_THROWS_AS(pearson(c, white_noise(10, 4)), std::invalid_argument);
    }
}

TEST_CASE("corr_matrix is symmetric PSD with unit diagonal") {
    std::vector<Vec> series;
    for (uint64_t s = 0; s < 4; ++s) series.push_back(white_noise(200, 100 + s));
    series.push_back(Vec(0.5 * series[0] + 0.5 * series[1]));
    const CorrMatrix cm = corr_matrix(series);

    CHECK((cm.r - cm.r.transpose()).cwiseAbs().maxCoeff() == 0.0);
    for (Eigen::Index i = 0; i < cm.r.rows(); ++i) CHECK(cm.r(i, i) == 1.0);
    const Eigen::SelfAdjointEigenSolver<Mat> es(cm.r);
    CHECK(es.eigenvalues().minCoeff() > -1e-9);

    SUBCASE("zero-variance entries are flagged undefined") {
        series.push_back(Vec::Constant(200, 1.0));
        const CorrMatrix flagged = corr_matrix(series);
        CHECK(!flagged.defined[0][5]);
        CHECK(std::isnan(flagged.r(0, 5)));
        CHECK(flagged.defined[0][1]);
    }
}

TEST_CASE("ljung_box hand oracle") {
    // y = [1,0,0,0]: rho_1 = -1/12, rho_2 = -1/6, Q = 24*(rho1^2/3 + rho2^2/2) = 7/18.
    Vec y(4);
    y << 1, 0, 0, 0;
    const LjungBoxResult res = ljung_box(y, 2);
    CHECK(res.q == doctest::Approx(7.0 / 18.0).epsilon(1e-12));
    // df = 2: p = exp(-Q/2) in closed form.
    CHECK(res.p_value == doctest::Approx(std::exp(-7.0 / 36.0)).epsilon(1e-10));
}

TEST_CASE("chi-square cdf against closed forms") {
    // df = 2: cdf(x) = 1 - exp(-x/2); the 95% quantile is -2 ln 0.05.
    CHECK(chi2_cdf(-2.0 * std::log(0.05), 2.0) == doctest::Approx(0.95).epsilon(1e-12));
    for (double x : {0.1, 1.0, 2.5, 7.0})
        CHECK(chi2_cdf(x, 2.0) == doctest::Approx(1.0 - std::exp(-x / 2.0)).epsilon(1e-12));
    // df = 4: cdf(x) = 1 - exp(-x/2)(1 + x/2).
    for (double x : {0.5, 1.0, 3.0, 10.0})
        CHECK(chi2_cdf(x, 4.0) ==
              doctest::Approx(1.0 - std::exp(-x / 2.0) * (1.0 + x / 2.0)).epsilon(1e-12));
    // Known 95% quantile of chi2_1.
    CHECK(chi2_cdf(3.841458820694124, 1.0) == doctest::Approx(0.95).epsilon(1e-9));
}

TEST_CASE("ljung_box Monte Carlo behavior") {
    SUBCASE("iid noise is rejected at roughly the nominal rate") {
        int rejections = 0;
        for (uint64_t seed = 1; seed <= 100; ++seed)
            if (ljung_box(white_noise(400, 7000 + seed), 10).p_value < 0.05) ++rejections;
        CHECK(rejections <= 10);
    }
    SUBCASE("strong AR(1) is detected decisively") {
        for (uint64_t seed = 1; seed <= 5; ++seed)
            CHECK(ljung_box(ar1(500, 0.9, 8000 + seed), 10).p_value < 1e-3);
    }
}

TEST_CASE("adf monte carlo battery") {
    SUBCASE("white noise: unit root rejected in >= 90/100 trials") {
        int rejections = 0;
        for (uint64_t seed = 1; seed <= 100; ++seed)
            if (adf_test(white_noise(2000, seed), AdfRegression::Drift).reject_at_95)
                ++rejections;
        CHECK(rejections >= 90);
    }
    SUBCASE("random walk: fails to reject in >= 90/100 trials") {
        int rejections = 0;
        for (uint64_t seed = 1; seed <= 100; ++seed)
            if (adf_test(random_walk(2000, 200 + seed), AdfRegression::Drift).reject_at_95)
                ++rejections;
        CHECK(rejections <= 10);
    }
    SUBCASE("trend stationarity needs the trend spec") {
        int rejections = 0;
        for (uint64_t seed = 1; seed <= 100; ++seed) {
            Vec y = white_noise(2000, 400 + seed);
            for (Eigen::Index i = 0; i < y.size(); ++i)
                y[i] += 0.05 * static_cast<double>(i);
            if (adf_test(y, AdfRegression::DriftTrend).reject_at_95) ++rejections;
        }
        CHECK(rejections >= 90);
    }
    SUBCASE("an exact deterministic trend makes the design singular") {
        Vec y(200);
        for (Eigen::Index i = 0; i < y.size(); ++i) y[i] = static_cast<double>(i);
        CHECK_THROWS_AS(adf_test(y, AdfRegression::DriftTrend, 2), std::invalid_argument);
    }
    SUBCASE("schwert rule") {
        CHECK(schwert_lag(2000) == 25);
        CHECK(schwert_lag(100) == 12);
    }
    SUBCASE("series shorter than the lag order is rejected") {
        CHECK_THROWS_AS(adf_test(white_noise(20, 1), AdfRegression::Drift, 15),
                        std::invalid_argument);
    }
}

TEST_CASE("arma recovery") {
    SUBCASE("AR(1) coefficients within 0.05") {
        const ArmaFit fit = arma_fit_css(ar1(5000, 0.5, 42), 1, 0);
        CHECK(fit.converged);
        CHECK(fit.phi[0] == doctest::Approx(0.5).epsilon(0.1));
        CHECK(std::abs(fit.phi[0] - 0.5) < 0.05);
        CHECK(fit.sigma2 == doctest::Approx(1.0).epsilon(0.1));
    }
    SUBCASE("ARMA(1,1) coefficients within 0.07") {
        const ArmaFit fit = arma_fit_css(arma11(5000, 0.5, 0.3, 43), 1, 1);
        CHECK(fit.converged);
        CHECK(std::abs(fit.phi[0] - 0.5) < 0.07);
        CHECK(std::abs(fit.theta[0] - 0.3) < 0.07);
    }
    SUBCASE("white noise selects (0,0) by BIC") {
        const ArmaSelection sel = arma_select(white_noise(2000, 44), 2, 2);
        CHECK(sel.bic_order == std::pair<int, int>{0, 0});
    }
    SUBCASE("AR(1) selects (1,0) by BIC") {
        const ArmaSelection sel = arma_select(ar1(5000, 0.5, 45), 2, 2);
        CHECK(sel.bic_order == std::pair<int, int>{1, 0});
    }
    SUBCASE("selection is deterministic") {
        const Vec y = arma11(1000, 0.4, 0.2, 46);
        const ArmaSelection a = arma_select(y, 2, 2);
        const ArmaSelection b = arma_select(y, 2, 2);
        CHECK(a.bic_order == b.bic_order);
        CHECK(a.bic_fit.phi == b.bic_fit.phi);
        CHECK(a.bic_fit.loglik == b.bic_fit.loglik);
    }
}

TEST_CASE("var recovery") {
    SUBCASE("y2 = 0 disabled equation") {
        // y2 is a tiny noise floor so the design stays full rank; cross
        // coefficients must vanish and the own coefficient recover 0.3.
        Rng rng(47);
        const Eigen::Index n = 4000;
        Vec y1(n), y2(n);
        double prev = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            prev = 0.3 * prev + rng.normal();
            y1[i] = prev;
            y2[i] = 1e-3 * rng.normal();
        }
        const VarFit fit = var_fit(y1, y2);
        CHECK(std::abs(fit.coef(0, 1) - 0.3) < 0.05);  // own lag of y1
        CHECK(std::abs(fit.coef(1, 1)) < 0.01);        // y1 does not drive y2
    }
    SUBCASE("known matrix [[0.30,0.18],[0,0.12]] within 0.05 at n=2000") {
        Rng rng(48);
        const Eigen::Index n = 2000;
        Vec y1(n), y2(n);
        double a = 0.0, b = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            const double na = rng.normal(), nb = rng.normal();
            const double a2 = 0.30 * a + 0.18 * b + na;
            const double b2 = 0.12 * b + nb;
            a = a2;
            b = b2;
            y1[i] = a;
            y2[i] = b;
        }
        const VarFit fit = var_fit(y1, y2);
        CHECK(std::abs(fit.coef(0, 1) - 0.30) < 0.05);
        CHECK(std::abs(fit.coef(0, 2) - 0.18) < 0.05);
        CHECK(std::abs(fit.coef(1, 1) - 0.00) < 0.05);
        CHECK(std::abs(fit.coef(1, 2) - 0.12) < 0.05);
    }
    SUBCASE("iid pair: |t| < 2 for >= 90% of seeds") {
        int quiet = 0;
        for (uint64_t seed = 1; seed <= 50; ++seed) {
            const VarFit fit = var_fit(white_noise(500, 900 + seed),
                                       white_noise(500, 951 + seed));
            if (std::abs(fit.tstat(0, 1)) < 2 && std::abs(fit.tstat(0, 2)) < 2 &&
                std::abs(fit.tstat(1, 1)) < 2 && std::abs(fit.tstat(1, 2)) < 2)
                ++quiet;
        }
        CHECK(quiet >= 40);  // 4 checks at ~5% each
    }
}

TEST_CASE("ols rejects singular designs") {
    Mat X(10, 2);
    for (Eigen::Index i = 0; i < 10; ++i) {
        X(i, 0) = static_cast<double>(i);
        X(i, 1) = 2.0 * static_cast<double>(i);
    }
    CHECK_THROWS_AS(ols(X, white_noise(10, 1)), std::invalid_argument);
}

TEST_CASE("diff shrinks by one and telescopes") {
    Vec y(4);
    y << 0.2, 0.5, 0.5, 0.1;
    const Vec d = diff(y);
    REQUIRE(d.size() == 3);
    CHECK(d[0] == doctest::Approx(0.3));
    CHECK(d.sum() == doctest::Approx(y[3] - y[0]));
}
