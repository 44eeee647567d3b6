#ifndef CHAINCOHORT_STATS_HPP
#define CHAINCOHORT_STATS_HPP

#include <optional>
#include <utility>
#include <vector>

#include "chaincohort/linalg.hpp"

namespace chaincohort::stats {

/// Ordinary least squares of y on the columns of X.
/// Throws std::invalid_argument on a rank-deficient design.
struct Ols {
    Vec beta;
    Vec se;
    Vec tstat;
    double sigma2 = 0.0;
    double r2 = 0.0;
    Eigen::Index df = 0;
};
Ols ols(const Mat& X, const Vec& y);

/// Pearson correlation coefficient. Throws on length mismatch, length < 3 or
/// zero variance.
double pearson(const Vec& x, const Vec& y);

/// Pairwise Pearson matrix. Entries whose pair has zero variance are flagged
/// undefined (NaN in the matrix, false in `defined`).
struct CorrMatrix {
    Mat r;
    std::vector<std::vector<bool>> defined;
};
CorrMatrix corr_matrix(const std::vector<Vec>& series);

// ---------------------------------------------------------------------------
// Augmented Dickey-Fuller unit-root test
// ---------------------------------------------------------------------------

enum class AdfRegression { None, Drift, DriftTrend };

struct AdfResult {
    double t_stat = 0.0;
    double crit_1pct = 0.0;
    double crit_5pct = 0.0;
    double crit_10pct = 0.0;
    bool reject_at_95 = false;  // t_stat < crit_5pct: no unit root
    int lags = 0;
    Eigen::Index n_eff = 0;
};

/// Dickey-Fuller regression of dy_t on y_{t-1}, `lags` lagged differences and
/// the chosen deterministic terms; the t statistic on y_{t-1} is compared to
/// the MacKinnon response-surface critical values. lags < 0 selects the
/// Schwert rule floor(12 * (n/100)^(1/4)).
AdfResult adf_test(const Vec& y, AdfRegression regression = AdfRegression::Drift,
                   int lags = -1);

int schwert_lag(Eigen::Index n);

// ---------------------------------------------------------------------------
// Ljung-Box portmanteau test
// ---------------------------------------------------------------------------

struct LjungBoxResult {
    double q = 0.0;
    double p_value = 0.0;
    int lags = 0;
};
LjungBoxResult ljung_box(const Vec& y, int max_lag);

/// Regularized lower incomplete gamma P(a, x); chi-square cdf with k degrees
/// of freedom is P(k/2, x/2).
double gamma_p(double a, double x);
double chi2_cdf(double x, double k);

// ---------------------------------------------------------------------------
// ARMA(p,q) by conditional sum of squares
// ---------------------------------------------------------------------------

struct ArmaFit {
    int p = 0, q = 0;
    double mu = 0.0;
    Vec phi;    // autoregressive coefficients
    Vec theta;  // moving-average coefficients
    double sigma2 = 0.0;
    double loglik = 0.0;
    double aic = 0.0;
    double bic = 0.0;
    bool converged = false;
};

/// Gaussian conditional-sum-of-squares fit, maximized by a deterministic
/// Nelder-Mead simplex started from Yule-Walker values. The conditional
/// likelihood is an approximation to the exact state-space one; adequate for
/// order selection at the series lengths used here.
ArmaFit arma_fit_css(const Vec& y, int p, int q);

struct ArmaSelection {
    std::pair<int, int> aic_order{0, 0};
    std::pair<int, int> bic_order{0, 0};
    ArmaFit aic_fit;
    ArmaFit bic_fit;
    std::vector<std::pair<int, int>> skipped_cells;  // non-converged grid cells
};

/// Grid search over p in [0, max_p], q in [0, max_q]; best orders under AIC
/// and BIC. Non-converged cells are skipped and flagged.
ArmaSelection arma_select(const Vec& y, int max_p = 5, int max_q = 5);

// ---------------------------------------------------------------------------
// VAR(1)
// ---------------------------------------------------------------------------

/// Per-equation OLS of each variable on an intercept and both lagged
/// variables. coef/se/tstat rows are equations, columns are
/// (intercept, y1_{t-1}, y2_{t-1}).
struct VarFit {
    Mat coef;
    Mat se;
    Mat tstat;
    Eigen::Index n_eff = 0;
};
VarFit var_fit(const Vec& y1, const Vec& y2);

/// First differences (length shrinks by one).
Vec diff(const Vec& y);

}  // namespace chaincohort::stats

#endif  // CHAINCOHORT_STATS_HPP
