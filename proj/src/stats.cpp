#include "chaincohort/stats.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

namespace chaincohort::stats {

Vec diff(const Vec& y) {
    if (y.size() < 2) throw std::invalid_argument("diff needs >= 2 points");
    return y.tail(y.size() - 1) - y.head(y.size() - 1);
}

Ols ols(const Mat& X, const Vec& y) {
    if (X.rows() != y.size()) throw std::invalid_argument("ols: row mismatch");
    if (X.rows() <= X.cols()) throw std::invalid_argument("ols: more columns than rows");

    Eigen::ColPivHouseholderQR<Mat> qr(X);
    if (qr.rank() < X.cols()) throw std::invalid_argument("ols: singular design matrix");

    Ols fit;
    fit.beta = qr.solve(y);
    const Vec resid = y - X * fit.beta;
    fit.df = X.rows() - X.cols();
    fit.sigma2 = resid.squaredNorm() / static_cast<double>(fit.df);

    const Mat xtx_inv = (X.transpose() * X).inverse();
    fit.se = (fit.sigma2 * xtx_inv.diagonal()).cwiseMax(0.0).cwiseSqrt();
    fit.tstat = Vec::Zero(X.cols());
    for (Eigen::Index j = 0; j < X.cols(); ++j)
        fit.tstat[j] = fit.se[j] > 0.0 ? fit.beta[j] / fit.se[j]
                                       : std::numeric_limits<double>::infinity();
    const double tss = (y.array() - y.mean()).square().sum();
    fit.r2 = tss > 0.0 ? 1.0 - resid.squaredNorm() / tss : 1.0;
    return fit;
}

double pearson(const Vec& x, const Vec& y) {
    if (x.size() != y.size()) throw std::invalid_argument("pearson: size mismatch");
    if (x.size() < 3) throw std::invalid_argument("pearson: need >= 3 points");
    const Vec dx = x.array() - x.mean();
    const Vec dy = y.array() - y.mean();
    const double sxx = dx.squaredNorm(), syy = dy.squaredNorm();
    if (sxx == 0.0 || syy == 0.0) throw std::invalid_argument("pearson: zero variance");
    return dx.dot(dy) / std::sqrt(sxx * syy);
}

CorrMatrix corr_matrix(const std::vector<Vec>& series) {
    const size_t k = series.size();
    if (k == 0) throw std::invalid_argument("corr_matrix: no series");
    for (const Vec& s : series) {
        if (s.size() != series.front().size())
            throw std::invalid_argument("corr_matrix: unequal lengths");
        if (s.size() < 3) throw std::invalid_argument("corr_matrix: need >= 3 points");
    }
    CorrMatrix out;
    out.r = Mat::Identity(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k));
    out.defined.assign(k, std::vector<bool>(k, true));
    for (size_t i = 0; i < k; ++i) {
        for (size_t j = i + 1; j < k; ++j) {
            double r;
            try {
                r = pearson(series[i], series[j]);
            } catch (const std::invalid_argument&) {
                r = std::numeric_limits<double>::quiet_NaN();
                out.defined[i][j] = out.defined[j][i] = false;
            }
            out.r(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = r;
            out.r(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = r;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// ADF
// ---------------------------------------------------------------------------

int schwert_lag(Eigen::Index n) {
    return static_cast<int>(std::floor(12.0 * std::pow(static_cast<double>(n) / 100.0, 0.25)));
}

namespace {

// MacKinnon (2010) response-surface constants for the Dickey-Fuller t
// distribution: crit = b0 + b1/T + b2/T^2 + b3/T^3.
struct RsRow {
    double b0, b1, b2, b3;
};
constexpr RsRow kMacKinnon[3][3] = {
    // none
    {{-2.56574, -2.2358, -3.627, 0.0},
     {-1.94100, -0.2686, -3.365, 31.223},
     {-1.61682, 0.2656, -2.714, 25.364}},
    // drift
    {{-3.43035, -6.5393, -16.786, -79.433},
     {-2.86154, -2.8903, -4.234, -40.040},
     {-2.56677, -1.5384, -2.809, 0.0}},
    // drift + trend
    {{-3.95877, -9.0531, -28.428, -134.155},
     {-3.41049, -4.3904, -9.036, -45.374},
     {-3.12705, -2.5856, -3.925, -22.380}},
};

double mackinnon_crit(AdfRegression reg, int level_index, double T) {
    const RsRow& r = kMacKinnon[static_cast<int>(reg)][level_index];
    return r.b0 + r.b1 / T + r.b2 / (T * T) + r.b3 / (T * T * T);
}

}  // namespace

AdfResult adf_test(const Vec& y, AdfRegression regression, int lags) {
    const Eigen::Index n = y.size();
    if (lags < 0) lags = schwert_lag(n);
    if (n <= lags + 10)
        throw std::invalid_argument("adf_test: series too short for lag order");

    const Vec dy = diff(y);
    const Eigen::Index rows = dy.size() - lags;  // usable observations
    int det = regression == AdfRegression::None ? 0
              : regression == AdfRegression::Drift ? 1
                                                   : 2;
    const Eigen::Index cols = 1 + lags + det;

    Mat X(rows, cols);
    Vec rhs(rows);
    for (Eigen::Index i = 0; i < rows; ++i) {
        const Eigen::Index t = i + lags;  // index into dy
        rhs[i] = dy[t];
        X(i, 0) = y[t];  // y_{t-1} relative to dy[t] = y[t+1] - y[t]
        for (int j = 1; j <= lags; ++j) X(i, j) = dy[t - j];
        if (det >= 1) X(i, 1 + lags) = 1.0;
        if (det >= 2) X(i, 2 + lags) = static_cast<double>(i + 1);
    }

    const Ols fit = ols(X, rhs);
    AdfResult res;
    res.t_stat = fit.tstat[0];
    res.lags = lags;
    res.n_eff = rows;
    const double T = static_cast<double>(rows);
    res.crit_1pct = mackinnon_crit(regression, 0, T);
    res.crit_5pct = mackinnon_crit(regression, 1, T);
    res.crit_10pct = mackinnon_crit(regression, 2, T);
    res.reject_at_95 = res.t_stat < res.crit_5pct;
    return res;
}

// ---------------------------------------------------------------------------
// Incomplete gamma / chi-square
// ---------------------------------------------------------------------------

namespace {

double gamma_p_series(double a, double x) {
    double term = 1.0 / a;
    double sum = term;
    for (int k = 1; k < 1000; ++k) {
        term *= x / (a + k);
        sum += term;
        if (std::abs(term) < std::abs(sum) * 1e-16) break;
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

double gamma_q_contfrac(double a, double x) {
    // Lentz continued fraction for Q(a, x).
    const double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < 1000; ++i) {
        const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::abs(delta - 1.0) < 1e-16) break;
    }
    return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

}  // namespace

double gamma_p(double a, double x) {
    if (a <= 0.0) throw std::invalid_argument("gamma_p: a must be positive");
    if (x < 0.0) throw std::invalid_argument("gamma_p: x must be non-negative");
    if (x == 0.0) return 0.0;
    if (x < a + 1.0) return gamma_p_series(a, x);
    return 1.0 - gamma_q_contfrac(a, x);
}

double chi2_cdf(double x, double k) { return gamma_p(k / 2.0, x / 2.0); }

LjungBoxResult ljung_box(const Vec& y, int max_lag) {
    const Eigen::Index n = y.size();
    if (max_lag < 1) throw std::invalid_argument("ljung_box: need max_lag >= 1");
    if (n <= max_lag) throw std::invalid_argument("ljung_box: series shorter than max lag");

    const Vec d = y.array() - y.mean();
    const double c0 = d.squaredNorm() / static_cast<double>(n);
    if (c0 == 0.0) throw std::invalid_argument("ljung_box: zero variance");

    double q = 0.0;
    for (int k = 1; k <= max_lag; ++k) {
        double ck = 0.0;
        for (Eigen::Index t = k; t < n; ++t) ck += d[t] * d[t - k];
        ck /= static_cast<double>(n);
        const double rho = ck / c0;
        q += rho * rho / static_cast<double>(n - k);
    }
    q *= static_cast<double>(n) * (static_cast<double>(n) + 2.0);

    LjungBoxResult res;
    res.q = q;
    res.p_value = 1.0 - chi2_cdf(q, static_cast<double>(max_lag));
    res.lags = max_lag;
    return res;
}

// ---------------------------------------------------------------------------
// ARMA
// ---------------------------------------------------------------------------

namespace {

// Largest root modulus of the companion matrix of 1 - c1 L - ... - ck L^k.
double companion_radius(const Vec& c) {
    const Eigen::Index k = c.size();
    if (k == 0) return 0.0;
    if (k == 1) return std::abs(c[0]);
    Mat comp = Mat::Zero(k, k);
    comp.row(0) = c.transpose();
    comp.block(1, 0, k - 1, k - 1).setIdentity();
    return comp.eigenvalues().cwiseAbs().maxCoeff();
}

double css_objective(const Vec& y, int p, int q, const Vec& params) {
    const double mu = params[0];
    const Vec phi = params.segment(1, p);
    const Vec theta = params.segment(1 + p, q);

    // Soft barrier keeping the search inside the stationary/invertible region.
    const double rp = companion_radius(phi);
    const double rq = companion_radius(theta);
    if (rp > 0.998 || rq > 0.998)
        return 1e12 * (1.0 + std::max(rp, rq));

    const Eigen::Index n = y.size();
    std::vector<double> e(static_cast<size_t>(n), 0.0);
    double sse = 0.0;
    for (Eigen::Index t = p; t < n; ++t) {
        double pred = 0.0;
        for (int i = 0; i < p; ++i) pred += phi[i] * (y[t - 1 - i] - mu);
        for (int j = 0; j < q; ++j)
            if (t - 1 - j >= p) pred += theta[j] * e[static_cast<size_t>(t - 1 - j)];
        const double resid = (y[t] - mu) - pred;
        e[static_cast<size_t>(t)] = resid;
        sse += resid * resid;
    }
    return sse;
}

/// Deterministic Nelder-Mead (fminsearch-style initial simplex).
struct SimplexResult {
    Vec x;
    double f;
    bool converged;
};

SimplexResult nelder_mead(const std::function<double(const Vec&)>& fn, Vec x0,
                          int max_iter, double ftol) {
    const Eigen::Index dim = x0.size();
    std::vector<Vec> pts(static_cast<size_t>(dim) + 1, x0);
    for (Eigen::Index i = 0; i < dim; ++i)
        pts[static_cast<size_t>(i) + 1][i] +=
            x0[i] != 0.0 ? 0.05 * x0[i] : 0.00025;

    std::vector<double> fv(pts.size());
    for (size_t i = 0; i < pts.size(); ++i) fv[i] = fn(pts[i]);

    auto order = [&] {
        std::vector<size_t> idx(pts.size());
        for (size_t i = 0; i < idx.size(); ++i) idx[i] = i;
        std::stable_sort(idx.begin(), idx.end(),
                         [&](size_t a, size_t b) { return fv[a] < fv[b]; });
        std::vector<Vec> p2;
        std::vector<double> f2;
        for (size_t i : idx) {
            p2.push_back(pts[i]);
            f2.push_back(fv[i]);
        }
        pts.swap(p2);
        fv.swap(f2);
    };

    bool converged = false;
    for (int it = 0; it < max_iter; ++it) {
        order();
        if (std::abs(fv.back() - fv.front()) <=
            ftol * (std::abs(fv.front()) + ftol)) {
            converged = true;
            break;
        }
        Vec centroid = Vec::Zero(dim);
        for (size_t i = 0; i + 1 < pts.size(); ++i) centroid += pts[i];
        centroid /= static_cast<double>(dim);

        const Vec refl = centroid + (centroid - pts.back());
        const double f_refl = fn(refl);
        if (f_refl < fv.front()) {
            const Vec exp_pt = centroid + 2.0 * (centroid - pts.back());
            const double f_exp = fn(exp_pt);
            if (f_exp < f_refl) {
                pts.back() = exp_pt;
                fv.back() = f_exp;
            } else {
                pts.back() = refl;
                fv.back() = f_refl;
            }
        } else if (f_refl < fv[fv.size() - 2]) {
            pts.back() = refl;
            fv.back() = f_refl;
        } else {
            const Vec contr = centroid + 0.5 * ((f_refl < fv.back() ? refl : pts.back()) - centroid);
            const double f_contr = fn(contr);
            if (f_contr < std::min(f_refl, fv.back())) {
                pts.back() = contr;
                fv.back() = f_contr;
            } else {
                for (size_t i = 1; i < pts.size(); ++i) {
                    pts[i] = pts.front() + 0.5 * (pts[i] - pts.front());
                    fv[i] = fn(pts[i]);
                }
            }
        }
    }
    order();
    return {pts.front(), fv.front(), converged};
}

// Yule-Walker AR(p) start values.
Vec yule_walker(const Vec& y, int p) {
    const Eigen::Index n = y.size();
    const Vec d = y.array() - y.mean();
    const double c0 = d.squaredNorm() / static_cast<double>(n);
    if (c0 == 0.0 || p == 0) return Vec::Zero(p);
    Vec rho(p);
    for (int k = 1; k <= p; ++k) {
        double ck = 0.0;
        for (Eigen::Index t = k; t < n; ++t) ck += d[t] * d[t - k];
        rho[k - 1] = ck / static_cast<double>(n) / c0;
    }
    Mat R = Mat::Identity(p, p);
    for (int i = 0; i < p; ++i)
        for (int j = 0; j < p; ++j)
            if (i != j) R(i, j) = rho[std::abs(i - j) - 1];
    Vec phi = R.colPivHouseholderQr().solve(rho);
    // Shrink toward zero if the start point is outside the stationary region.
    while (companion_radius(phi) > 0.95) phi *= 0.9;
    return phi;
}

}  // namespace

ArmaFit arma_fit_css(const Vec& y, int p, int q) {
    if (p < 0 || q < 0) throw std::invalid_argument("arma_fit_css: negative order");
    const Eigen::Index n = y.size();
    if (n < 20 + p + q) throw std::invalid_argument("arma_fit_css: series too short");

    ArmaFit fit;
    fit.p = p;
    fit.q = q;

    const Eigen::Index n_eff = n - p;
    if (p == 0 && q == 0) {
        fit.mu = y.mean();
        fit.phi = Vec();
        fit.theta = Vec();
        fit.sigma2 = (y.array() - fit.mu).square().sum() / static_cast<double>(n);
        fit.converged = true;
    } else {
        Vec x0(1 + p + q);
        x0[0] = y.mean();
        x0.segment(1, p) = yule_walker(y, p);
        for (int j = 0; j < q; ++j) x0[1 + p + j] = 0.001;

        auto obj = [&](const Vec& v) { return css_objective(y, p, q, v); };
        const auto res = nelder_mead(obj, x0, 400 * (1 + p + q), 1e-12);
        fit.mu = res.x[0];
        fit.phi = res.x.segment(1, p);
        fit.theta = res.x.segment(1 + p, q);
        fit.sigma2 = res.f / static_cast<double>(n_eff);
        fit.converged = res.converged && res.f < 1e11;
    }

    const double two_pi = 6.283185307179586476925286766559;
    fit.loglik = -0.5 * static_cast<double>(n_eff) *
                 (std::log(two_pi * fit.sigma2) + 1.0);
    const double k = static_cast<double>(p + q + 2);  // mu and sigma^2 included
    fit.aic = 2.0 * k - 2.0 * fit.loglik;
    fit.bic = k * std::log(static_cast<double>(n)) - 2.0 * fit.loglik;
    return fit;
}

ArmaSelection arma_select(const Vec& y, int max_p, int max_q) {
    if (y.size() < 100) throw std::invalid_argument("arma_select: need length >= 100");
    ArmaSelection sel;
    double best_aic = std::numeric_limits<double>::infinity();
    double best_bic = std::numeric_limits<double>::infinity();
    for (int p = 0; p <= max_p; ++p) {
        for (int q = 0; q <= max_q; ++q) {
            const ArmaFit fit = arma_fit_css(y, p, q);
            if (!fit.converged) {
                sel.skipped_cells.emplace_back(p, q);
                continue;
            }
            if (fit.aic < best_aic) {
                best_aic = fit.aic;
                sel.aic_order = {p, q};
                sel.aic_fit = fit;
            }
            if (fit.bic < best_bic) {
                best_bic = fit.bic;
                sel.bic_order = {p, q};
                sel.bic_fit = fit;
            }
        }
    }
    if (!std::isfinite(best_bic))
        throw std::runtime_error("arma_select: no grid cell converged");
    return sel;
}

// ---------------------------------------------------------------------------
// VAR(1)
// ---------------------------------------------------------------------------

VarFit var_fit(const Vec& y1, const Vec& y2) {
    if (y1.size() != y2.size()) throw std::invalid_argument("var_fit: size mismatch");
    const Eigen::Index n = y1.size();
    if (n < 50) throw std::invalid_argument("var_fit: need length >= 50");

    const Eigen::Index rows = n - 1;
    Mat X(rows, 3);
    for (Eigen::Index t = 0; t < rows; ++t) {
        X(t, 0) = 1.0;
        X(t, 1) = y1[t];
        X(t, 2) = y2[t];
    }
    VarFit out;
    out.coef = Mat(2, 3);
    out.se = Mat(2, 3);
    out.tstat = Mat(2, 3);
    out.n_eff = rows;
    const Vec* targets[2] = {&y1, &y2};
    for (int eq = 0; eq < 2; ++eq) {
        const Vec rhs = targets[eq]->tail(rows);
        const Ols fit = ols(X, rhs);
        out.coef.row(eq) = fit.beta.transpose();
        out.se.row(eq) = fit.se.transpose();
        out.tstat.row(eq) = fit.tstat.transpose();
    }
    return out;
}

}  // namespace chaincohort::stats
