#include "filtlab/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace filtlab {

SamplePath quadratic_variation(const SamplePath& path) {
    const std::size_t m = path.values.size();
    std::vector<double> qv(m, 0.0);
    for (std::size_t k = 0; k + 1 < m; ++k) {
        const double d = path.values[k + 1] - path.values[k];
        qv[k + 1] = qv[k] + d * d;
    }
    return SamplePath(path.grid, std::move(qv));
}

double total_variation(const SamplePath& A) {
    double tv = 0.0;
    for (std::size_t k = 0; k + 1 < A.values.size(); ++k)
        tv += std::abs(A.values[k + 1] - A.values[k]);
    return tv;
}

RegressionResult ols(const std::vector<double>& x, const std::vector<double>& y,
                     const std::vector<double>* weights) {
    if (x.size() != y.size() || x.size() < 3)
        throw std::invalid_argument("ols: need matching samples of size >= 3");
    const std::size_t n = x.size();
    double sw = 0.0, sx = 0.0, sy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double w = weights ? (*weights)[i] : 1.0;
        sw += w;
        sx += w * x[i];
        sy += w * y[i];
    }
    const double mx = sx / sw, my = sy / sw;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double w = weights ? (*weights)[i] : 1.0;
        sxx += w * (x[i] - mx) * (x[i] - mx);
        sxy += w * (x[i] - mx) * (y[i] - my);
    }
    if (!(sxx > 0.0)) throw std::invalid_argument("ols: degenerate feature (zero variance)");

    RegressionResult r;
    r.n = n;
    r.slope = sxy / sxx;
    r.intercept = my - r.slope * mx;
    double ssr = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double w = weights ? (*weights)[i] : 1.0;
        const double e = y[i] - r.intercept - r.slope * x[i];
        ssr += w * e * e;
        syy += w * (y[i] - my) * (y[i] - my);
    }
    const double dof = sw * (static_cast<double>(n) - 2.0) / static_cast<double>(n);
    const double s2 = ssr / std::max(dof, 1.0);
    r.slope_stderr = std::sqrt(s2 / sxx);
    r.intercept_stderr = std::sqrt(s2 * (1.0 / sw + mx * mx / sxx));
    r.r_squared = syy > 0.0 ? 1.0 - ssr / syy : 0.0;
    return r;
}

RegressionResult drift_regression(const PathEnsemble& M, const std::vector<double>& feature,
                                  std::size_t idx_s, std::size_t idx_t,
                                  const std::vector<double>* weights) {
    if (feature.size() != M.n_paths())
        throw std::invalid_argument("drift_regression: one feature value per path required");
    if (idx_s >= idx_t || idx_t >= M.n_times())
        throw std::invalid_argument("drift_regression: bad window indices");
    std::vector<double> dy(M.n_paths());
    for (std::size_t p = 0; p < M.n_paths(); ++p) dy[p] = M(p, idx_t) - M(p, idx_s);
    return ols(feature, dy, weights);
}

namespace {

double std_normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// Asymptotic Kolmogorov distribution tail.
double kolmogorov_p(double lambda) {
    if (lambda < 1e-8) return 1.0;
    double sum = 0.0;
    for (int k = 1; k <= 100; ++k) {
        const double term = std::exp(-2.0 * k * k * lambda * lambda);
        sum += (k % 2 == 1 ? term : -term);
        if (term < 1e-12) break;
    }
    return std::clamp(2.0 * sum, 0.0, 1.0);
}

} // namespace

double slope_p_value(const RegressionResult& r) {
    if (!(r.slope_stderr > 0.0)) return 0.0;
    const double z = std::abs(r.slope) / r.slope_stderr;
    return 2.0 * (1.0 - std_normal_cdf(z));
}

VerificationReport ks_normality(const std::vector<double>& increments, double expected_variance) {
    if (increments.size() < 100)
        throw std::invalid_argument("ks_normality: sample size must be >= 100");
    if (!(expected_variance > 0.0))
        throw std::invalid_argument("ks_normality: variance must be positive");
    std::vector<double> xs = increments;
    std::sort(xs.begin(), xs.end());
    const double sd = std::sqrt(expected_variance);
    const double n = static_cast<double>(xs.size());
    double d = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double cdf = std_normal_cdf(xs[i] / sd);
        d = std::max(d, std::abs(cdf - static_cast<double>(i) / n));
        d = std::max(d, std::abs(static_cast<double>(i + 1) / n - cdf));
    }
    const double sqrtn = std::sqrt(n);
    const double lambda = (sqrtn + 0.12 + 0.11 / sqrtn) * d;

    VerificationReport report;
    report.test = "ks-normality";
    report.statistic = d;
    report.p_value = kolmogorov_p(lambda);
    report.sample_size = xs.size();
    report.tolerance = 0.01;
    report.pass = report.p_value > report.tolerance;
    return report;
}

SlopeRecovery slope_recovery(const PathEnsemble& W, const PathEnsemble& V, double eps, double t,
                             double T_query) {
    if (!(t < T_query) || T_query > 1.0)
        throw std::invalid_argument("slope_recovery: need t < T_query <= 1");
    const TimeGrid& g = W.grid();
    auto index_of = [&](double time) {
        for (std::size_t k = 0; k < g.size(); ++k)
            if (std::abs(g[k] - time) < 1e-9) return k;
        throw std::invalid_argument("slope_recovery: time not on the grid");
    };
    const std::size_t it = index_of(t);
    const std::size_t iq = index_of(T_query);
    const std::size_t last = g.size() - 1;

    std::vector<double> x(W.n_paths()), y(W.n_paths());
    for (std::size_t p = 0; p < W.n_paths(); ++p) {
        const double xt = W(p, last) + eps * V(p, last - it);
        x[p] = xt - W(p, it);
        y[p] = W(p, iq) - W(p, it);
    }
    SlopeRecovery out;
    out.regression = ols(x, y);
    out.expected_slope = (T_query - t) / ((1.0 + eps * eps) * (1.0 - t));
    return out;
}

MeanCI mean_ci(const std::vector<double>& xs) {
    MeanCI m;
    m.n = xs.size();
    if (xs.empty()) return m;
    double sum = 0.0;
    for (double v : xs) sum += v;
    m.mean = sum / static_cast<double>(m.n);
    double ss = 0.0;
    for (double v : xs) ss += (v - m.mean) * (v - m.mean);
    const double var = m.n > 1 ? ss / static_cast<double>(m.n - 1) : 0.0;
    m.stderr_ = std::sqrt(var / static_cast<double>(m.n));
    m.halfwidth95 = 1.959963984540054 * m.stderr_;
    return m;
}

} // namespace filtlab
