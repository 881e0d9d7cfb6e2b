#include "filtlab/insider.hpp"

#include <atomic>
#include <cmath>
#include <stdexcept>

#include "filtlab/parallel.hpp"

namespace filtlab {

namespace {

void require_same_shape(const PathEnsemble& a, const PathEnsemble& b, const char* who) {
    if (!(a.grid() == b.grid()) || a.n_paths() != b.n_paths())
        throw std::invalid_argument(std::string(who) + ": ensembles must share grid and path count");
}

} // namespace

GirsanovDensity stochastic_exponential(const PathEnsemble& theta, const PathEnsemble& B,
                                       std::string kernel_label) {
    require_same_shape(theta, B, "stochastic_exponential");
    const TimeGrid& g = B.grid();
    const std::size_t m = g.size();
    GirsanovDensity out{PathEnsemble(g, B.n_paths(), B.seed(), B.stream_scheme()),
                        std::move(kernel_label)};
    std::atomic<bool> bad{false};
    parallel_for(B.n_paths(), [&](std::size_t p) {
        const double* th = theta.row(p);
        const double* b = B.row(p);
        double* u = out.U.row(p);
        double log_u = 0.0;
        u[0] = 1.0;
        for (std::size_t k = 0; k + 1 < m; ++k) {
            if (!std::isfinite(th[k])) {
                bad = true;
                return;
            }
            const double h = g.step(k);
            log_u += th[k] * (b[k + 1] - b[k]) - 0.5 * th[k] * th[k] * h;
            u[k + 1] = std::exp(log_u);
        }
    });
    if (bad) throw std::invalid_argument("stochastic_exponential: non-finite theta");
    return out;
}

PathEnsemble market_mpr(const DiffusionModel& model, const PathEnsemble& Z) {
    PathEnsemble H(Z.grid(), Z.n_paths(), Z.seed(), Z.stream_scheme());
    const TimeGrid& g = Z.grid();
    std::atomic<bool> bad{false};
    std::size_t bad_path = 0;
    std::size_t bad_idx = 0;
    parallel_for(Z.n_paths(), [&](std::size_t p) {
        const double* z = Z.row(p);
        double* h = H.row(p);
        for (std::size_t k = 0; k < g.size(); ++k) {
            const double sig = model.sigma(g[k], z[k]);
            if (sig == 0.0) {
                bool expected = false;
                if (bad.compare_exchange_strong(expected, true)) {
                    bad_path = p;
                    bad_idx = k;
                }
                return;
            }
            h[k] = -model.b(g[k], z[k]) / sig;
        }
    });
    if (bad)
        throw std::runtime_error("market_mpr: sigma = 0 on path " + std::to_string(bad_path) +
                                 " at t = " + std::to_string(g[bad_idx]));
    return H;
}

PathEnsemble insider_mpr(const DiffusionModel& model, const PathEnsemble& Z,
                         const PathEnsemble& W, const PathEnsemble& V, double eps) {
    require_same_shape(Z, W, "insider_mpr");
    require_same_shape(W, V, "insider_mpr");
    const TimeGrid& g = Z.grid();
    const std::size_t last = g.size() - 1;
    const bool horizon_is_one = std::abs(g.horizon() - 1.0) < 1e-12;
    const std::size_t usable = horizon_is_one ? last : g.size();
    if (usable == 0 || g[usable - 1] >= 1.0)
        throw std::invalid_argument("insider_mpr: grid must stay strictly below the pole t = 1");
    const double denom_scale = 1.0 + eps * eps;

    PathEnsemble H(g, Z.n_paths(), Z.seed(), Z.stream_scheme());
    parallel_for(Z.n_paths(), [&](std::size_t p) {
        const double* z = Z.row(p);
        const double* w = W.row(p);
        const double* v = V.row(p);
        const double w1 = w[last];
        double* h = H.row(p);
        for (std::size_t k = 0; k < usable; ++k) {
            const double t = g[k];
            const double sig = model.sigma(t, z[k]);
            if (sig == 0.0) throw std::runtime_error("insider_mpr: sigma = 0");
            const double x = w1 + eps * v[last - k];
            const double drift = model.b(t, z[k]) - sig * (x - w[k]) / (denom_scale * (1.0 - t));
            h[k] = -drift / sig;
        }
        for (std::size_t k = usable; k < g.size(); ++k) h[k] = 0.0;
    });
    return H;
}

VerificationReport novikov_estimate(const PathEnsemble& H, std::size_t idx_max) {
    const TimeGrid& g = H.grid();
    idx_max = std::min(idx_max, g.size() - 1);
    const std::size_t n = H.n_paths();
    std::vector<double> vals(n);
    std::atomic<std::size_t> overflows{0};
    parallel_for(n, [&](std::size_t p) {
        const double* h = H.row(p);
        double half_int = 0.0;
        for (std::size_t k = 0; k < idx_max; ++k)
            half_int += 0.5 * h[k] * h[k] * g.step(k);
        const double e = std::exp(half_int);
        if (!std::isfinite(e)) {
            ++overflows;
            vals[p] = 0.0;
        } else {
            vals[p] = e;
        }
    });

    const MeanCI full = mean_ci(vals);
    std::vector<double> half_sample(vals.begin(), vals.begin() + n / 2);
    const MeanCI half = mean_ci(half_sample);
    const bool growing_ci = n >= 200 && full.halfwidth95 > half.halfwidth95;

    VerificationReport report;
    report.test = "novikov";
    report.statistic = full.mean;
    report.ci_lo = full.mean - full.halfwidth95;
    report.ci_hi = full.mean + full.halfwidth95;
    report.sample_size = n;
    report.pass = overflows == 0 && !growing_ci;
    return report;
}

VerificationReport price_under_measure(const std::function<double(const double*, std::size_t)>& payoff,
                                       const GirsanovDensity& U, const PathEnsemble& paths) {
    require_same_shape(U.U, paths, "price_under_measure");
    const std::size_t n = paths.n_paths();
    const std::size_t m = paths.n_times();
    std::vector<double> vals(n);
    parallel_for(n, [&](std::size_t p) {
        vals[p] = U.U(p, m - 1) * payoff(paths.row(p), m);
    });
    const MeanCI mc = mean_ci(vals);
    VerificationReport report;
    report.test = "price[" + U.kernel + "]";
    report.statistic = mc.mean;
    report.ci_lo = mc.mean - mc.halfwidth95;
    report.ci_hi = mc.mean + mc.halfwidth95;
    report.sample_size = n;
    report.pass = std::isfinite(mc.mean);
    return report;
}

PnLReport simulate_pnl(const PathEnsemble& Z, const PathEnsemble& perceived_drift,
                       Strategy strategy, double cost, std::size_t idx_max, std::string label) {
    require_same_shape(Z, perceived_drift, "simulate_pnl");
    if (cost < 0.0) throw std::invalid_argument("simulate_pnl: cost must be >= 0");
    idx_max = std::min(idx_max, Z.n_times() - 1);
    const std::size_t n = Z.n_paths();
    std::vector<double> wealth(n);
    parallel_for(n, [&](std::size_t p) {
        const double* z = Z.row(p);
        const double* mu = perceived_drift.row(p);
        double w = 0.0;
        double prev_pos = 0.0;
        for (std::size_t k = 0; k < idx_max; ++k) {
            double pos;
            if (strategy == Strategy::sign)
                pos = mu[k] > 0.0 ? 1.0 : (mu[k] < 0.0 ? -1.0 : 0.0);
            else
                pos = mu[k];
            w += pos * (z[k + 1] - z[k]) - cost * std::abs(pos - prev_pos);
            prev_pos = pos;
        }
        wealth[p] = w;
    });
    const MeanCI mc = mean_ci(wealth);
    PnLReport report;
    report.label = std::move(label);
    report.mean = mc.mean;
    report.ci_halfwidth = mc.halfwidth95;
    report.n_paths = n;
    return report;
}

} // namespace filtlab
