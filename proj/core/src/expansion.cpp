#include "filtlab/expansion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "filtlab/parallel.hpp"

namespace filtlab {

namespace {

constexpr double kGridTol = 1e-12;

void require_unit_reversible(const TimeGrid& grid, const char* who) {
    if (std::abs(grid.horizon() - 1.0) > kGridTol || !grid.is_reversible())
        throw std::invalid_argument(std::string(who) + ": grid must be reversible on [0, 1]");
}

void require_same_shape(const PathEnsemble& a, const PathEnsemble& b, const char* who) {
    if (!(a.grid() == b.grid()) || a.n_paths() != b.n_paths())
        throw std::invalid_argument(std::string(who) + ": ensembles must share grid and path count");
}

std::vector<std::size_t> validate_coarse(const TimeGrid& grid,
                                         const std::vector<std::size_t>& coarse,
                                         double pole, const char* who) {
    if (coarse.empty() || coarse.front() != 0)
        throw std::invalid_argument(std::string(who) + ": coarse points must start at index 0");
    for (std::size_t k = 0; k < coarse.size(); ++k) {
        if (k > 0 && coarse[k] <= coarse[k - 1])
            throw std::invalid_argument(std::string(who) + ": coarse indices must increase");
        if (coarse[k] >= grid.size() || !(grid[coarse[k]] < pole))
            throw std::invalid_argument(std::string(who) + ": coarse point at or past the pole");
    }
    return coarse;
}

DecompositionEnsemble make_empty(const TimeGrid& grid, std::size_t n_paths, std::uint64_t seed,
                                 const std::string& scheme, std::string formula, double t_max) {
    DecompositionEnsemble d{PathEnsemble(grid, n_paths, seed, scheme),
                            PathEnsemble(grid, n_paths, seed, scheme),
                            PathEnsemble(grid, n_paths, seed, scheme),
                            std::move(formula),
                            t_max};
    return d;
}

void finish_martingale(DecompositionEnsemble& d) {
    const std::size_t m = d.original.n_times();
    parallel_for(d.original.n_paths(), [&](std::size_t p) {
        const double* x = d.original.row(p);
        const double* a = d.finite_variation.row(p);
        double* mart = d.martingale.row(p);
        for (std::size_t k = 0; k < m; ++k) mart[k] = x[k] - a[k];
    });
}

} // namespace

std::size_t truncate_index(const TimeGrid& grid, double t_max) {
    std::size_t idx = 0;
    while (idx + 1 < grid.size() && grid[idx + 1] <= t_max + kGridTol) ++idx;
    return idx;
}

TimeGrid truncate_grid(const TimeGrid& grid, double t_max) {
    const std::size_t idx = truncate_index(grid, t_max);
    if (idx == 0) throw std::invalid_argument("truncate_grid: t_max below the first step");
    std::vector<double> t(grid.times().begin(), grid.times().begin() + idx + 1);
    return TimeGrid(std::move(t));
}

DecompositionEnsemble compensator_reversed_discretized(const PathEnsemble& X,
                                                       const PathEnsemble& B,
                                                       const std::vector<std::size_t>& coarse,
                                                       const TransitionDensity& density,
                                                       double t_max) {
    require_unit_reversible(X.grid(), "compensator_reversed_discretized");
    require_same_shape(X, B, "compensator_reversed_discretized");
    if (!(t_max < 0.5))
        throw std::invalid_argument("compensator_reversed_discretized: t_max must be < 1/2");
    validate_coarse(X.grid(), coarse, 0.5, "compensator_reversed_discretized");

    const TimeGrid& g = X.grid();
    const std::size_t last = g.size() - 1;
    const std::size_t m_t = truncate_index(g, t_max);
    TimeGrid gt = truncate_grid(g, t_max);

    auto d = make_empty(gt, X.n_paths(), X.seed(), X.stream_scheme(),
                        "reversed-discretized[" + density.name + "]", t_max);
    parallel_for(X.n_paths(), [&](std::size_t p) {
        const double* x = X.row(p);
        const double* b = B.row(p);
        double* orig = d.original.row(p);
        double* a = d.finite_variation.row(p);
        a[0] = 0.0;
        std::size_t block = 0;
        for (std::size_t k = 0; k < m_t; ++k) {
            while (block + 1 < coarse.size() && coarse[block + 1] <= k) ++block;
            const std::size_t ci = coarse[block];
            const double ti = g[ci];
            const double integrand = density.score_x(1.0 - ti - g[k], x[k], x[last - ci]);
            a[k + 1] = a[k] + g.step(k) * integrand;
        }
        for (std::size_t k = 0; k <= m_t; ++k) orig[k] = b[k];
    });
    finish_martingale(d);
    return d;
}

DecompositionEnsemble compensator_reversed_closed(const PathEnsemble& X, const PathEnsemble& B,
                                                  const TransitionDensity& density, double t_max) {
    require_unit_reversible(X.grid(), "compensator_reversed_closed");
    require_same_shape(X, B, "compensator_reversed_closed");
    if (!(t_max < 0.5))
        throw std::invalid_argument("compensator_reversed_closed: t_max must be < 1/2");

    const TimeGrid& g = X.grid();
    const std::size_t last = g.size() - 1;
    const std::size_t m_t = truncate_index(g, t_max);
    TimeGrid gt = truncate_grid(g, t_max);

    auto d = make_empty(gt, X.n_paths(), X.seed(), X.stream_scheme(),
                        "reversed-closed[" + density.name + "]", t_max);
    parallel_for(X.n_paths(), [&](std::size_t p) {
        const double* x = X.row(p);
        const double* b = B.row(p);
        double* orig = d.original.row(p);
        double* a = d.finite_variation.row(p);
        a[0] = 0.0;
        for (std::size_t k = 0; k < m_t; ++k) {
            const double integrand = density.score_x(1.0 - 2.0 * g[k], x[k], x[last - k]);
            a[k + 1] = a[k] + g.step(k) * integrand;
        }
        for (std::size_t k = 0; k <= m_t; ++k) orig[k] = b[k];
    });
    finish_martingale(d);
    return d;
}

DecompositionEnsemble compensator_noisy_future(const PathEnsemble& W, const PathEnsemble& V,
                                               double eps,
                                               const std::function<double(double)>& H,
                                               double t_max) {
    require_unit_reversible(W.grid(), "compensator_noisy_future");
    require_same_shape(W, V, "compensator_noisy_future");
    if (!(t_max < 1.0))
        throw std::invalid_argument("compensator_noisy_future: t_max must be < 1");
    if (eps < 0.0) throw std::invalid_argument("compensator_noisy_future: eps must be >= 0");

    const TimeGrid& g = W.grid();
    const std::size_t last = g.size() - 1;
    const std::size_t m_t = truncate_index(g, t_max);
    TimeGrid gt = truncate_grid(g, t_max);
    const double denom_scale = 1.0 + eps * eps;

    auto d = make_empty(gt, W.n_paths(), W.seed(), W.stream_scheme(), "noisy-future", t_max);

    if (H) {
        // Admissible growth is |H_s| ~ (1-s)^{-beta} with beta < 1; estimate
        // beta from the two last evaluation points and flag the boundary.
        const double ta = g[m_t >= 2 ? m_t - 2 : 0];
        const double tb = g[m_t - 1];
        const double ha = std::abs(H(ta));
        const double hb = std::abs(H(tb));
        if (!std::isfinite(ha) || !std::isfinite(hb)) {
            d.order_warning = true;
        } else if (ha > 0.0 && hb > 0.0 && tb > ta) {
            const double beta = std::log(hb / ha) / std::log((1.0 - ta) / (1.0 - tb));
            if (beta >= 1.0 - 1e-9) d.order_warning = true;
        }
    }

    parallel_for(W.n_paths(), [&](std::size_t p) {
        const double* w = W.row(p);
        const double* v = V.row(p);
        const double w1 = w[last];
        double* orig = d.original.row(p);
        double* a = d.finite_variation.row(p);
        orig[0] = 0.0;
        a[0] = 0.0;
        for (std::size_t k = 0; k < m_t; ++k) {
            const double t = g[k];
            const double hk = H ? H(t) : 1.0;
            if (!std::isfinite(hk))
                throw std::invalid_argument("compensator_noisy_future: non-finite integrand H");
            const double x_k = w1 + eps * v[last - k];
            orig[k + 1] = orig[k] + hk * (w[k + 1] - w[k]);
            a[k + 1] = a[k] + g.step(k) * hk * (x_k - w[k]) / (denom_scale * (1.0 - t));
        }
    });
    finish_martingale(d);
    return d;
}

DecompositionEnsemble compensator_noisy_future_discretized(const PathEnsemble& W,
                                                           const PathEnsemble& V, double eps,
                                                           const std::vector<std::size_t>& coarse,
                                                           double t_max) {
    require_unit_reversible(W.grid(), "compensator_noisy_future_discretized");
    require_same_shape(W, V, "compensator_noisy_future_discretized");
    if (!(t_max < 1.0))
        throw std::invalid_argument("compensator_noisy_future_discretized: t_max must be < 1");
    if (eps < 0.0)
        throw std::invalid_argument("compensator_noisy_future_discretized: eps must be >= 0");
    validate_coarse(W.grid(), coarse, 1.0, "compensator_noisy_future_discretized");

    const TimeGrid& g = W.grid();
    const std::size_t last = g.size() - 1;
    const std::size_t m_t = truncate_index(g, t_max);
    TimeGrid gt = truncate_grid(g, t_max);
    const double eps2 = eps * eps;

    auto d = make_empty(gt, W.n_paths(), W.seed(), W.stream_scheme(),
                        "noisy-future-discretized", t_max);
    parallel_for(W.n_paths(), [&](std::size_t p) {
        const double* w = W.row(p);
        const double* v = V.row(p);
        const double w1 = w[last];
        double* orig = d.original.row(p);
        double* a = d.finite_variation.row(p);
        a[0] = 0.0;
        std::size_t block = 0;
        for (std::size_t k = 0; k < m_t; ++k) {
            while (block + 1 < coarse.size() && coarse[block + 1] <= k) ++block;
            const std::size_t ci = coarse[block];
            const double ti = g[ci];
            const double x_ti = w1 + eps * v[last - ci];
            const double integrand = (x_ti - w[k]) / ((1.0 - g[k]) + eps2 * (1.0 - ti));
            a[k + 1] = a[k] + g.step(k) * integrand;
        }
        for (std::size_t k = 0; k <= m_t; ++k) orig[k] = w[k];
    });
    finish_martingale(d);
    return d;
}

double conditional_exp_noisy(double W_t, double X_t, double t, double T_query, double eps) {
    if (!(t < 1.0) || t < 0.0 || T_query < t || T_query > 1.0)
        throw std::invalid_argument("conditional_exp_noisy: need 0 <= t <= T <= 1, t < 1");
    return W_t + (T_query - t) / ((1.0 + eps * eps) * (1.0 - t)) * (X_t - W_t);
}

double bridge_conditional_mean(double x, double y, double T0, double T1, double t) {
    if (!(T0 < T1) || t < T0 || t > T1)
        throw std::invalid_argument("bridge_conditional_mean: t must lie in [T0, T1], T0 < T1");
    return ((T1 - t) * x + (t - T0) * y) / (T1 - T0);
}

double remaining_bridge_drift(double B_s, double B_rev_s) {
    return 0.5 * (B_rev_s - B_s);
}

DecompositionEnsemble compensator_pitman(const PathEnsemble& Z, const PathEnsemble& X) {
    require_same_shape(Z, X, "compensator_pitman");
    const TimeGrid& g = Z.grid();
    const std::size_t m = g.size();

    auto d = make_empty(g, Z.n_paths(), Z.seed(), Z.stream_scheme(), "pitman", g.horizon());
    std::vector<std::size_t> skips(Z.n_paths(), 0);
    parallel_for(Z.n_paths(), [&](std::size_t p) {
        SamplePath I = reciprocal_time_integral(Z.path(p), &skips[p]);
        const double* z = Z.row(p);
        const double* x = X.row(p);
        const double x0 = x[0];
        double* orig = d.original.row(p);
        double* a = d.finite_variation.row(p);
        const double z0 = z[0];
        for (std::size_t k = 0; k < m; ++k) {
            orig[k] = z[k] - z0 - I.values[k];
            a[k] = 2.0 * x[k] - I.values[k] - 2.0 * x0;
        }
    });
    d.skipped_points = std::accumulate(skips.begin(), skips.end(), std::size_t(0));
    finish_martingale(d);
    return d;
}

HonestTimeLadder honest_time_ladder(const SamplePath& Z, const SamplePath& X, double eps) {
    if (!(eps > 0.0)) throw std::invalid_argument("honest_time_ladder: eps must be positive");
    if (Z.values.size() != X.values.size())
        throw std::invalid_argument("honest_time_ladder: Z and X must share the grid");
    HonestTimeLadder ladder;
    ladder.eps = eps;
    ladder.taus.push_back(0.0);
    const double x_end = X.values.back();
    for (std::size_t p = 1; static_cast<double>(p) * eps <= x_end; ++p) {
        const double level = static_cast<double>(p) * eps;
        // X is non-decreasing: first grid point where the future infimum has
        // reached the level marks the last passage of Z.
        auto it = std::lower_bound(X.values.begin(), X.values.end(), level);
        if (it == X.values.end()) break;
        const std::size_t k = static_cast<std::size_t>(it - X.values.begin());
        double tau = 0.0;
        if (k > 0) {
            const double z0 = Z.values[k - 1];
            const double z1 = Z.values[k];
            const double t0 = Z.grid[k - 1];
            const double t1 = Z.grid[k];
            if ((z0 - level) * (z1 - level) <= 0.0 && z1 != z0) {
                tau = t0 + (t1 - t0) * (level - z0) / (z1 - z0);
                tau = std::clamp(tau, t0, t1);
            } else {
                // The passage ended between grid points (both endpoints sit
                // off the level); place tau mid-step so the indicator
                // 1{tau < s} turns on at the right endpoint, the first grid
                // point the future infimum certifies.
                tau = 0.5 * (t0 + t1);
            }
        }
        tau = std::max(tau, ladder.taus.back());
        ladder.taus.push_back(tau);
    }
    return ladder;
}

namespace {

// Shared band-sum driver for the two honest-time compensators. term(p, z)
// returns the per-level contribution at a grid point with value z.
template <typename TermFn>
double band_sum(const HonestTimeLadder& ladder, double t, double z, double eps,
                const TermFn& term, std::size_t& clips) {
    if (!(z > 0.0)) return 0.0;
    std::size_t p = 0;
    if (z > eps) p = static_cast<std::size_t>(std::ceil(z / eps - 1.0));
    double total = 0.0;
    for (; p < ladder.finite_levels(); ++p) {
        // <= so the integral over [t, t + h) counts a level whose last
        // passage closed exactly at t (in particular tau_0 = 0 at t = 0).
        if (!(ladder.taus[p] <= t)) break;
        if (!(static_cast<double>(p + 1) * eps >= z)) continue;
        double v = term(p, z);
        if (!(std::abs(v) < kClipLimit) || !std::isfinite(v)) {
            v = std::copysign(kClipLimit, std::isfinite(v) ? v : 1.0);
            ++clips;
        }
        total += v;
    }
    return total;
}

} // namespace

DecompositionEnsemble compensator_honest_bessel(const PathEnsemble& Z, const PathEnsemble& X,
                                                double eps) {
    require_same_shape(Z, X, "compensator_honest_bessel");
    if (!(eps > 0.0)) throw std::invalid_argument("compensator_honest_bessel: eps must be positive");
    const TimeGrid& g = Z.grid();
    const std::size_t m = g.size();

    auto d = make_empty(g, Z.n_paths(), Z.seed(), Z.stream_scheme(), "honest-bessel", g.horizon());
    std::vector<std::size_t> skips(Z.n_paths(), 0);
    std::vector<std::size_t> clips(Z.n_paths(), 0);
    parallel_for(Z.n_paths(), [&](std::size_t p) {
        SamplePath zp = Z.path(p);
        SamplePath I = reciprocal_time_integral(zp, &skips[p]);
        HonestTimeLadder ladder = honest_time_ladder(zp, X.path(p), eps);
        const double* z = Z.row(p);
        double* orig = d.original.row(p);
        double* a = d.finite_variation.row(p);
        a[0] = 0.0;
        double band_cum = 0.0;
        auto term = [eps](std::size_t lvl, double zz) {
            return 1.0 / (zz - static_cast<double>(lvl) * eps);
        };
        for (std::size_t k = 0; k + 1 < m; ++k) {
            band_cum += g.step(k) * band_sum(ladder, g[k], z[k], eps, term, clips[p]);
            a[k + 1] = I.values[k + 1] - band_cum;
        }
        for (std::size_t k = 0; k < m; ++k) orig[k] = z[k] - z[0] - I.values[k];
    });
    d.skipped_points = std::accumulate(skips.begin(), skips.end(), std::size_t(0));
    d.clip_count = std::accumulate(clips.begin(), clips.end(), std::size_t(0));
    finish_martingale(d);
    return d;
}

DecompositionEnsemble compensator_honest_transient(const PathEnsemble& R, const PathEnsemble& X,
                                                   const ScaleFunction& scale,
                                                   const std::function<double(double, double)>& dNM,
                                                   double eps, const PathEnsemble* original) {
    require_same_shape(R, X, "compensator_honest_transient");
    if (!(eps > 0.0))
        throw std::invalid_argument("compensator_honest_transient: eps must be positive");
    if (original) require_same_shape(R, *original, "compensator_honest_transient");
    const TimeGrid& g = R.grid();
    const std::size_t m = g.size();

    auto bracket = dNM ? dNM : std::function<double(double, double)>(
                                   [](double, double r) { return -1.0 / (r * r); });

    auto d = make_empty(g, R.n_paths(), R.seed(), R.stream_scheme(), "honest-transient",
                        g.horizon());
    std::vector<std::size_t> skips(R.n_paths(), 0);
    std::vector<std::size_t> clips(R.n_paths(), 0);
    parallel_for(R.n_paths(), [&](std::size_t p) {
        SamplePath rp = R.path(p);
        HonestTimeLadder ladder = honest_time_ladder(rp, X.path(p), eps);
        const double* r = R.row(p);

        // g_k = d<N,M>/ds / M at grid points; M = -s(R) must be positive.
        std::vector<double> gk(m, 0.0);
        for (std::size_t k = 0; k < m; ++k) {
            if (r[k] > 0.0) {
                const double msk = -scale.s(r[k]);
                const double v = bracket(g[k], r[k]) / msk;
                if (std::isfinite(v)) {
                    gk[k] = v;
                    continue;
                }
            }
            ++skips[p];
        }
        // Same quadrature as the reciprocal integral: right endpoint on the
        // first interval, trapezoid after.
        std::vector<double> term1(m, 0.0);
        if (m >= 2) {
            term1[1] = g.step(0) * gk[1];
            for (std::size_t k = 1; k + 1 < m; ++k)
                term1[k + 1] = term1[k] + g.step(k) * 0.5 * (gk[k] + gk[k + 1]);
        }

        double* orig = d.original.row(p);
        double* a = d.finite_variation.row(p);
        a[0] = 0.0;
        double band_cum = 0.0;
        for (std::size_t k = 0; k + 1 < m; ++k) {
            // The bracket density is evaluated at the left endpoint time.
            auto term_at = [&](std::size_t lvl, double rr) {
                const double sr = scale.s(rr);
                const double dnm = bracket(g[k], rr);
                if (lvl == 0) return dnm / sr;  // s(0) = -inf limit of the band factor
                const double spe = scale.s(static_cast<double>(lvl) * eps);
                return spe * dnm / ((spe - sr) * sr);
            };
            band_cum += g.step(k) * band_sum(ladder, g[k], r[k], eps, term_at, clips[p]);
            a[k + 1] = -(term1[k + 1] + band_cum);
        }

        if (original) {
            const double* n = original->row(p);
            for (std::size_t k = 0; k < m; ++k) orig[k] = n[k];
        } else {
            std::size_t dummy = 0;
            SamplePath I = reciprocal_time_integral(rp, &dummy);
            for (std::size_t k = 0; k < m; ++k) orig[k] = r[k] - r[0] - I.values[k];
        }
    });
    d.skipped_points = std::accumulate(skips.begin(), skips.end(), std::size_t(0));
    d.clip_count = std::accumulate(clips.begin(), clips.end(), std::size_t(0));
    finish_martingale(d);
    return d;
}

} // namespace filtlab
