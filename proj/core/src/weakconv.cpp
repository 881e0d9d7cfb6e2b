#include "filtlab/weakconv.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "filtlab/parallel.hpp"

namespace filtlab {

namespace {

constexpr double kTol = 1e-9;

std::size_t grid_index_of(const TimeGrid& g, double t, const char* who) {
    auto it = std::lower_bound(g.times().begin(), g.times().end(), t - kTol);
    if (it == g.times().end() || std::abs(*it - t) > kTol)
        throw std::invalid_argument(std::string(who) + ": time not on the fine grid");
    return static_cast<std::size_t>(it - g.times().begin());
}

} // namespace

double project_bm_onto_discretization(const SamplePath& B, const Subdivision& sub, double s,
                                      double t) {
    if (s > t + kTol)
        throw std::invalid_argument("project_bm_onto_discretization: need s <= t");
    const TimeGrid& g = B.grid;
    const std::size_t is = grid_index_of(g, s, "project_bm_onto_discretization");

    // Coarse points observable at time t.
    std::size_t last_known = 0;
    for (std::size_t k = 0; k < sub.size(); ++k) {
        if (g[sub[k]] <= t + kTol) last_known = k;
        else break;
    }
    const std::size_t last_idx = sub[last_known];
    if (is >= last_idx) return B.values[last_idx];  // martingale projection

    std::size_t lo = 0;
    while (lo + 1 <= last_known && sub[lo + 1] <= is) ++lo;
    const std::size_t il = sub[lo];
    const std::size_t iu = sub[lo + 1];
    if (il == is) return B.values[is];
    const double tl = g[il], tu = g[iu];
    const double w = (g[is] - tl) / (tu - tl);
    return (1.0 - w) * B.values[il] + w * B.values[iu];
}

ProjectionReport weak_convergence_rate(const PathEnsemble& B, const std::vector<double>& meshes,
                                       double s, double t) {
    const TimeGrid& g = B.grid();
    ProjectionReport report;
    report.n_paths = B.n_paths();
    const std::size_t n = B.n_paths();

    for (double h : meshes) {
        if (!(h > 0.0) || h > g.horizon())
            throw std::invalid_argument("weak_convergence_rate: bad mesh");
        // Step of this mesh containing s, projected at its midpoint.
        const double lo = std::floor(s / h + kTol) * h;
        const double hi = lo + h;
        const double mid = lo + 0.5 * h;
        if (hi > t + kTol)
            throw std::invalid_argument("weak_convergence_rate: bracketing step must end by t");
        const std::size_t i_lo = grid_index_of(g, lo, "weak_convergence_rate");
        const std::size_t i_hi = grid_index_of(g, hi, "weak_convergence_rate");
        const std::size_t i_mid = grid_index_of(g, mid, "weak_convergence_rate");

        std::vector<double> abs_err(n);
        parallel_for(n, [&](std::size_t p) {
            const double* b = B.row(p);
            const double proj = 0.5 * (b[i_lo] + b[i_hi]);
            abs_err[p] = std::abs(proj - b[i_mid]);
        });
        double sum = 0.0, sumsq = 0.0;
        for (double e : abs_err) {
            sum += e;
            sumsq += e * e;
        }
        const double mean = sum / static_cast<double>(n);
        const double var = std::max(0.0, sumsq / static_cast<double>(n) - mean * mean);
        const double se = std::sqrt(var / static_cast<double>(n));

        // Bridge residual at the midpoint is centered Gaussian with variance
        // (u-s)(s-l)/(u-l) = h/4; mean absolute value sqrt(2/pi) * sd.
        const double sd = std::sqrt((hi - mid) * (mid - lo) / (hi - lo));
        report.meshes.push_back(h);
        report.s_used.push_back(mid);
        report.empirical_error.push_back(mean);
        report.predicted_error.push_back(std::sqrt(2.0 / M_PI) * sd);
        report.ci_halfwidth.push_back(1.959963984540054 * se);
    }
    return report;
}

} // namespace filtlab
