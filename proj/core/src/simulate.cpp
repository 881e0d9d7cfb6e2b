#include "filtlab/simulate.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <string>

#include "filtlab/parallel.hpp"
#include "filtlab/rng.hpp"

namespace filtlab {

SimulationDiverged::SimulationDiverged(std::size_t path, double t)
    : std::runtime_error("simulation diverged on path " + std::to_string(path) +
                         " at t = " + std::to_string(t)),
      path_index(path),
      time(t) {}

PathEnsemble simulate_bm(const TimeGrid& grid, std::size_t n_paths, std::uint64_t seed) {
    PathEnsemble out(grid, n_paths, seed, kStreamScheme);
    const std::size_t m = grid.size();
    parallel_for(n_paths, [&](std::size_t p) {
        auto rng = make_path_rng(seed, StreamTag::brownian, p);
        std::normal_distribution<double> normal(0.0, 1.0);
        double* row = out.row(p);
        row[0] = 0.0;
        for (std::size_t k = 0; k + 1 < m; ++k)
            row[k + 1] = row[k] + std::sqrt(grid.step(k)) * normal(rng);
    });
    return out;
}

PathEnsemble simulate_diffusion_em(const DiffusionModel& model, const TimeGrid& grid,
                                   double x0, std::size_t n_paths, std::uint64_t seed) {
    PathEnsemble out(grid, n_paths, seed, kStreamScheme);
    const std::size_t m = grid.size();
    std::atomic<bool> failed{false};
    std::size_t fail_path = 0;
    double fail_time = 0.0;
    parallel_for(n_paths, [&](std::size_t p) {
        auto rng = make_path_rng(seed, StreamTag::brownian, p);
        std::normal_distribution<double> normal(0.0, 1.0);
        double* row = out.row(p);
        row[0] = x0;
        for (std::size_t k = 0; k + 1 < m; ++k) {
            const double t = grid[k];
            const double h = grid.step(k);
            const double db = std::sqrt(h) * normal(rng);
            const double drift = model.b(t, row[k]) * h;
            const double diff = model.sigma(t, row[k]) * db;
            row[k + 1] = row[k] + drift + diff;
            if (!std::isfinite(row[k + 1])) {
                bool expected = false;
                if (failed.compare_exchange_strong(expected, true)) {
                    fail_path = p;
                    fail_time = grid[k + 1];
                }
                return;
            }
        }
    });
    if (failed) throw SimulationDiverged(fail_path, fail_time);
    return out;
}

PathEnsemble simulate_bessel3(const TimeGrid& grid, std::size_t n_paths, std::uint64_t seed) {
    PathEnsemble out(grid, n_paths, seed, kStreamScheme);
    const std::size_t m = grid.size();
    parallel_for(n_paths, [&](std::size_t p) {
        auto rng = make_path_rng(seed, StreamTag::bessel3, p);
        std::normal_distribution<double> normal(0.0, 1.0);
        double* row = out.row(p);
        double w1 = 0.0, w2 = 0.0, w3 = 0.0;
        row[0] = 0.0;
        for (std::size_t k = 0; k + 1 < m; ++k) {
            const double sh = std::sqrt(grid.step(k));
            w1 += sh * normal(rng);
            w2 += sh * normal(rng);
            w3 += sh * normal(rng);
            row[k + 1] = std::sqrt(w1 * w1 + w2 * w2 + w3 * w3);
        }
    });
    return out;
}

SamplePath reverse_path(const SamplePath& path, double T) {
    if (std::abs(path.grid.horizon() - T) > 1e-12 || !path.grid.is_reversible())
        throw std::invalid_argument("reverse_path: grid not symmetric under t -> T - t");
    std::vector<double> v(path.values.rbegin(), path.values.rend());
    return SamplePath(path.grid, std::move(v));
}

PathEnsemble reverse_ensemble(const PathEnsemble& paths) {
    if (!paths.grid().is_reversible())
        throw std::invalid_argument("reverse_ensemble: grid not symmetric under t -> T - t");
    PathEnsemble out(paths.grid(), paths.n_paths(), paths.seed(), paths.stream_scheme());
    const std::size_t m = paths.n_times();
    parallel_for(paths.n_paths(), [&](std::size_t p) {
        const double* in = paths.row(p);
        double* row = out.row(p);
        for (std::size_t k = 0; k < m; ++k) row[k] = in[m - 1 - k];
    });
    return out;
}

SamplePath future_infimum(const SamplePath& path, TailRule tail, double tail_uniform) {
    if (path.values.empty()) throw std::invalid_argument("future_infimum: empty path");
    const std::size_t m = path.values.size();
    std::vector<double> x(m);
    double running = std::numeric_limits<double>::infinity();
    if (tail == TailRule::exact_bessel3) {
        for (double v : path.values)
            if (v < 0.0)
                throw std::invalid_argument("future_infimum: exact Bessel-3 tail needs Z >= 0");
        running = path.values.back() * tail_uniform;
    }
    for (std::size_t k = m; k-- > 0;) {
        running = std::min(running, path.values[k]);
        x[k] = running;
    }
    return SamplePath(path.grid, std::move(x));
}

PathEnsemble future_infimum_ensemble(const PathEnsemble& Z, TailRule tail, std::uint64_t seed) {
    PathEnsemble out(Z.grid(), Z.n_paths(), seed, Z.stream_scheme());
    const std::size_t m = Z.n_times();
    parallel_for(Z.n_paths(), [&](std::size_t p) {
        double running = std::numeric_limits<double>::infinity();
        const double* z = Z.row(p);
        if (tail == TailRule::exact_bessel3) {
            auto rng = make_path_rng(seed, StreamTag::infimum_tail, p);
            std::uniform_real_distribution<double> unif(0.0, 1.0);
            running = z[m - 1] * unif(rng);
        }
        double* row = out.row(p);
        for (std::size_t k = m; k-- > 0;) {
            running = std::min(running, z[k]);
            row[k] = running;
        }
    });
    return out;
}

PathEnsemble future_infimum_bridge_ensemble(const PathEnsemble& Z, TailRule tail,
                                            std::uint64_t seed) {
    PathEnsemble out(Z.grid(), Z.n_paths(), seed, Z.stream_scheme());
    const TimeGrid& g = Z.grid();
    const std::size_t m = Z.n_times();
    parallel_for(Z.n_paths(), [&](std::size_t p) {
        double running = std::numeric_limits<double>::infinity();
        const double* z = Z.row(p);
        if (tail == TailRule::exact_bessel3) {
            for (std::size_t k = 0; k < m; ++k)
                if (z[k] < 0.0)
                    throw std::invalid_argument(
                        "future_infimum_bridge_ensemble: exact Bessel-3 tail needs Z >= 0");
            auto tail_rng = make_path_rng(seed, StreamTag::infimum_tail, p);
            std::uniform_real_distribution<double> unif(0.0, 1.0);
            running = z[m - 1] * unif(tail_rng);
        }
        // Step minimum between endpoints a, b over variance h. The radial
        // bridge is a Brownian bridge conditioned to stay positive, so the
        // Brownian min CDF exp(-2(a-x)(b-x)/h) is restricted to (q0, 1) with
        // q0 = exp(-2ab/h) before inverting:
        // min = (a + b - sqrt((a - b)^2 - 2 h ln w)) / 2, w = q0 + U (1 - q0).
        auto rng = make_path_rng(seed, StreamTag::aux_noise, p);
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        std::vector<double> step_min(m > 0 ? m - 1 : 0);
        for (std::size_t k = 0; k + 1 < m; ++k) {
            const double a = z[k], b = z[k + 1];
            const double h = g.step(k);
            const double q0 = std::exp(-2.0 * a * b / h);
            const double w = std::max(q0 + unif(rng) * (1.0 - q0), 1e-300);
            const double disc = (a - b) * (a - b) - 2.0 * h * std::log(w);
            step_min[k] = std::max(0.5 * (a + b - std::sqrt(disc)), 0.0);
        }
        double* row = out.row(p);
        if (m > 0) row[m - 1] = std::min(running, z[m - 1]);
        for (std::size_t k = m - 1; k-- > 0;) {
            running = std::min(running, step_min[k]);
            row[k] = std::min(running, z[k]);
        }
    });
    return out;
}

SamplePath discretize_path(const SamplePath& path, const Subdivision& sub) {
    if (sub.fine_size() != path.grid.size())
        throw std::invalid_argument("discretize_path: subdivision does not match grid");
    const std::size_t m = path.values.size();
    std::vector<double> v(m);
    for (std::size_t i = 0; i < m; ++i) v[i] = path.values[sub[sub.block_of(i)]];
    return SamplePath(path.grid, std::move(v));
}

SamplePath reciprocal_time_integral(const SamplePath& Z, std::size_t* skipped) {
    const std::size_t m = Z.values.size();
    std::vector<double> out(m, 0.0);
    std::size_t skip_count = 0;
    auto inv = [&](double z) {
        if (z > 0.0) return 1.0 / z;
        ++skip_count;
        return 0.0;
    };
    if (m >= 2) {
        // First interval: right-endpoint value stands in for the whole step
        // (Z may start at the entrance boundary 0).
        out[1] = out[0] + Z.grid.step(0) * inv(Z.values[1]);
        for (std::size_t k = 1; k + 1 < m; ++k)
            out[k + 1] = out[k] + Z.grid.step(k) * 0.5 * (inv(Z.values[k]) + inv(Z.values[k + 1]));
    }
    if (skipped) *skipped = skip_count;
    return SamplePath(Z.grid, std::move(out));
}

} // namespace filtlab
