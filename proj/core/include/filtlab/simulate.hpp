#pragma once

#include <cstdint>
#include <stdexcept>

#include "filtlab/models.hpp"
#include "filtlab/sample_path.hpp"

namespace filtlab {

/// Coefficient evaluation produced a non-finite value.
class SimulationDiverged : public std::runtime_error {
public:
    SimulationDiverged(std::size_t path, double time);
    std::size_t path_index;
    double time;
};

/// Standard Brownian ensemble: B_0 = 0, independent N(0, h) increments.
PathEnsemble simulate_bm(const TimeGrid& grid, std::size_t n_paths, std::uint64_t seed);

/// Euler-Maruyama paths of dX = sigma(t, X) dB + b(t, X) dt. The driving
/// Brownian ensemble is simulate_bm(grid, n_paths, seed): both consume the
/// same per-path stream, so (B, X) pairs are coupled bitwise.
PathEnsemble simulate_diffusion_em(const DiffusionModel& model, const TimeGrid& grid,
                                   double x0, std::size_t n_paths, std::uint64_t seed);

/// Bessel-3 from the origin, generated exactly as the norm of a
/// 3-dimensional Brownian motion at the grid times.
PathEnsemble simulate_bessel3(const TimeGrid& grid, std::size_t n_paths, std::uint64_t seed);

/// Output value at t_i is the input value at T - t_i; the grid must be
/// symmetric under t -> T - t.
SamplePath reverse_path(const SamplePath& path, double T);
PathEnsemble reverse_ensemble(const PathEnsemble& paths);

enum class TailRule {
    none,            // only the observed window contributes
    exact_bessel3,   // beyond-horizon infimum drawn as Z_T * U, U ~ Uniform(0,1)
};

/// Running future minimum X_t = min over grid points s >= t of Z_s, capped
/// by the tail draw when tail == exact_bessel3 (tail_uniform in (0,1)).
SamplePath future_infimum(const SamplePath& path, TailRule tail, double tail_uniform = 0.0);

/// Ensemble version; tail uniforms come from the (seed, infimum_tail, path) streams.
PathEnsemble future_infimum_ensemble(const PathEnsemble& Z, TailRule tail, std::uint64_t seed);

/// Sub-step refinement of the future infimum: within each grid step a
/// Brownian-bridge minimum between the endpoint values is sampled (from the
/// (seed, aux_noise, path) streams), so level crossings between grid points
/// are not missed. The tail draw matches future_infimum_ensemble. Values are
/// floored at 0, the Bessel-3 entrance boundary.
PathEnsemble future_infimum_bridge_ensemble(const PathEnsemble& Z, TailRule tail,
                                            std::uint64_t seed);

/// Piecewise-constant path on the fine grid: value at t is the value at the
/// largest coarse point <= t.
SamplePath discretize_path(const SamplePath& path, const Subdivision& sub);

/// Left-point/trapezoid quadrature of int_0^t ds / Z_s along a nonnegative
/// path: trapezoid from the second grid point, first interval estimated with
/// Z at its right endpoint. Non-positive values are skipped and counted.
SamplePath reciprocal_time_integral(const SamplePath& Z, std::size_t* skipped = nullptr);

} // namespace filtlab
