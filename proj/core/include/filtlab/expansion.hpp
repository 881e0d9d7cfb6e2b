#pragma once

#include <functional>
#include <vector>

#include "filtlab/models.hpp"
#include "filtlab/sample_path.hpp"
#include "filtlab/simulate.hpp"

namespace filtlab {

// Sign convention, used by every compensator here: the stored A is such
// that M = X - A is the candidate martingale in the enlarged filtration.
// Formulas quoted with the opposite orientation are negated on entry.

/// Candidate decomposition X = M + A per path; A_0 = 0 by construction and
/// M + A = X holds exactly at every grid point.
struct Decomposition {
    SamplePath original;
    SamplePath finite_variation;
    SamplePath martingale_part;
};

struct DecompositionEnsemble {
    PathEnsemble original;
    PathEnsemble finite_variation;
    PathEnsemble martingale;
    std::string formula;
    double t_max = 0.0;
    std::size_t clip_count = 0;       // band denominators clipped at kClipLimit
    std::size_t skipped_points = 0;   // quadrature points dropped (e.g. Z = 0)
    bool order_warning = false;       // integrand outgrew the admissible order

    Decomposition path(std::size_t p) const {
        return {original.path(p), finite_variation.path(p), martingale.path(p)};
    }
};

inline constexpr double kClipLimit = 1e8;

/// Grid restricted to points <= t_max (t_max must be past the first point).
TimeGrid truncate_grid(const TimeGrid& grid, double t_max);

/// Last grid index with time <= t_max.
std::size_t truncate_index(const TimeGrid& grid, double t_max);

/// Per-path last-passage times of the levels p * eps, detected through the
/// future-infimum path and interpolated linearly inside the crossing step.
/// Levels never finally exceeded get tau = +infinity (not stored; taus holds
/// the finite prefix).
struct HonestTimeLadder {
    double eps = 0.0;
    std::vector<double> taus;  // taus[p] = last passage of level p * eps; taus[0] = 0

    std::size_t finite_levels() const { return taus.size(); }
};

HonestTimeLadder honest_time_ladder(const SamplePath& Z, const SamplePath& X, double eps);

/// Discretized compensator of the driving B under the reversed-diffusion
/// enlargement: on block [t_i, t_{i+1}) the integrand is
/// score(1 - t_i - s, X_s, X_{1 - t_i}), left-endpoint quadrature.
/// coarse is a list of fine-grid indices with times in [0, 1/2).
DecompositionEnsemble compensator_reversed_discretized(const PathEnsemble& X,
                                                       const PathEnsemble& B,
                                                       const std::vector<std::size_t>& coarse,
                                                       const TransitionDensity& density,
                                                       double t_max = 0.45);

/// Closed-form compensator: A_t = int_0^t score(1 - 2s, X_s, X_{1-s}) ds,
/// M = B - A on [0, t_max], t_max < 1/2.
DecompositionEnsemble compensator_reversed_closed(const PathEnsemble& X,
                                                  const PathEnsemble& B,
                                                  const TransitionDensity& density,
                                                  double t_max = 0.45);

/// Noisy-future-signal enlargement: X_s = W_1 + eps * V_{1-s}; decomposes
/// M = int H dW with A_t = int_0^t H_s (X_s - W_s) / ((1+eps^2)(1-s)) ds.
/// H = nullptr means H == 1 (decompose W itself).
DecompositionEnsemble compensator_noisy_future(const PathEnsemble& W, const PathEnsemble& V,
                                               double eps,
                                               const std::function<double(double)>& H,
                                               double t_max = 0.9);

/// Blockwise discretized variant: integrand on block [t_i, t_{i+1}) is
/// (X_{t_i} - W_s) / ((1 - s) + eps^2 (1 - t_i)).
DecompositionEnsemble compensator_noisy_future_discretized(const PathEnsemble& W,
                                                           const PathEnsemble& V, double eps,
                                                           const std::vector<std::size_t>& coarse,
                                                           double t_max = 0.9);

/// E(W_T | H_t) = W_t + (T - t) (X_t - W_t) / ((1 + eps^2)(1 - t)).
double conditional_exp_noisy(double W_t, double X_t, double t, double T_query, double eps);

/// Brownian-bridge conditional mean between (T0, x) and (T1, y).
double bridge_conditional_mean(double x, double y, double T0, double T1, double t);

/// E(B_{1/2} - B_s | G_s) = (B_{1-s} - B_s) / 2 for the reversed enlargement.
double remaining_bridge_drift(double B_s, double B_rev_s);

/// Pitman decomposition for Bessel 3: B = Z - Z_0 - int ds/Z,
/// A = 2X - int ds/Z (normalized to A_0 = 0), M = B - A.
DecompositionEnsemble compensator_pitman(const PathEnsemble& Z, const PathEnsemble& X);

/// Honest-time ladder compensator for Bessel 3:
/// A^n_t = int_0^t ds/Z_s
///       - sum_p int_0^t 1{tau_p < s} 1{(p+1) eps >= Z_s} ds / (Z_s - p eps).
DecompositionEnsemble compensator_honest_bessel(const PathEnsemble& Z, const PathEnsemble& X,
                                                double eps);

/// General transient-diffusion honest-time compensator, with M_s = -s(R_s)
/// and the d<N,M> density supplied along the path. dNM = nullptr selects the
/// Bessel-3 default d<N,M>_s/ds = -1/R_s^2 (with N = B reconstructed as
/// R - R_0 - int ds/R when original is not supplied).
DecompositionEnsemble compensator_honest_transient(const PathEnsemble& R, const PathEnsemble& X,
                                                   const ScaleFunction& scale,
                                                   const std::function<double(double, double)>& dNM,
                                                   double eps,
                                                   const PathEnsemble* original = nullptr);

} // namespace filtlab
