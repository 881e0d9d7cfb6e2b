#pragma once

#include <functional>
#include <string>

#include "filtlab/models.hpp"
#include "filtlab/sample_path.hpp"
#include "filtlab/stats.hpp"

namespace filtlab {

/// Stochastic-exponential density process per path; U_0 = 1, U > 0.
struct GirsanovDensity {
    PathEnsemble U;
    std::string kernel;
};

struct PnLReport {
    std::string label;
    double mean = 0.0;
    double ci_halfwidth = 0.0;
    std::size_t n_paths = 0;
};

enum class Strategy { sign, proportional };

/// U_t = exp( sum theta_s dB_s - 1/2 sum theta_s^2 ds ) with left-endpoint
/// theta (predictable convention). theta shares B's grid; its last column is
/// unused.
GirsanovDensity stochastic_exponential(const PathEnsemble& theta, const PathEnsemble& B,
                                       std::string kernel_label = "custom");

/// Market price of risk -b/sigma along the paths.
PathEnsemble market_mpr(const DiffusionModel& model, const PathEnsemble& Z);

/// Insider market price of risk
/// H_s = -( b(s,Z_s) - sigma(s,Z_s) (X_s - W_s) / ((1+eps^2)(1-s)) ) / sigma(s,Z_s),
/// with the signal X_s = W_1 + eps V_{1-s}. The grid's last usable time must
/// stay strictly below 1; values at t = 1 are not produced (idx range ends
/// one point early when the horizon is 1).
PathEnsemble insider_mpr(const DiffusionModel& model, const PathEnsemble& Z,
                         const PathEnsemble& W, const PathEnsemble& V, double eps);

/// Monte Carlo estimate of Novikov's quantity E[exp(1/2 int H^2 ds)] up to
/// idx_max; overflow events and a growing confidence interval trip the
/// finiteness warning (pass = false).
VerificationReport novikov_estimate(const PathEnsemble& H, std::size_t idx_max);

/// Importance-sampling price E_P[U_T payoff(path)] with confidence interval.
VerificationReport price_under_measure(const std::function<double(const double*, std::size_t)>& payoff,
                                       const GirsanovDensity& U, const PathEnsemble& paths);

/// Self-financing wealth sum pos_s dZ - cost * turnover, positions from the
/// perceived drift (sign or proportional), trading up to grid index idx_max.
PnLReport simulate_pnl(const PathEnsemble& Z, const PathEnsemble& perceived_drift,
                       Strategy strategy, double cost, std::size_t idx_max, std::string label);

} // namespace filtlab
