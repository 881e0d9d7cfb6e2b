#pragma once

#include <string>
#include <vector>

#include "filtlab/sample_path.hpp"

namespace filtlab {

/// Quantitative outcome of one statistical check.
struct VerificationReport {
    std::string test;
    double statistic = 0.0;
    double ci_lo = 0.0;
    double ci_hi = 0.0;
    double p_value = -1.0;  // -1 when the test has no p-value
    std::size_t sample_size = 0;
    double tolerance = 0.0;
    bool pass = false;
};

struct RegressionResult {
    double slope = 0.0;
    double intercept = 0.0;
    double slope_stderr = 0.0;
    double intercept_stderr = 0.0;
    double r_squared = 0.0;
    std::size_t n = 0;
};

/// Running sum of squared increments.
SamplePath quadratic_variation(const SamplePath& path);

/// Sum of absolute increments.
double total_variation(const SamplePath& A);

/// OLS of y on x, optionally weighted (weights >= 0).
RegressionResult ols(const std::vector<double>& x, const std::vector<double>& y,
                     const std::vector<double>* weights = nullptr);

/// OLS of M_t - M_s across paths on a per-path conditioning feature;
/// the martingale hypothesis makes the slope 0.
RegressionResult drift_regression(const PathEnsemble& M, const std::vector<double>& feature,
                                  std::size_t idx_s, std::size_t idx_t,
                                  const std::vector<double>* weights = nullptr);

/// Two-sided p-value for slope = 0 under the Gaussian approximation.
double slope_p_value(const RegressionResult& r);

/// Kolmogorov-Smirnov test of the sample against N(0, expected_variance);
/// asymptotic p-value.
VerificationReport ks_normality(const std::vector<double>& increments, double expected_variance);

/// Regression of W_T - W_t on X_t - W_t across paths; the conditional-mean
/// formula predicts slope (T - t) / ((1 + eps^2)(1 - t)) and intercept 0.
struct SlopeRecovery {
    RegressionResult regression;
    double expected_slope = 0.0;
};
SlopeRecovery slope_recovery(const PathEnsemble& W, const PathEnsemble& V, double eps, double t,
                             double T_query);

/// Mean with a normal-approximation confidence interval, accumulated in
/// fixed path order.
struct MeanCI {
    double mean = 0.0;
    double stderr_ = 0.0;
    double halfwidth95 = 0.0;
    std::size_t n = 0;
};
MeanCI mean_ci(const std::vector<double>& xs);

} // namespace filtlab
