#pragma once

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>

namespace filtlab {

/// Time-homogeneous diffusion coefficients dX = sigma(X) dB + b(X) dt.
/// Coefficients take (t, x); sigma_prime (d sigma / dx) is optional and
/// only needed by the reversed-drift formula.
struct DiffusionModel {
    std::string name;
    std::function<double(double, double)> b;
    std::function<double(double, double)> sigma;
    std::optional<std::function<double(double)>> sigma_prime;
};

/// Transition density pi(t, x, y) together with its logarithmic x-score
/// (1/pi) d pi / dx. t is elapsed time and must be positive.
struct TransitionDensity {
    std::string name;
    std::function<double(double, double, double)> pi;
    std::function<double(double, double, double)> score_x;
};

/// Nonnegative bound phi on E|score(t-s, X_s, X_t)| with finite integral
/// over (0, 1].
struct DriftBound {
    std::function<double(double)> phi;
    double integral_0_1;
};

/// Negative increasing scale function with s(x) -> -inf as x -> 0+.
struct ScaleFunction {
    std::function<double(double)> s;
    std::optional<std::function<double(double)>> s_inverse;
};

/// Standard Gaussian transition density; score_x(t, x, y) = (y - x) / t.
TransitionDensity gaussian_density();

/// Ornstein-Uhlenbeck transition density for dX = -theta X dt + sigma dB:
/// Gaussian with mean x e^{-theta t}, variance sigma^2 (1 - e^{-2 theta t}) / (2 theta).
TransitionDensity ou_density(double theta, double sigma);

/// phi(x) = sqrt(2/pi) / sqrt(x); integral over (0,1] = 2 sqrt(2/pi).
DriftBound brownian_phi();

/// s(x) = -1/x, the Bessel-3 scale normalized with c = 1.
ScaleFunction bessel3_scale();

/// Drift of the time-reversed diffusion: sigma'(x) sigma(x) + b(x).
double reversed_drift(const DiffusionModel& model, double x);

DiffusionModel brownian_model();
DiffusionModel ou_model(double theta, double sigma);
DiffusionModel constant_model(double b, double sigma);

/// Parses registry names: "bm", "ou(theta,sigma)", "const(b,sigma)".
DiffusionModel model_from_name(const std::string& name);

/// Parses density names: "bm" (Gaussian), "ou(theta,sigma)".
TransitionDensity density_from_name(const std::string& name);

} // namespace filtlab
