#include "filtlab/models.hpp"

#include <cmath>
#include <cstdio>

namespace filtlab {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

void require_positive_time(double t) {
    if (!(t > 0.0)) throw std::invalid_argument("elapsed time must be positive");
}

} // namespace

TransitionDensity gaussian_density() {
    TransitionDensity d;
    d.name = "bm";
    d.pi = [](double t, double x, double y) {
        require_positive_time(t);
        const double z = y - x;
        return std::exp(-z * z / (2.0 * t)) / std::sqrt(kTwoPi * t);
    };
    d.score_x = [](double t, double x, double y) {
        require_positive_time(t);
        return (y - x) / t;
    };
    return d;
}

TransitionDensity ou_density(double theta, double sigma) {
    if (!(theta > 0.0) || !(sigma > 0.0))
        throw std::invalid_argument("ou_density: theta and sigma must be positive");
    TransitionDensity d;
    char buf[64];
    std::snprintf(buf, sizeof(buf), "ou(%g,%g)", theta, sigma);
    d.name = buf;
    auto variance = [theta, sigma](double t) {
        return sigma * sigma * (1.0 - std::exp(-2.0 * theta * t)) / (2.0 * theta);
    };
    d.pi = [variance, theta](double t, double x, double y) {
        require_positive_time(t);
        const double v = variance(t);
        const double z = y - x * std::exp(-theta * t);
        return std::exp(-z * z / (2.0 * v)) / std::sqrt(kTwoPi * v);
    };
    d.score_x = [variance, theta](double t, double x, double y) {
        require_positive_time(t);
        const double decay = std::exp(-theta * t);
        return decay * (y - x * decay) / variance(t);
    };
    return d;
}

DriftBound brownian_phi() {
    const double c = std::sqrt(2.0 / M_PI);
    DriftBound b;
    b.phi = [c](double x) {
        if (!(x > 0.0)) throw std::invalid_argument("phi: argument must be positive");
        return c / std::sqrt(x);
    };
    b.integral_0_1 = 2.0 * c;
    return b;
}

ScaleFunction bessel3_scale() {
    ScaleFunction sf;
    sf.s = [](double x) {
        if (!(x > 0.0)) throw std::invalid_argument("scale: argument must be positive");
        return -1.0 / x;
    };
    sf.s_inverse = [](double y) {
        if (!(y < 0.0)) throw std::invalid_argument("scale inverse: argument must be negative");
        return -1.0 / y;
    };
    return sf;
}

double reversed_drift(const DiffusionModel& model, double x) {
    if (!model.sigma_prime)
        throw std::runtime_error("reversed_drift: model has no sigma_prime");
    return (*model.sigma_prime)(x) * model.sigma(0.0, x) + model.b(0.0, x);
}

DiffusionModel brownian_model() {
    DiffusionModel m;
    m.name = "bm";
    m.b = [](double, double) { return 0.0; };
    m.sigma = [](double, double) { return 1.0; };
    m.sigma_prime = [](double) { return 0.0; };
    return m;
}

DiffusionModel ou_model(double theta, double sigma) {
    if (!(theta > 0.0) || !(sigma > 0.0))
        throw std::invalid_argument("ou_model: theta and sigma must be positive");
    DiffusionModel m;
    char buf[64];
    std::snprintf(buf, sizeof(buf), "ou(%g,%g)", theta, sigma);
    m.name = buf;
    m.b = [theta](double, double x) { return -theta * x; };
    m.sigma = [sigma](double, double) { return sigma; };
    m.sigma_prime = [](double) { return 0.0; };
    return m;
}

DiffusionModel constant_model(double b, double sigma) {
    DiffusionModel m;
    char buf[64];
    std::snprintf(buf, sizeof(buf), "const(%g,%g)", b, sigma);
    m.name = buf;
    m.b = [b](double, double) { return b; };
    m.sigma = [sigma](double, double) { return sigma; };
    m.sigma_prime = [](double) { return 0.0; };
    return m;
}

namespace {

bool parse_two_args(const std::string& name, const std::string& prefix, double& a, double& b) {
    if (name.rfind(prefix + "(", 0) != 0 || name.back() != ')') return false;
    const std::string inner = name.substr(prefix.size() + 1, name.size() - prefix.size() - 2);
    const auto comma = inner.find(',');
    if (comma == std::string::npos) return false;
    try {
        a = std::stod(inner.substr(0, comma));
        b = std::stod(inner.substr(comma + 1));
    } catch (const std::exception&) {
        return false;
    }
    return true;
}

} // namespace

DiffusionModel model_from_name(const std::string& name) {
    if (name == "bm") return brownian_model();
    double a = 0.0, b = 0.0;
    if (parse_two_args(name, "ou", a, b)) return ou_model(a, b);
    if (parse_two_args(name, "const", a, b)) return constant_model(a, b);
    throw std::invalid_argument("unknown model name: " + name);
}

TransitionDensity density_from_name(const std::string& name) {
    if (name == "bm") return gaussian_density();
    double a = 0.0, b = 0.0;
    if (parse_two_args(name, "ou", a, b)) return ou_density(a, b);
    throw std::invalid_argument("unknown density name: " + name);
}

} // namespace filtlab
