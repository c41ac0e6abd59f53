#include "cheegerlab/revolution.hpp"

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace cheegerlab::revolution {

namespace {

using boost::math::quadrature::gauss;
using boost::math::quadrature::gauss_kronrod;

constexpr double kTwoPi = 2.0 * std::numbers::pi;
const double kInvE = std::exp(-1.0);

// Quartic a + b t^2 + c t^4 with a = 11/(8e), b = -1/(2e), c = 1/(8e).
double quartic(double a) { return kInvE * (11.0 / 8.0 - 0.5 * a * a + a * a * a * a / 8.0); }
double quartic_d1(double a) { return kInvE * (-a + 0.5 * a * a * a); }
double quartic_d2(double a) { return kInvE * (-1.0 + 1.5 * a * a); }

// sqrt(1 + F'^2) - 1, evaluated without cancellation.
double arclength_excess(double t) {
    const double d = profile_d1(t);
    const double d2 = d * d;
    return d2 / (std::sqrt(1.0 + d2) + 1.0);
}

// Integral of arclength_excess over [0, x], x >= 0.
double excess_integral(double x) {
    if (x <= 0.0) return 0.0;
    double err = 0.0;
    if (x <= 1.0) return gauss_kronrod<double, 31>::integrate(arclength_excess, 0.0, x, 15, 1e-14, &err);
    const double inner = gauss_kronrod<double, 31>::integrate(arclength_excess, 0.0, 1.0, 15, 1e-14, &err);
    return inner + gauss_kronrod<double, 31>::integrate(arclength_excess, 1.0, x, 25, 1e-14, &err);
}

// Integrand in u = sqrt(t) for t >= 1: 2u e^{-u} sqrt(1 + e^{-2u}/(4u^2)), with
// e^{-shift} factored out.
double substituted(double u, double shift) {
    const double g = std::exp(-2.0 * u) / (4.0 * u * u);
    return 2.0 * u * std::exp(-(u - shift)) * std::sqrt(1.0 + g);
}

}  // namespace

double profile(double t) {
    const double a = std::abs(t);
    return a > 1.0 ? std::exp(-std::sqrt(a)) : quartic(a);
}

double profile_d1(double t) {
    const double a = std::abs(t);
    const double s = t < 0.0 ? -1.0 : 1.0;
    if (a > 1.0) {
        const double r = std::sqrt(a);
        return -s * std::exp(-r) / (2.0 * r);
    }
    return s * quartic_d1(a);
}

double profile_d2(double t) {
    const double a = std::abs(t);
    if (a > 1.0) {
        const double r = std::sqrt(a);
        return std::exp(-r) * (1.0 / (4.0 * a) + 1.0 / (4.0 * a * r));
    }
    return quartic_d2(a);
}

double arclength_element(double t) { return 1.0 + arclength_excess(t); }

double gaussian_curvature(double t) {
    const double d = profile_d1(t);
    return -profile_d2(t) / (profile(t) * std::sqrt(1.0 + d * d));
}

double discrete_gaussian_curvature(double t, double step) {
    const double d2 = (profile(t + step) - 2.0 * profile(t) + profile(t - step)) / (step * step);
    const double d = profile_d1(t);
    return -d2 / (profile(t) * std::sqrt(1.0 + d * d));
}

double area_density(double t) { return kTwoPi * profile(t) * arclength_element(t); }

double arclength(double t) {
    const double a = std::abs(t);
    const double r = a + excess_integral(a);
    return t < 0.0 ? -r : r;
}

double arclength_inverse(double r) {
    if (r < 0.0) throw std::invalid_argument("arclength_inverse requires r >= 0");
    // r = x + D(x) with 0 <= D' < 1, so Newton from x = r decreases monotonically.
    double x = r;
    for (int iter = 0; iter < 60; ++iter) {
        const double f = x + excess_integral(x) - r;
        const double next = x - f / arclength_element(x);
        if (std::abs(next - x) <= 1e-14 * (1.0 + r)) return next;
        x = next;
    }
    return x;
}

double tail_area(double x) {
    if (x < 0.0) throw std::invalid_argument("tail_area requires x >= 0");
    double err = 0.0;
    double core = 0.0;
    if (x < 1.0) core = gauss_kronrod<double, 31>::integrate(area_density, x, 1.0, 15, 1e-14, &err);
    const double a = std::max(1.0, std::sqrt(std::max(x, 1.0)));
    boost::math::quadrature::exp_sinh<double> integrator;
    const double scaled = integrator.integrate([a](double s) { return substituted(a + s, a); }, 0.0,
                                               std::numeric_limits<double>::infinity(), 1e-14);
    // Both tails.
    return 2.0 * (core + kTwoPi * std::exp(-a) * scaled);
}

VolumeCertificate total_area() {
    double err = 0.0;
    // Route 1: Gauss-Kronrod on the core, exp-sinh on the tail in t.
    const double core = gauss_kronrod<double, 61>::integrate(area_density, 0.0, 1.0, 15, 1e-15, &err);
    boost::math::quadrature::exp_sinh<double> integrator;
    const double tail_t = integrator.integrate(area_density, 1.0, std::numeric_limits<double>::infinity(), 1e-14);
    const double volume = 2.0 * (core + tail_t);

    // Route 2: fixed Gauss-Legendre on the core, u = sqrt(t) on the tail with
    // the cut-off doubled until the increment vanishes.
    double core2 = 0.0;
    for (int k = 0; k < 16; ++k) {
        const double a = k / 16.0;
        core2 += gauss<double, 20>::integrate(area_density, a, a + 1.0 / 16.0);
    }
    double tail_u = 0.0;
    double lo = 1.0;
    for (double hi = 2.0; hi <= 4096.0; hi *= 2.0) {
        const double piece =
            gauss_kronrod<double, 31>::integrate([](double u) { return substituted(u, 0.0); }, lo, hi, 20, 1e-15, &err);
        tail_u += piece;
        lo = hi;
        if (piece < 1e-17 * tail_u) break;
    }
    const double alternate = 2.0 * (core2 + kTwoPi * tail_u);
    VolumeCertificate out{volume, alternate, std::abs(volume - alternate) / volume, false};
    out.converged = out.relative_gap <= 1e-7;
    return out;
}

double truncated_area(double T) {
    if (!(T > 0.0)) throw std::invalid_argument("truncated_area requires T > 0");
    return total_area().volume - (T > 0.0 ? tail_area(T) : 0.0);
}

}  // namespace cheegerlab::revolution
