#include "cheegerlab/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace cheegerlab::kernels {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kSqrt2 = std::numbers::sqrt2;
constexpr double kSeriesSwitch = 1e-8;

void require_finite(double v, const char* what) {
    if (!std::isfinite(v)) {
        throw std::invalid_argument(std::string(what) + " must be finite");
    }
}

double std_density(double y) { return std::exp(-0.5 * y * y) / std::sqrt(2.0 * kPi); }

double std_cdf(double y) { return 0.5 * std::erfc(-y / kSqrt2); }

// Solves Phi(y) = u for u in (0, 1/2]; the root is <= 0. Newton on
// log Phi, which is concave, with a bisection fallback on [lo, 0].
double std_lower_quantile(double u) {
    if (u == 0.5) return 0.0;
    const double log_u = std::log(u);
    double lo = -38.5;
    double hi = 0.0;
    double y = std::max(lo, -std::sqrt(-2.0 * log_u));
    for (int iter = 0; iter < 200; ++iter) {
        const double cdf = std_cdf(y);
        const double g = std::log(cdf) - log_u;
        if (g > 0.0) {
            hi = y;
        } else {
            lo = y;
        }
        const double slope = std_density(y) / cdf;
        double next = y - g / slope;
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        const double step = std::abs(next - y);
        y = next;
        if (step <= 1e-15 * (1.0 + std::abs(y)) || hi - lo <= 1e-15 * (1.0 + std::abs(y))) break;
    }
    return y;
}

double golden_max(double lo, double hi, double lambda1, double K, double rel_width, double* arg) {
    // Works in log t so the relative width criterion is a plain interval width.
    constexpr double inv_phi = 0.6180339887498949;
    double a = std::log(lo);
    double b = std::log(hi);
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = buser_ratio(lambda1, K, std::exp(c));
    double fd = buser_ratio(lambda1, K, std::exp(d));
    while (b - a > rel_width) {
        if (fc >= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = buser_ratio(lambda1, K, std::exp(c));
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = buser_ratio(lambda1, K, std::exp(d));
        }
    }
    const double mid = 0.5 * (a + b);
    const double fm = buser_ratio(lambda1, K, std::exp(mid));
    *arg = std::exp(mid);
    return fm;
}

}  // namespace

double eval_J(double K, double t) {
    require_finite(K, "K");
    require_finite(t, "t");
    if (!(t > 0.0)) throw std::invalid_argument("eval_J requires t > 0");

    const double x = K * t;
    if (std::abs(x) < kSeriesSwitch) {
        // Common expansion of the three branches: 1 - x/6 + x^2/120.
        return 2.0 / std::sqrt(kPi) * std::sqrt(t) * (1.0 - x / 6.0 + x * x / 120.0);
    }
    if (K > 0.0) {
        const double angle = x <= 1.0 ? std::atan(std::sqrt(std::expm1(2.0 * x))) : std::acos(std::exp(-x));
        return std::sqrt(2.0 / (kPi * K)) * angle;
    }
    // artanh(sqrt(1 - e^{-2kt})) = kt + log1p(sqrt(1 - e^{-2kt})), k = -K.
    const double k = -K;
    const double s = std::sqrt(-std::expm1(-2.0 * k * t));
    return std::sqrt(2.0 / (kPi * k)) * (k * t + std::log1p(s));
}

double gaussian_density(double K, double x) {
    if (!(K > 0.0)) throw std::invalid_argument("Gaussian profile requires K > 0");
    const double sk = std::sqrt(K);
    return sk * std_density(sk * x);
}

double gaussian_cdf(double K, double x) {
    if (!(K > 0.0)) throw std::invalid_argument("Gaussian profile requires K > 0");
    return std_cdf(std::sqrt(K) * x);
}

double gaussian_tail(double K, double x) {
    if (!(K > 0.0)) throw std::invalid_argument("Gaussian profile requires K > 0");
    return 0.5 * std::erfc(std::sqrt(K) * x / kSqrt2);
}

double gaussian_cdf_inverse(double K, double v) {
    if (!(K > 0.0)) throw std::invalid_argument("Gaussian profile requires K > 0");
    if (!(v > 0.0 && v < 1.0)) throw std::domain_error("gaussian_cdf_inverse requires 0 < v < 1");
    const double y = v <= 0.5 ? std_lower_quantile(v) : -std_lower_quantile(1.0 - v);
    return y / std::sqrt(K);
}

double eval_I(double K, double v) {
    require_finite(v, "v");
    if (!(K > 0.0)) throw std::invalid_argument("Gaussian profile requires K > 0");
    if (v < 0.0 || v > 1.0) throw std::domain_error("eval_I requires v in [0, 1]");
    const double u = std::min(v, 1.0 - v);
    if (u <= 0.0) return 0.0;
    return std::sqrt(K) * std_density(std_lower_quantile(u));
}

double buser_ratio(double lambda1, double K, double t) {
    return -std::expm1(-lambda1 * t) / eval_J(K, t);
}

BuserEvaluation buser_sharp_bound(double lambda1, double K, const BuserSearchOptions& opts) {
    require_finite(lambda1, "lambda1");
    require_finite(K, "K");
    if (lambda1 < 0.0) throw std::invalid_argument("lambda1 must be nonnegative");
    if (opts.samples < 3 || !(opts.t_min > 0.0) || !(opts.t_max > opts.t_min)) {
        throw std::invalid_argument("invalid Buser search window");
    }

    BuserEvaluation out;
    out.lambda1 = lambda1;
    out.K = K;
    out.samples.reserve(opts.samples);
    const double log_lo = std::log(opts.t_min);
    const double log_step = (std::log(opts.t_max) - log_lo) / static_cast<double>(opts.samples - 1);
    double best = 0.0;
    for (std::size_t k = 0; k < opts.samples; ++k) {
        const double t = k + 1 == opts.samples ? opts.t_max : std::exp(log_lo + log_step * static_cast<double>(k));
        const double r = buser_ratio(lambda1, K, t);
        out.samples.push_back({t, r});
        best = std::max(best, r);
    }
    if (lambda1 == 0.0) {
        out.argmax_t = opts.t_min;
        return out;
    }

    // Samples that agree with the maximum up to rounding count as ties; the
    // largest such t wins so a saturated tail is reported as t -> infinity.
    const double tie = best * (1.0 - 8.0 * std::numeric_limits<double>::epsilon());
    std::size_t kbest = 0;
    for (std::size_t k = 0; k < opts.samples; ++k) {
        if (out.samples[k].ratio >= tie) kbest = k;
    }

    out.sup_value = best;
    out.argmax_t = out.samples[kbest].t;
    if (kbest + 1 < opts.samples) {
        const double lo = out.samples[kbest == 0 ? 0 : kbest - 1].t;
        const double hi = out.samples[kbest + 1].t;
        double arg = out.argmax_t;
        const double refined = golden_max(lo, hi, lambda1, K, opts.relative_width, &arg);
        if (refined > out.sup_value) {
            out.sup_value = refined;
            out.argmax_t = arg;
        }
    }
    out.at_infinity = out.argmax_t > 0.99 * opts.t_max;
    return out;
}

double buser_classical_bound(double h, double K, int n) {
    if (K > 0.0) throw std::domain_error("classical Buser bound requires K <= 0");
    if (n < 1) throw std::invalid_argument("dimension must be >= 1");
    if (h < 0.0) throw std::invalid_argument("h must be nonnegative");
    return 2.0 * std::sqrt(-(n - 1) * K) * h + 10.0 * h * h;
}

double ledoux_bound(double h, double K) {
    if (K > 0.0) throw std::domain_error("Ledoux bound requires K <= 0");
    if (h < 0.0) throw std::invalid_argument("h must be nonnegative");
    return std::max(6.0 * std::sqrt(-K) * h, 36.0 * h * h);
}

double cheng_bound(double r) {
    if (!(r > 0.0)) throw std::invalid_argument("Cheng bound requires r > 0");
    const double q = 2.0 * kPi / r;
    return 0.25 + q * q;
}

ReferenceBounds reference_bounds(double h, double K, int n, double r) {
    return {buser_classical_bound(h, K, n), ledoux_bound(h, K), cheng_bound(r)};
}

double lipschitz_smoothing_constant(double K, double t) {
    require_finite(K, "K");
    if (!(t > 0.0)) throw std::invalid_argument("smoothing constant requires t > 0");
    const double x = 2.0 * K * t;
    const double ratio = std::abs(x) < 1e-12 ? 1.0 / t * (1.0 - x / 2.0) : 2.0 * K / std::expm1(x);
    return std::sqrt(ratio / kPi);
}

}  // namespace cheegerlab::kernels
