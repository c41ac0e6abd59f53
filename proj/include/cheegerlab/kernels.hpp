#pragma once

// Closed-form one-dimensional kernels: the heat-smoothing profile J_K, the
// Gaussian isoperimetric profile I_K, the sharp Buser bound and the classical
// Buser / Ledoux / Cheng reference values.

#include <cstddef>
#include <vector>

namespace cheegerlab::kernels {

/// Heat-smoothing profile J_K(t) for a curvature lower bound K.
///
/// K > 0:  sqrt(2/(pi K)) * arctan(sqrt(e^{2Kt} - 1))
/// K = 0:  (2/sqrt(pi)) * sqrt(t)
/// K < 0:  sqrt(-2/(pi K)) * artanh(sqrt(1 - e^{2Kt}))
///
/// For |K t| < 1e-8 a second-order series in K t is used so the value is
/// continuous across K = 0. Requires t > 0 and finite inputs.
double eval_J(double K, double t);

/// Density of the centred Gaussian with variance 1/K (K > 0).
double gaussian_density(double K, double x);

/// Distribution function of the centred Gaussian with variance 1/K.
double gaussian_cdf(double K, double x);

/// Upper tail 1 - gaussian_cdf(K, x), evaluated without cancellation.
double gaussian_tail(double K, double x);

/// Inverse of gaussian_cdf; bracketed Newton with bisection fallback.
/// Requires 0 < v < 1.
double gaussian_cdf_inverse(double K, double v);

/// Gaussian isoperimetric profile I_K(v) = phi_K(Phi_K^{-1}(v)), v in [0, 1].
double eval_I(double K, double v);

struct BuserSample {
    double t;
    double ratio;
};

struct BuserEvaluation {
    double lambda1 = 0.0;
    double K = 0.0;
    double sup_value = 0.0;
    double argmax_t = 0.0;
    bool at_infinity = false;
    std::vector<BuserSample> samples;
};

/// (1 - e^{-lambda1 t}) / J_K(t).
double buser_ratio(double lambda1, double K, double t);

struct BuserSearchOptions {
    double t_min = 1e-6;
    double t_max = 1e6;
    std::size_t samples = 512;
    double relative_width = 1e-10;
};

/// sup_{t>0} (1 - e^{-lambda1 t}) / J_K(t): log-spaced sampling followed by
/// golden-section refinement in log t. `at_infinity` is set when the
/// maximiser sits above 0.99 * t_max.
BuserEvaluation buser_sharp_bound(double lambda1, double K, const BuserSearchOptions& opts = {});

/// 2 sqrt(-(n-1) K) h + 10 h^2, valid for K <= 0.
double buser_classical_bound(double h, double K, int n);

/// max{6 sqrt(-K) h, 36 h^2}, valid for K <= 0.
double ledoux_bound(double h, double K);

/// 1/4 + (2 pi / r)^2, upper bound for the Dirichlet eigenvalue of a
/// hyperbolic disc of radius r.
double cheng_bound(double r);

struct ReferenceBounds {
    double buser_classical;
    double ledoux;
    double cheng;
};

/// All three reference values; throws std::domain_error when K > 0.
ReferenceBounds reference_bounds(double h, double K, int n, double r);

/// Lipschitz-smoothing constant sqrt(2K / (pi (e^{2Kt} - 1))), with the
/// K -> 0 limit 1/sqrt(pi t).
double lipschitz_smoothing_constant(double K, double t);

}  // namespace cheegerlab::kernels
