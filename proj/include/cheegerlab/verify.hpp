#pragma once

// Inequality checks producing VerificationReports, the rigidity scan over
// the perturbed Gaussian family, and the surface-of-revolution diagnostics.

#include "cheegerlab/mmspace.hpp"
#include "cheegerlab/report.hpp"

#include <cstddef>
#include <vector>

namespace cheegerlab {

/// lambda_1 on Neumann grids, the bottom eigenvalue lambda_0 otherwise.
double bottom_eigenvalue(const WeightedGrid& grid);

/// Equality tolerance for the Gaussian Buser check: 4e-3 at 4001 nodes,
/// halving with each grid doubling.
double equality_tolerance(std::size_t n);

/// lambda >= h^2/4. Strictness (gap > strict_margin) is required on models
/// with a superlinear profile or declared discrete spectrum: uniform,
/// gaussian, perturbed_gaussian, expx2. Truncated infinite-measure grids are
/// recomputed at 2R with the same spacing; the verdict is INCONCLUSIVE
/// when the two gaps differ by more than 1% relative.
VerificationReport verify_cheeger(const WeightedGrid& grid, double tol = 1e-3, double strict_margin = 1e-3);

/// h >= sup_t (1 - e^{-lambda t}) / J_K(t). On the Gaussian model (and the
/// perturbed family at eps = 0) |gap| <= equality_tolerance(n) is required as
/// well. Throws std::invalid_argument without K_tag.
VerificationReport verify_buser(const WeightedGrid& grid, double tol = 1e-3);

/// L(t) >= M(t) >= R(t) for each t, with L = J_K(t) Per(A),
/// M = 2(m - m^2 - ||H_{t/2}(chi_A - m)||^2), R = 2 m (1 - m)(1 - e^{-lambda_1 t}).
/// Requires a probability grid with K_tag; throws for empty or full A.
VerificationReport verify_heat_chain(const WeightedGrid& grid, const DiscreteSet& set, const std::vector<double>& ts,
                                     double tol = 1e-3);

/// Gaussian: Per >= I_K(m) over every Cheeger candidate, with the median
/// half-line attaining equality within tol. Hyperbolic radial: the ball
/// identity Per^2 = 4 pi vol + vol^2 to 1e-6 relative, Per/vol decreasing to
/// 1, and lambda_0 inside the bracket (1/4, 1/4 + (2 pi / R)^2].
VerificationReport verify_isoperimetry(const WeightedGrid& grid, double tol = 1e-3);

/// Heat-flow smoothing suite at time t on a Neumann grid with K_tag.
VerificationReport verify_smoothing(const WeightedGrid& grid, double t = 1.0, std::size_t trials = 100);

/// verify_buser on perturbed_gaussian(eps, R, n) for each eps, followed by a
/// summary report requiring gap(0) <= equality_tolerance(n) and strictly
/// increasing gaps. epsilons must be ascending, start at 0, and be >= 0.
std::vector<VerificationReport> rigidity_scan(const std::vector<double>& epsilons, double R = 8.0,
                                              std::size_t n = 4001, double tol = 1e-3);

struct RevolutionOptions {
    std::vector<double> T_list{10.0, 20.0, 40.0};
    std::size_t n = 8001;
    std::vector<double> radii{1e2, 1e3, 1e4};
    double curvature_floor = -0.5;
    double lambda_ceiling = 0.05;  ///< applied to lambda_1 at the largest T when it is >= 40
    double mu_ceiling = 0.05;      ///< applied to mu estimates at r >= 1000
};

/// Surface of revolution: certified total area, curvature infima inside and
/// outside |t| <= 1, the volume-growth estimator -(1/r) log(vol(S) - vol(B_r))
/// on the given radii, and lambda_1 of the meridian on [-T, T]. Throws
/// std::runtime_error when the area quadratures disagree beyond 1e-6.
VerificationReport revolution_diagnostics(const RevolutionOptions& opts = {});

}  // namespace cheegerlab
