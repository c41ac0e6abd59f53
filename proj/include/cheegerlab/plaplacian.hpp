#pragma once

// First nontrivial p-Laplacian eigenvalue on a finite-measure grid, the
// recentering map between exponents q > p, and p-monotonicity sweeps.

#include "cheegerlab/mmspace.hpp"
#include "cheegerlab/report.hpp"

#include <cstddef>
#include <string>
#include <vector>

namespace cheegerlab {

/// sum_j w_j h_j |(f_{j+1} - f_j) / h_j|^p.
double p_energy(const WeightedGrid& grid, std::span<const double> f, double p);

/// sum_i m_i |f_i|^p.
double p_norm_power(const WeightedGrid& grid, std::span<const double> f, double p);

/// sum_i m_i |f_i|^{p-2} f_i.
double p_constraint(const WeightedGrid& grid, std::span<const double> f, double p);

struct PEigenOptions {
    std::size_t restarts = 16;
    std::size_t max_iterations = 100000;
    /// Stop once the Rayleigh quotient drops by less than this (relative)
    /// over 20 consecutive iterations.
    double stall_tolerance = 1e-13;
    std::size_t workers = 0;
};

struct PEigenResult {
    double p = 0.0;
    double value = 0.0;
    DiscreteFunction minimizer;
    /// |sum m |f|^{p-2} f|; NaN for p = 1, where the minimiser is an indicator.
    double constraint_residual = 0.0;
    std::size_t restarts_agreeing = 0;
    std::size_t iterations = 0;  ///< largest iteration count over restarts
    bool converged = true;
};

/// lambda_{1,p}: p = 1 is the Cheeger constant; p in (1, 8] minimises
/// E_p(f) / sum m|f|^p over sum m |f|^{p-2} f = 0 by preconditioned projected
/// gradient descent with Armijo steps, from `restarts` seeded starts.
/// Requires a Neumann finite-measure grid.
PEigenResult lambda_1p(const WeightedGrid& grid, double p, const PEigenOptions& opts = {});

struct RecenterResult {
    double shift = 0.0;           ///< t~
    DiscreteFunction gamma_q;     ///< (f + t~) / ||f + t~||_q
    DiscreteFunction gamma;       ///< |gamma_q|^{(q-p)/p} gamma_q
    double constraint_residual = 0.0;
    double chain_left = 0.0;      ///< (q/p)^p E_q(gamma_q)^{p/q}
    double chain_middle = 0.0;    ///< E_p(gamma)
};

/// Shift t~ with sum m |gamma|^{p-2} gamma = 0; the shifted constraint is
/// sum m |f + t|^{q(p-1)/p} sign(f + t), increasing in t. Throws
/// std::invalid_argument for constant f or p, q out of range.
RecenterResult recentering_shift(const WeightedGrid& grid, const DiscreteFunction& f, double p, double q);

struct SweepRow {
    double p;
    double value;
    double scaled;  ///< p * value^{1/p}
    std::size_t restarts_agreeing;
    bool converged;
};

/// lambda_{1,p} for each p (ascending).
std::vector<SweepRow> monotonicity_sweep(const WeightedGrid& grid, const std::vector<double>& ps,
                                         const PEigenOptions& opts = {});

/// CSV with header `p,lambda_1p,p_lambda_pow,restarts_agreeing`.
std::string sweep_csv(const std::vector<SweepRow>& rows);

/// Non-strict adjacent pairs (margin below `margin`) fail the report.
VerificationReport monotonicity_report(const WeightedGrid& grid, const std::vector<SweepRow>& rows,
                                       double margin = 0.0);

}  // namespace cheegerlab
