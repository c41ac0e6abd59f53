#pragma once

// Weighted Laplacian on a WeightedGrid, its low spectrum, and the heat
// semigroup built from the eigen-expansion.

#include "cheegerlab/mmspace.hpp"
#include "cheegerlab/tridiagonal.hpp"

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace cheegerlab {

/// (A f)_i = -(c_{i+1/2}(f_{i+1} - f_i) - c_{i-1/2}(f_i - f_{i-1})) / m_i with
/// conductance c = iface_weight / spacing. Dirichlet end nodes are deleted
/// (pinned to 0); Neumann ends have no outer flux.
///
/// Only the active nodes carry unknowns: grid indices [first, first + size()).
class DiscreteOperator {
public:
    std::size_t size() const { return masses_.size(); }
    std::size_t grid_size() const { return grid_size_; }
    std::size_t first() const { return first_; }
    BoundaryCondition bc() const { return bc_; }

    std::span<const double> masses() const { return masses_; }
    /// Conductances between consecutive active nodes (size() - 1 entries).
    std::span<const double> offdiag() const { return conductances_; }
    /// Total conductance at each active node, including links to pinned ends.
    std::span<const double> diag() const { return diag_; }
    /// Conductance to the pinned neighbour at each side (0 for Neumann).
    double pinned_conductance(Side side) const { return pinned_[static_cast<int>(side)]; }

    /// A v for v given on the active nodes, evaluated in flux form.
    std::vector<double> apply(std::span<const double> v) const;
    /// Dirichlet form sum c (dv)^2 (+ pinned terms).
    double quadratic_form(std::span<const double> v) const;
    /// M^{1/2} A M^{-1/2}.
    tridiag::SymTridiagonal symmetric() const;

    /// Active-node restriction and zero extension of grid functions.
    std::vector<double> restrict(std::span<const double> grid_values) const;
    std::vector<double> extend(std::span<const double> active_values) const;

private:
    friend DiscreteOperator assemble_operator(const WeightedGrid& grid);

    std::vector<double> masses_;
    std::vector<double> conductances_;
    std::vector<double> diag_;
    std::array<double, 2> pinned_{0.0, 0.0};
    std::size_t first_ = 0;
    std::size_t grid_size_ = 0;
    BoundaryCondition bc_ = BoundaryCondition::Neumann;
};

/// Throws std::invalid_argument when fewer than 2 unknowns remain.
DiscreteOperator assemble_operator(const WeightedGrid& grid);

/// Ascending eigenpairs. Eigenvectors are grid-length, zero at pinned nodes,
/// orthonormal in sum_i m_i u_i v_i.
struct SpectralDecomposition {
    std::vector<double> eigenvalues;
    std::vector<std::vector<double>> eigenvectors;
    std::vector<double> residuals;  ///< ||A v - lambda v||_m / ||v||_m
    double orthonormality_defect = 0.0;
    std::vector<double> masses;     ///< grid masses
    BoundaryCondition bc = BoundaryCondition::Neumann;

    std::size_t size() const { return eigenvalues.size(); }

    /// CSV with header `index,eigenvalue,residual`.
    std::string to_csv() const;
};

/// Lowest `count` eigenpairs: Sturm bisection to 1e-13 ||T||, inverse
/// iteration, Rayleigh-quotient refinement of each eigenvalue. Throws
/// std::invalid_argument when count exceeds the dimension and
/// std::runtime_error when a residual exceeds 1e-8.
SpectralDecomposition solve_spectrum(const DiscreteOperator& op, std::size_t count);

/// Number of eigenvalues strictly below x.
std::size_t count_eigenvalues_below(const DiscreteOperator& op, double x);

/// Heat semigroup H_t = sum_k e^{-lambda_k t} <., v_k>_m v_k.
///
/// The expansion keeps every eigenpair with lambda_k < 40 / t_min, so for
/// t >= t_min the discarded part is below e^{-40} relative. t = 0 is the
/// identity; 0 < t < t_min is rejected.
class HeatOperator {
public:
    HeatOperator(const WeightedGrid& grid, double t_min);

    double t_min() const { return t_min_; }
    const SpectralDecomposition& decomposition() const { return spectrum_; }
    std::size_t size() const { return spectrum_.masses.size(); }

    DiscreteFunction apply(const DiscreteFunction& f, double t) const;

    /// rho_t(x_i, x_j): density of the heat kernel with respect to m.
    double kernel(std::size_t i, std::size_t j, double t) const;
    std::vector<double> kernel_row(std::size_t i, double t) const;
    /// rho_t(x_i, x_i) for every i.
    std::vector<double> kernel_diagonal(double t) const;
    /// rho_t(x_i, x_j) m_j: probability of moving from i to j.
    double transition(std::size_t i, std::size_t j, double t) const;

    /// CSV slice `x,kernel` of rho_t(x_i, .).
    std::string kernel_slice_csv(const WeightedGrid& grid, std::size_t i, double t) const;

private:
    void check_time(double t) const;

    SpectralDecomposition spectrum_;
    double t_min_;
};

/// Free-function form of HeatOperator::apply; rejects t < 0.
DiscreteFunction heat_apply(const HeatOperator& heat, const DiscreteFunction& f, double t);

/// Contraction rate of sum_i w_i |f_{i+1} - f_i| under the heat flow, per
/// interface: ((w_i - w_{i-1}) / m_i + (w_i - w_{i+1}) / m_{i+1}) / h_i with
/// missing weights taken as 0. TV(H_t f) <= e^{-t min_i kappa_i} TV(f) holds
/// exactly on the grid. Neumann grids only.
std::vector<double> discrete_curvature(const WeightedGrid& grid);

struct VerificationReport;

/// Bakry-Emery style heat-flow checks on `trials` seeded test functions:
/// TV contraction, pointwise gradient bound, Lipschitz smoothing and
/// ultracontractivity via the kernel diagonal. Requires a Neumann grid with
/// K_tag and heat.t_min() <= t.
VerificationReport smoothing_report(const WeightedGrid& grid, const HeatOperator& heat, double t,
                                    std::size_t trials);

}  // namespace cheegerlab
