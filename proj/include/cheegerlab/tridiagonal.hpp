#pragma once

// Symmetric tridiagonal eigenproblems: Sturm counts, bisection and inverse
// iteration.

#include <cstddef>
#include <utility>
#include <vector>

namespace cheegerlab::tridiag {

/// diag has size n, off has size n - 1.
struct SymTridiagonal {
    std::vector<double> diag;
    std::vector<double> off;

    std::size_t size() const { return diag.size(); }
    /// Max-row-sum norm.
    double norm() const;
};

/// Number of eigenvalues strictly below x.
std::size_t sturm_count(const SymTridiagonal& T, double x);

/// Interval [lo, hi] containing the spectrum.
std::pair<double, double> gershgorin(const SymTridiagonal& T);

/// The k-th smallest eigenvalue (0-based), bisected to absolute width abstol.
double bisect_eigenvalue(const SymTridiagonal& T, std::size_t k, double abstol);

/// The `count` smallest eigenvalues, ascending.
std::vector<double> lowest_eigenvalues(const SymTridiagonal& T, std::size_t count, double abstol);

struct EigenvectorResult {
    /// Unit Euclidean norm, in extended precision so callers can rescale
    /// before rounding.
    std::vector<long double> vector;
    double eigenvalue;  ///< Rayleigh quotient of `vector`
    double residual;    ///< ||T x - lambda x||
    int iterations;
};

/// Inverse iteration with Rayleigh-quotient shifts, one eigenvalue at a time
/// (ascending input, e.g. from bisection). Each solve uses the twisted
/// factorisation of T - lambda, which keeps small eigenvector components
/// accurate to working precision relative to themselves. Vectors of
/// eigenvalues closer than 1e-8 ||T|| are reorthogonalised.
std::vector<EigenvectorResult> inverse_iteration(const SymTridiagonal& T, const std::vector<double>& eigenvalues,
                                                 int max_iterations = 50);

}  // namespace cheegerlab::tridiag
