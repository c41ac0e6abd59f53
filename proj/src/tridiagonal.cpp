#include "cheegerlab/tridiagonal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace cheegerlab::tridiag {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

double residual_norm(const SymTridiagonal& T, const std::vector<long double>& x, double lambda) {
    const std::size_t n = T.size();
    long double s = 0.0L;
    for (std::size_t i = 0; i < n; ++i) {
        long double r = (static_cast<long double>(T.diag[i]) - lambda) * x[i];
        if (i > 0) r += T.off[i - 1] * x[i - 1];
        if (i + 1 < n) r += T.off[i] * x[i + 1];
        s += r * r;
    }
    return static_cast<double>(std::sqrt(s));
}

void normalize(std::vector<long double>& x) {
    long double s = 0.0L;
    for (long double v : x) s += v * v;
    const long double norm = std::sqrt(s);
    for (long double& v : x) v /= norm;
}

}  // namespace

double SymTridiagonal::norm() const {
    double best = 0.0;
    for (std::size_t i = 0; i < diag.size(); ++i) {
        double r = std::abs(diag[i]);
        if (i > 0) r += std::abs(off[i - 1]);
        if (i + 1 < diag.size()) r += std::abs(off[i]);
        best = std::max(best, r);
    }
    return best;
}

std::size_t sturm_count(const SymTridiagonal& T, double x) {
    const std::size_t n = T.size();
    double emax = 0.0;
    for (double e : T.off) emax = std::max(emax, e * e);
    const double pivmin = std::numeric_limits<double>::min() * std::max(1.0, emax);
    std::size_t count = 0;
    double q = T.diag[0] - x;
    if (std::abs(q) < pivmin) q = -pivmin;
    if (q < 0.0) ++count;
    for (std::size_t i = 1; i < n; ++i) {
        q = T.diag[i] - x - T.off[i - 1] * T.off[i - 1] / q;
        if (std::abs(q) < pivmin) q = -pivmin;
        if (q < 0.0) ++count;
    }
    return count;
}

std::pair<double, double> gershgorin(const SymTridiagonal& T) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (std::size_t i = 0; i < T.size(); ++i) {
        double r = 0.0;
        if (i > 0) r += std::abs(T.off[i - 1]);
        if (i + 1 < T.size()) r += std::abs(T.off[i]);
        lo = std::min(lo, T.diag[i] - r);
        hi = std::max(hi, T.diag[i] + r);
    }
    const double pad = 2.0 * kEps * std::max(std::abs(lo), std::abs(hi)) + std::numeric_limits<double>::min();
    return {lo - pad, hi + pad};
}

double bisect_eigenvalue(const SymTridiagonal& T, std::size_t k, double abstol) {
    if (k >= T.size()) throw std::out_of_range("eigenvalue index beyond matrix size");
    auto [lo, hi] = gershgorin(T);
    for (int iter = 0; iter < 200; ++iter) {
        const double width = hi - lo;
        if (width <= abstol + 2.0 * kEps * std::max(std::abs(lo), std::abs(hi))) break;
        const double mid = lo + 0.5 * width;
        if (mid <= lo || mid >= hi) break;
        if (sturm_count(T, mid) > k) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    return lo + 0.5 * (hi - lo);
}

std::vector<double> lowest_eigenvalues(const SymTridiagonal& T, std::size_t count, double abstol) {
    if (count > T.size()) throw std::invalid_argument("requested more eigenvalues than the dimension");
    std::vector<double> out(count);
    for (std::size_t k = 0; k < count; ++k) out[k] = bisect_eigenvalue(T, k, abstol);
    return out;
}

namespace {

using real = long double;

// Eigenvector of T for shift lambda from the twisted factorisation
// T - lambda = N_r Delta N_r^T: z_r = 1 and the outward recurrences are
// products of ratios, so tiny tail components keep relative accuracy.
std::vector<real> twisted_vector(const SymTridiagonal& T, real lambda, real tiny) {
    const std::size_t n = T.size();
    std::vector<real> up(n), down(n);
    auto guard = [tiny](real v) { return std::abs(v) < tiny ? (v < 0 ? -tiny : tiny) : v; };
    up[0] = guard(T.diag[0] - lambda);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const real e = T.off[i];
        up[i + 1] = guard(T.diag[i + 1] - lambda - e * e / up[i]);
    }
    down[n - 1] = guard(T.diag[n - 1] - lambda);
    for (std::size_t i = n - 1; i-- > 0;) {
        const real e = T.off[i];
        down[i] = guard(T.diag[i] - lambda - e * e / down[i + 1]);
    }
    std::size_t r = 0;
    real best = std::numeric_limits<real>::infinity();
    for (std::size_t k = 0; k < n; ++k) {
        const real gamma = std::abs(up[k] + down[k] - (T.diag[k] - lambda));
        if (gamma < best) {
            best = gamma;
            r = k;
        }
    }
    std::vector<real> z(n, 0.0L);
    z[r] = 1.0L;
    for (std::size_t i = r; i-- > 0;) z[i] = -(T.off[i] / up[i]) * z[i + 1];
    for (std::size_t i = r; i + 1 < n; ++i) z[i + 1] = -(T.off[i] / down[i + 1]) * z[i];
    return z;
}

real rayleigh_quotient(const SymTridiagonal& T, const std::vector<real>& z) {
    const std::size_t n = T.size();
    real num = 0.0L;
    real den = 0.0L;
    for (std::size_t i = 0; i < n; ++i) {
        real tz = T.diag[i] * z[i];
        if (i > 0) tz += T.off[i - 1] * z[i - 1];
        if (i + 1 < n) tz += T.off[i] * z[i + 1];
        num += z[i] * tz;
        den += z[i] * z[i];
    }
    return num / den;
}

}  // namespace

std::vector<EigenvectorResult> inverse_iteration(const SymTridiagonal& T, const std::vector<double>& eigenvalues,
                                                 int max_iterations) {
    const std::size_t n = T.size();
    const double tnorm = std::max(T.norm(), std::numeric_limits<double>::min());
    const real eps_ld = std::numeric_limits<real>::epsilon();
    const real tiny = eps_ld * eps_ld * tnorm;
    // Reorthogonalise only where the gap leaves less than ~8 digits of angle.
    const double cluster_gap = 1e-8 * tnorm;
    std::vector<EigenvectorResult> out;
    out.reserve(eigenvalues.size());
    std::size_t cluster_start = 0;
    for (std::size_t k = 0; k < eigenvalues.size(); ++k) {
        if (k > 0 && eigenvalues[k] - eigenvalues[k - 1] > cluster_gap) cluster_start = k;
        // Rayleigh-quotient updates may not leave half the distance to the
        // neighbouring eigenvalues, so the iteration stays on eigenpair k.
        real lo = -std::numeric_limits<real>::infinity();
        real hi = std::numeric_limits<real>::infinity();
        if (k > 0) lo = 0.5L * (real(eigenvalues[k - 1]) + eigenvalues[k]);
        if (k + 1 < eigenvalues.size()) hi = 0.5L * (real(eigenvalues[k]) + eigenvalues[k + 1]);

        real lambda = eigenvalues[k];
        std::vector<real> z;
        int it = 0;
        for (it = 1; it <= max_iterations; ++it) {
            z = twisted_vector(T, lambda, tiny);
            normalize(z);
            const real next = rayleigh_quotient(T, z);
            if (!(next > lo && next < hi)) break;
            const bool settled = std::abs(next - lambda) <= 8.0L * eps_ld * tnorm;
            lambda = next;
            if (settled) break;
        }
        for (std::size_t j = cluster_start; j < k; ++j) {
            const auto& y = out[j].vector;
            real dot = 0.0L;
            for (std::size_t i = 0; i < n; ++i) dot += z[i] * y[i];
            for (std::size_t i = 0; i < n; ++i) z[i] -= dot * y[i];
        }
        if (k > cluster_start) normalize(z);
        const double r = residual_norm(T, z, static_cast<double>(lambda));
        out.push_back({std::move(z), static_cast<double>(lambda), r, std::min(it, max_iterations)});
    }
    return out;
}

}  // namespace cheegerlab::tridiag
