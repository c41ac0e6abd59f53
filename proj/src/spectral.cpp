#include "cheegerlab/spectral.hpp"

#include "cheegerlab/report.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace cheegerlab {

namespace {

constexpr double kTailExponent = 40.0;
constexpr double kMaxStoredEntries = 6e7;

}  // namespace

std::vector<double> DiscreteOperator::apply(std::span<const double> v) const {
    const std::size_t k = size();
    if (v.size() != k) throw std::invalid_argument("vector size does not match operator");
    std::vector<double> out(k);
    for (std::size_t j = 0; j < k; ++j) {
        const double right = j + 1 < k ? conductances_[j] * (v[j + 1] - v[j]) : -pinned_[1] * v[j];
        const double left = j > 0 ? conductances_[j - 1] * (v[j] - v[j - 1]) : pinned_[0] * v[j];
        out[j] = -(right - left) / masses_[j];
    }
    return out;
}

double DiscreteOperator::quadratic_form(std::span<const double> v) const {
    const std::size_t k = size();
    if (v.size() != k) throw std::invalid_argument("vector size does not match operator");
    double q = pinned_[0] * v[0] * v[0] + pinned_[1] * v[k - 1] * v[k - 1];
    for (std::size_t j = 0; j + 1 < k; ++j) {
        const double d = v[j + 1] - v[j];
        q += conductances_[j] * d * d;
    }
    return q;
}

tridiag::SymTridiagonal DiscreteOperator::symmetric() const {
    const std::size_t k = size();
    tridiag::SymTridiagonal T;
    T.diag.resize(k);
    T.off.resize(k - 1);
    std::vector<double> root(k);
    for (std::size_t j = 0; j < k; ++j) root[j] = std::sqrt(masses_[j]);
    for (std::size_t j = 0; j < k; ++j) T.diag[j] = diag_[j] / masses_[j];
    // sqrt(m_j) sqrt(m_{j+1}) rather than sqrt(m_j m_{j+1}): the product can underflow.
    for (std::size_t j = 0; j + 1 < k; ++j) T.off[j] = -conductances_[j] / root[j] / root[j + 1];
    return T;
}

std::vector<double> DiscreteOperator::restrict(std::span<const double> grid_values) const {
    if (grid_values.size() != grid_size_) throw std::invalid_argument("grid function size mismatch");
    return std::vector<double>(grid_values.begin() + static_cast<std::ptrdiff_t>(first_),
                               grid_values.begin() + static_cast<std::ptrdiff_t>(first_ + size()));
}

std::vector<double> DiscreteOperator::extend(std::span<const double> active_values) const {
    if (active_values.size() != size()) throw std::invalid_argument("active vector size mismatch");
    std::vector<double> out(grid_size_, 0.0);
    std::copy(active_values.begin(), active_values.end(), out.begin() + static_cast<std::ptrdiff_t>(first_));
    return out;
}

DiscreteOperator assemble_operator(const WeightedGrid& grid) {
    const std::size_t n = grid.size();
    const bool pin_left = grid.ends().left == BoundaryCondition::Dirichlet;
    const bool pin_right = grid.ends().right == BoundaryCondition::Dirichlet;
    const std::size_t first = pin_left ? 1 : 0;
    const std::size_t drop = (pin_left ? 1 : 0) + (pin_right ? 1 : 0);
    if (n < drop + 2) throw std::invalid_argument("operator needs at least two unknowns");
    const std::size_t k = n - drop;

    DiscreteOperator op;
    op.first_ = first;
    op.grid_size_ = n;
    op.bc_ = grid.bc();
    op.masses_.assign(grid.masses().begin() + static_cast<std::ptrdiff_t>(first),
                      grid.masses().begin() + static_cast<std::ptrdiff_t>(first + k));
    op.conductances_.resize(k - 1);
    for (std::size_t j = 0; j + 1 < k; ++j) op.conductances_[j] = grid.conductance(first + j);
    op.pinned_[0] = pin_left ? grid.conductance(0) : 0.0;
    op.pinned_[1] = pin_right ? grid.conductance(n - 2) : 0.0;
    op.diag_.resize(k);
    for (std::size_t j = 0; j < k; ++j) {
        const double left = j > 0 ? op.conductances_[j - 1] : op.pinned_[0];
        const double right = j + 1 < k ? op.conductances_[j] : op.pinned_[1];
        op.diag_[j] = left + right;
    }
    return op;
}

std::size_t count_eigenvalues_below(const DiscreteOperator& op, double x) {
    return tridiag::sturm_count(op.symmetric(), x);
}

std::string SpectralDecomposition::to_csv() const {
    std::ostringstream out;
    out << "index,eigenvalue,residual\n";
    for (std::size_t k = 0; k < size(); ++k) {
        out << k << ',' << format_number(eigenvalues[k]) << ',' << format_number(residuals[k]) << '\n';
    }
    return out.str();
}

SpectralDecomposition solve_spectrum(const DiscreteOperator& op, std::size_t count) {
    const std::size_t k = op.size();
    if (count == 0 || count > k) throw std::invalid_argument("eigenpair count must be in [1, dimension]");
    const auto T = op.symmetric();
    const double abstol = 1e-13 * T.norm();
    const auto values = tridiag::lowest_eigenvalues(T, count, abstol);
    const auto vectors = tridiag::inverse_iteration(T, values);

    SpectralDecomposition out;
    out.bc = op.bc();
    out.masses.assign(op.grid_size(), 0.0);
    {
        // Grid masses at pinned nodes are not part of the operator; keep them
        // for inner products of grid functions (eigenvectors vanish there).
        const auto m = op.masses();
        std::copy(m.begin(), m.end(), out.masses.begin() + static_cast<std::ptrdiff_t>(op.first()));
    }
    const auto masses = op.masses();
    for (std::size_t e = 0; e < count; ++e) {
        std::vector<double> v(k);
        if (e == 0 && op.bc() == BoundaryCondition::Neumann) {
            // The Neumann kernel is exactly the constants.
            double total = 0.0;
            for (double m : masses) total += m;
            std::fill(v.begin(), v.end(), 1.0 / std::sqrt(total));
        } else {
            long double norm2 = 0.0L;
            std::vector<long double> w(k);
            for (std::size_t j = 0; j < k; ++j) {
                w[j] = vectors[e].vector[j] / std::sqrt(static_cast<long double>(masses[j]));
            }
            if (op.bc() == BoundaryCondition::Neumann) {
                long double mean = 0.0L;
                long double total = 0.0L;
                for (std::size_t j = 0; j < k; ++j) {
                    mean += masses[j] * w[j];
                    total += masses[j];
                }
                mean /= total;
                for (long double& x : w) x -= mean;
            }
            for (std::size_t j = 0; j < k; ++j) norm2 += masses[j] * w[j] * w[j];
            const long double scale = 1.0L / std::sqrt(norm2);
            for (std::size_t j = 0; j < k; ++j) v[j] = static_cast<double>(w[j] * scale);
        }

        // Deterministic sign: first entry above 1e-3 of the maximum is positive.
        double vmax = 0.0;
        for (double x : v) vmax = std::max(vmax, std::abs(x));
        for (double x : v) {
            if (std::abs(x) > 1e-3 * vmax) {
                if (x < 0.0) {
                    for (double& y : v) y = -y;
                }
                break;
            }
        }

        const double lambda = op.quadratic_form(v);
        const auto Av = op.apply(v);
        double r2 = 0.0;
        for (std::size_t j = 0; j < k; ++j) {
            const double r = Av[j] - lambda * v[j];
            r2 += masses[j] * r * r;
        }
        const double residual = std::sqrt(r2);
        if (!(residual <= 1e-8 * std::max(1.0, std::abs(lambda)))) {
            std::ostringstream msg;
            msg << "inverse iteration did not converge for eigenpair " << e << " (residual " << residual << ")";
            throw std::runtime_error(msg.str());
        }
        out.eigenvalues.push_back(lambda);
        out.residuals.push_back(residual);
        out.eigenvectors.push_back(op.extend(v));
    }

    // Rayleigh quotients can reorder eigenvalues that agree to rounding.
    std::vector<std::size_t> order(count);
    for (std::size_t e = 0; e < count; ++e) order[e] = e;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return out.eigenvalues[a] < out.eigenvalues[b]; });
    SpectralDecomposition sorted;
    sorted.bc = out.bc;
    sorted.masses = out.masses;
    for (std::size_t e : order) {
        sorted.eigenvalues.push_back(out.eigenvalues[e]);
        sorted.residuals.push_back(out.residuals[e]);
        sorted.eigenvectors.push_back(std::move(out.eigenvectors[e]));
    }

    double defect = 0.0;
    for (std::size_t a = 0; a < count; ++a) {
        for (std::size_t b = a; b < count; ++b) {
            double dot = 0.0;
            const auto& va = sorted.eigenvectors[a];
            const auto& vb = sorted.eigenvectors[b];
            for (std::size_t i = 0; i < va.size(); ++i) dot += sorted.masses[i] * va[i] * vb[i];
            defect = std::max(defect, std::abs(dot - (a == b ? 1.0 : 0.0)));
        }
    }
    sorted.orthonormality_defect = defect;
    return sorted;
}

// --- heat semigroup ---------------------------------------------------------

HeatOperator::HeatOperator(const WeightedGrid& grid, double t_min) : t_min_(t_min) {
    if (!(t_min > 0.0) || !std::isfinite(t_min)) throw std::invalid_argument("t_min must be positive and finite");
    const auto op = assemble_operator(grid);
    std::size_t count = count_eigenvalues_below(op, kTailExponent / t_min);
    count = std::clamp<std::size_t>(count, std::min<std::size_t>(2, op.size()), op.size());
    if (static_cast<double>(count) * static_cast<double>(grid.size()) > kMaxStoredEntries) {
        throw std::invalid_argument("t_min too small for this grid: the heat expansion would need " +
                                    std::to_string(count) + " eigenpairs");
    }
    spectrum_ = solve_spectrum(op, count);
}

void HeatOperator::check_time(double t) const {
    if (!std::isfinite(t) || t < 0.0) throw std::invalid_argument("heat time must be finite and nonnegative");
    if (t > 0.0 && t < t_min_) {
        throw std::invalid_argument("heat time below the truncation time t_min of this operator");
    }
}

DiscreteFunction HeatOperator::apply(const DiscreteFunction& f, double t) const {
    check_time(t);
    if (f.size() != size()) throw std::invalid_argument("function size does not match heat operator");
    if (t == 0.0) return f;
    const auto& m = spectrum_.masses;
    std::vector<double> out(size(), 0.0);
    for (std::size_t k = 0; k < spectrum_.size(); ++k) {
        const auto& v = spectrum_.eigenvectors[k];
        double a = 0.0;
        for (std::size_t i = 0; i < v.size(); ++i) a += m[i] * f[i] * v[i];
        a *= std::exp(-spectrum_.eigenvalues[k] * t);
        for (std::size_t i = 0; i < v.size(); ++i) out[i] += a * v[i];
    }
    return DiscreteFunction(std::move(out));
}

double HeatOperator::kernel(std::size_t i, std::size_t j, double t) const {
    check_time(t);
    if (i >= size() || j >= size()) throw std::out_of_range("kernel index beyond grid");
    if (t == 0.0) return i == j && spectrum_.masses[j] > 0.0 ? 1.0 / spectrum_.masses[j] : 0.0;
    double s = 0.0;
    for (std::size_t k = 0; k < spectrum_.size(); ++k) {
        s += std::exp(-spectrum_.eigenvalues[k] * t) * spectrum_.eigenvectors[k][i] * spectrum_.eigenvectors[k][j];
    }
    return s;
}

std::vector<double> HeatOperator::kernel_row(std::size_t i, double t) const {
    check_time(t);
    if (i >= size()) throw std::out_of_range("kernel index beyond grid");
    std::vector<double> row(size(), 0.0);
    if (t == 0.0) {
        if (spectrum_.masses[i] > 0.0) row[i] = 1.0 / spectrum_.masses[i];
        return row;
    }
    for (std::size_t k = 0; k < spectrum_.size(); ++k) {
        const auto& v = spectrum_.eigenvectors[k];
        const double a = std::exp(-spectrum_.eigenvalues[k] * t) * v[i];
        for (std::size_t j = 0; j < size(); ++j) row[j] += a * v[j];
    }
    return row;
}

std::vector<double> HeatOperator::kernel_diagonal(double t) const {
    check_time(t);
    std::vector<double> diag(size(), 0.0);
    if (t == 0.0) {
        for (std::size_t i = 0; i < size(); ++i) {
            if (spectrum_.masses[i] > 0.0) diag[i] = 1.0 / spectrum_.masses[i];
        }
        return diag;
    }
    for (std::size_t k = 0; k < spectrum_.size(); ++k) {
        const auto& v = spectrum_.eigenvectors[k];
        const double a = std::exp(-spectrum_.eigenvalues[k] * t);
        for (std::size_t i = 0; i < size(); ++i) diag[i] += a * v[i] * v[i];
    }
    return diag;
}

double HeatOperator::transition(std::size_t i, std::size_t j, double t) const {
    return kernel(i, j, t) * spectrum_.masses[j];
}

std::string HeatOperator::kernel_slice_csv(const WeightedGrid& grid, std::size_t i, double t) const {
    if (grid.size() != size()) throw std::invalid_argument("grid does not match heat operator");
    const auto row = kernel_row(i, t);
    std::ostringstream out;
    out << "x,kernel\n";
    for (std::size_t j = 0; j < size(); ++j) out << format_number(grid.nodes()[j]) << ',' << format_number(row[j]) << '\n';
    return out.str();
}

DiscreteFunction heat_apply(const HeatOperator& heat, const DiscreteFunction& f, double t) {
    return heat.apply(f, t);
}

std::vector<double> discrete_curvature(const WeightedGrid& grid) {
    if (grid.bc() != BoundaryCondition::Neumann) {
        throw std::invalid_argument("discrete curvature is defined for Neumann grids");
    }
    const std::size_t n = grid.size();
    const auto w = grid.iface_weights();
    const auto m = grid.masses();
    auto weight = [&](std::ptrdiff_t i) {
        return i < 0 || i + 1 >= static_cast<std::ptrdiff_t>(n) ? 0.0 : w[static_cast<std::size_t>(i)];
    };
    std::vector<double> kappa(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const auto s = static_cast<std::ptrdiff_t>(i);
        kappa[i] = ((w[i] - weight(s - 1)) / m[i] + (w[i] - weight(s + 1)) / m[i + 1]) / grid.spacing(i);
    }
    return kappa;
}

}  // namespace cheegerlab
