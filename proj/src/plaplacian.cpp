#include "cheegerlab/plaplacian.hpp"

#include "cheegerlab/parallel.hpp"
#include "cheegerlab/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace cheegerlab {

namespace {

constexpr double kMaxP = 8.0;

double signed_pow(double x, double e) { return x == 0.0 ? 0.0 : std::copysign(std::pow(std::abs(x), e), x); }

// Root of an increasing function on [lo, hi] with phi(lo) <= 0 <= phi(hi):
// Newton steps from x0, bisection whenever a step leaves the bracket.
double monotone_root(const std::function<std::pair<double, double>(double)>& phi_and_slope, double lo, double hi,
                     double x0, double xtol) {
    double x = std::clamp(x0, lo, hi);
    for (int iter = 0; iter < 200; ++iter) {
        const auto [v, slope] = phi_and_slope(x);
        if (v == 0.0) return x;
        if (v < 0.0) lo = x;
        else hi = x;
        if (hi - lo <= xtol) break;
        double next = slope > 0.0 && std::isfinite(slope) ? x - v / slope : 0.5 * (lo + hi);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (std::abs(next - x) <= 0.25 * xtol) {
            x = next;
            break;
        }
        x = next;
    }
    return x;
}

struct Problem {
    const WeightedGrid& grid;
    double p;
    std::vector<double> h;
    std::vector<double> w;
    std::vector<double> m;

    Problem(const WeightedGrid& g, double p_) : grid(g), p(p_) {
        const std::size_t n = g.size();
        h.resize(n - 1);
        for (std::size_t i = 0; i + 1 < n; ++i) h[i] = g.spacing(i);
        w.assign(g.iface_weights().begin(), g.iface_weights().end());
        m.assign(g.masses().begin(), g.masses().end());
    }

    double energy(std::span<const double> f) const {
        double e = 0.0;
        for (std::size_t j = 0; j < h.size(); ++j) e += w[j] * h[j] * std::pow(std::abs((f[j + 1] - f[j]) / h[j]), p);
        return e;
    }

    // Shift a with sum m |f - a|^{p-2} (f - a) = 0, then p-normalise.
    void retract(std::vector<double>& f, double guess = 0.0) const {
        const auto [mn, mx] = std::minmax_element(f.begin(), f.end());
        const double lo = *mn;
        const double hi = *mx;
        auto phi = [&](double a) {
            double v = 0.0;
            double slope = 0.0;
            for (std::size_t i = 0; i < f.size(); ++i) {
                const double d = f[i] - a;
                const double ad = std::abs(d);
                if (ad == 0.0) continue;
                const double pw = std::pow(ad, p - 2.0);
                v -= m[i] * pw * d;  // minus: increasing in a
                slope += m[i] * pw;
            }
            return std::pair{v, (p - 1.0) * slope};
        };
        const double a = monotone_root(phi, lo, hi, guess, 1e-15 * std::max(1.0, hi - lo));
        double norm = 0.0;
        for (std::size_t i = 0; i < f.size(); ++i) {
            f[i] -= a;
            norm += m[i] * std::pow(std::abs(f[i]), p);
        }
        const double scale = std::pow(norm, -1.0 / p);
        for (double& v : f) v *= scale;
    }

    // Euclidean gradient of E_p(f) / N(f) at N(f) = 1.
    std::vector<double> gradient(std::span<const double> f, double R) const {
        const std::size_t n = f.size();
        std::vector<double> g(n, 0.0);
        for (std::size_t j = 0; j + 1 < n; ++j) {
            const double r = (f[j + 1] - f[j]) / h[j];
            const double flux = p * w[j] * signed_pow(r, p - 1.0);
            g[j + 1] += flux;
            g[j] -= flux;
        }
        for (std::size_t i = 0; i < n; ++i) g[i] -= R * p * m[i] * signed_pow(f[i], p - 1.0);
        return g;
    }

    // Solves A d = rhs with A the Hessian of E_p - R N at f, both weights
    // floored at 1e-3 of their maximum so that p < 2 stays bounded:
    // a_j = w_j |r_j|^{p-2} / h_j on edges, R m_i |f_i|^{p-2} on nodes.
    std::vector<double> precondition(std::span<const double> f, double R, std::vector<double> rhs) const {
        const std::size_t n = rhs.size();
        std::vector<double> slope(n - 1);
        std::vector<double> level(n);
        double max_slope = 0.0;
        double max_level = 0.0;
        for (std::size_t j = 0; j + 1 < n; ++j) {
            slope[j] = std::abs((f[j + 1] - f[j]) / h[j]);
            max_slope = std::max(max_slope, slope[j]);
        }
        for (std::size_t i = 0; i < n; ++i) {
            level[i] = std::abs(f[i]);
            max_level = std::max(max_level, level[i]);
        }
        std::vector<double> diag(n), off(n - 1);
        for (std::size_t i = 0; i < n; ++i) {
            diag[i] = R * m[i] * std::pow(std::max(level[i], 1e-3 * max_level), p - 2.0);
        }
        for (std::size_t j = 0; j + 1 < n; ++j) {
            const double c = w[j] / h[j] * std::pow(std::max(slope[j], 1e-3 * max_slope), p - 2.0);
            diag[j] += c;
            diag[j + 1] += c;
            off[j] = -c;
        }
        // Thomas algorithm; the matrix is symmetric positive definite.
        for (std::size_t i = 1; i < n; ++i) {
            const double l = off[i - 1] / diag[i - 1];
            diag[i] -= l * off[i - 1];
            rhs[i] -= l * rhs[i - 1];
        }
        rhs[n - 1] /= diag[n - 1];
        for (std::size_t i = n - 1; i-- > 0;) rhs[i] = (rhs[i] - off[i] * rhs[i + 1]) / diag[i];
        return rhs;
    }
};

struct RunResult {
    double value;
    std::vector<double> f;
    std::size_t iterations;
    bool converged;
};

RunResult descend(const Problem& P, std::vector<double> f, const PEigenOptions& opts) {
    P.retract(f);
    double R = P.energy(f);
    double step = 1.0;
    std::size_t stall = 0;
    std::size_t it = 0;
    bool converged = false;
    for (it = 1; it <= opts.max_iterations; ++it) {
        const auto g = P.gradient(f, R);
        auto d = P.precondition(f, R, g);
        double slope = 0.0;
        for (std::size_t i = 0; i < d.size(); ++i) {
            d[i] = -d[i];
            slope += g[i] * d[i];
        }
        if (!(slope < 0.0)) {
            converged = true;
            break;
        }
        bool accepted = false;
        std::vector<double> trial(f.size());
        double R_trial = R;
        for (int ls = 0; ls < 60; ++ls) {
            for (std::size_t i = 0; i < f.size(); ++i) trial[i] = f[i] + step * d[i];
            P.retract(trial);
            R_trial = P.energy(trial);
            if (R_trial <= R + 1e-4 * step * slope) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) {
            converged = true;  // no descent left at working precision
            break;
        }
        const double drop = (R - R_trial) / R;
        f.swap(trial);
        R = R_trial;
        step = std::min(step * 2.0, 1e6);
        stall = drop < opts.stall_tolerance ? stall + 1 : 0;
        if (stall >= 20) {
            converged = true;
            break;
        }
    }
    return {R, std::move(f), std::min(it, opts.max_iterations), converged};
}

struct Stream {
    std::uint64_t state;
    double uniform() {
        std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        z ^= z >> 31;
        return static_cast<double>(z >> 11) * 0x1.0p-53;
    }
};

void check_grid(const WeightedGrid& grid) {
    if (grid.measure_mode() == MeasureMode::InfiniteTruncated) {
        throw std::invalid_argument("p-eigenvalues need a finite-measure grid");
    }
    if (grid.bc() != BoundaryCondition::Neumann) throw std::invalid_argument("p-eigenvalues need a Neumann grid");
}

}  // namespace

double p_energy(const WeightedGrid& grid, std::span<const double> f, double p) {
    if (f.size() != grid.size()) throw std::invalid_argument("function size does not match grid");
    return Problem(grid, p).energy(f);
}

double p_norm_power(const WeightedGrid& grid, std::span<const double> f, double p) {
    if (f.size() != grid.size()) throw std::invalid_argument("function size does not match grid");
    double s = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) s += grid.masses()[i] * std::pow(std::abs(f[i]), p);
    return s;
}

double p_constraint(const WeightedGrid& grid, std::span<const double> f, double p) {
    if (f.size() != grid.size()) throw std::invalid_argument("function size does not match grid");
    double s = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) s += grid.masses()[i] * signed_pow(f[i], p - 1.0);
    return s;
}

PEigenResult lambda_1p(const WeightedGrid& grid, double p, const PEigenOptions& opts) {
    if (!std::isfinite(p) || p < 1.0 || p > kMaxP) throw std::invalid_argument("p must lie in [1, 8]");
    check_grid(grid);
    const std::size_t n = grid.size();
    PEigenResult out;
    out.p = p;
    if (p == 1.0) {
        const auto cheeger = cheeger_search(grid, {.two_interval_unions = false, .profile_bins = 0, .workers = opts.workers});
        std::vector<double> f(n, 0.0);
        for (const auto& iv : cheeger.optimizer.intervals()) {
            for (std::size_t i = iv.first; i <= iv.last; ++i) f[i] = 1.0 / cheeger.measure;
        }
        out.value = cheeger.h;
        out.minimizer = DiscreteFunction(std::move(f));
        out.constraint_residual = std::numeric_limits<double>::quiet_NaN();
        out.restarts_agreeing = opts.restarts;
        return out;
    }
    if (opts.restarts == 0) throw std::invalid_argument("need at least one restart");

    const std::size_t modes = std::min<std::size_t>(6, assemble_operator(grid).size());
    const auto spectrum = solve_spectrum(assemble_operator(grid), modes);
    const Problem P(grid, p);

    std::vector<RunResult> runs(opts.restarts);
    parallel_for(
        opts.restarts,
        [&](std::size_t r) {
            std::vector<double> f = spectrum.eigenvectors[1];
            if (r > 0) {
                Stream rng{0x9e3779b97f4a7c15ULL * (r + 1)};
                for (std::size_t k = 2; k < modes; ++k) {
                    const double a = 0.6 * (2.0 * rng.uniform() - 1.0) / static_cast<double>(k - 1);
                    for (std::size_t i = 0; i < n; ++i) f[i] += a * spectrum.eigenvectors[k][i];
                }
                const double skew = 0.5 * (2.0 * rng.uniform() - 1.0);
                for (double& v : f) v += skew * v * v;
            }
            runs[r] = descend(P, std::move(f), opts);
        },
        opts.workers);

    std::size_t best = 0;
    for (std::size_t r = 1; r < runs.size(); ++r) {
        if (runs[r].value < runs[best].value) best = r;
    }
    out.value = runs[best].value;
    out.converged = true;
    for (const auto& run : runs) {
        if (std::abs(run.value - out.value) <= 1e-6 * out.value) ++out.restarts_agreeing;
        out.iterations = std::max(out.iterations, run.iterations);
        out.converged = out.converged && run.converged;
    }
    out.constraint_residual = std::abs(p_constraint(grid, runs[best].f, p));
    out.minimizer = DiscreteFunction(std::move(runs[best].f));
    return out;
}

RecenterResult recentering_shift(const WeightedGrid& grid, const DiscreteFunction& f, double p, double q) {
    if (!(p > 1.0) || !(q > p) || q > kMaxP) throw std::invalid_argument("recentering needs 1 < p < q <= 8");
    if (f.size() != grid.size()) throw std::invalid_argument("function size does not match grid");
    const auto [mn, mx] = std::minmax_element(f.values().begin(), f.values().end());
    if (*mn == *mx) throw std::invalid_argument("recentering needs a nonconstant function");
    const auto m = grid.masses();
    const double e = q * (p - 1.0) / p;
    auto phi = [&](double t) {
        double v = 0.0;
        double slope = 0.0;
        for (std::size_t i = 0; i < f.size(); ++i) {
            const double s = f[i] + t;
            const double a = std::abs(s);
            if (a == 0.0) continue;
            v += m[i] * std::copysign(std::pow(a, e), s);
            slope += m[i] * e * std::pow(a, e - 1.0);
        }
        return std::pair{v, slope};
    };
    const double span = *mx - *mn;
    const double t = monotone_root(phi, -*mx, -*mn, -0.5 * (*mx + *mn), 1e-15 * std::max(1.0, span));

    std::vector<double> gq(f.size());
    double norm_q = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
        gq[i] = f[i] + t;
        norm_q += m[i] * std::pow(std::abs(gq[i]), q);
    }
    norm_q = std::pow(norm_q, 1.0 / q);
    for (double& v : gq) v /= norm_q;
    std::vector<double> g(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) g[i] = signed_pow(gq[i], q / p);

    RecenterResult out;
    out.shift = t;
    out.constraint_residual = std::abs(p_constraint(grid, g, p));
    out.chain_left = std::pow(q / p, p) * std::pow(p_energy(grid, gq, q), p / q);
    out.chain_middle = p_energy(grid, g, p);
    out.gamma_q = DiscreteFunction(std::move(gq));
    out.gamma = DiscreteFunction(std::move(g));
    return out;
}

std::vector<SweepRow> monotonicity_sweep(const WeightedGrid& grid, const std::vector<double>& ps,
                                         const PEigenOptions& opts) {
    if (!std::is_sorted(ps.begin(), ps.end())) throw std::invalid_argument("p values must be ascending");
    for (double p : ps) {
        if (!std::isfinite(p) || p < 1.0 || p > kMaxP) throw std::invalid_argument("p must lie in [1, 8]");
    }
    std::vector<SweepRow> rows;
    for (double p : ps) {
        const auto r = lambda_1p(grid, p, opts);
        rows.push_back({p, r.value, p * std::pow(r.value, 1.0 / p), r.restarts_agreeing, r.converged});
    }
    return rows;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
    std::ostringstream out;
    out << "p,lambda_1p,p_lambda_pow,restarts_agreeing\n";
    for (const auto& r : rows) {
        out << format_number(r.p) << ',' << format_number(r.value) << ',' << format_number(r.scaled) << ','
            << r.restarts_agreeing << '\n';
    }
    return out.str();
}

VerificationReport monotonicity_report(const WeightedGrid& grid, const std::vector<SweepRow>& rows, double margin) {
    VerificationReport rep;
    rep.check = "p-monotonicity";
    rep.space = grid.model().to_string();
    rep.input("margin", margin);
    for (const auto& r : rows) {
        std::ostringstream key;
        key << r.p;
        rep.value("lambda_1p[" + key.str() + "]", r.value);
        rep.value("p_lambda_pow[" + key.str() + "]", r.scaled);
    }
    for (std::size_t i = 0; i + 1 < rows.size(); ++i) {
        std::ostringstream name;
        name << "increase " << rows[i].p << "->" << rows[i + 1].p;
        rep.require(name.str(), rows[i + 1].scaled - rows[i].scaled - margin, 0.0);
    }
    bool converged = true;
    for (const auto& r : rows) converged = converged && r.converged;
    if (!converged) {
        rep.verdict = Verdict::Inconclusive;
        rep.notes = "iteration cap reached for at least one p";
    }
    rep.finalize();
    return rep;
}

}  // namespace cheegerlab
