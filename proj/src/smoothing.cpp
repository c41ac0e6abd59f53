#include "cheegerlab/kernels.hpp"
#include "cheegerlab/report.hpp"
#include "cheegerlab/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>

namespace cheegerlab {

namespace {

constexpr std::uint64_t kRoughSeed = 0x5eed0001ULL;
constexpr std::uint64_t kStructuredSeed = 0x5eed0002ULL;

struct Stream {
    std::uint64_t state;
    double uniform() {
        std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        z ^= z >> 31;
        return static_cast<double>(z >> 11) * 0x1.0p-53;
    }
    double uniform(double a, double b) { return a + (b - a) * uniform(); }
};

enum class Family { Smooth, Indicator, Ramp };

struct Trial {
    Family family;
    std::vector<double> values;
};

double sup_norm(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s = std::max(s, std::abs(x));
    return s;
}

double mass_norm(std::span<const double> v, std::span<const double> m) {
    double s = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) s += m[i] * v[i] * v[i];
    return std::sqrt(s);
}

// Structured trials are defined in the physical coordinate, so the same seed
// yields the same functions on refined grids.
Trial structured_trial(const WeightedGrid& grid, std::size_t k, Stream& rng) {
    const auto x = grid.nodes();
    const double lo = x.front();
    const double len = x.back() - x.front();
    const std::size_t n = grid.size();
    std::vector<double> f(n, 0.0);
    const auto family = static_cast<Family>(k % 3);
    switch (family) {
        case Family::Smooth: {
            for (int j = 0; j < 3; ++j) {
                const double a = rng.uniform(-1.0, 1.0);
                const double c = lo + len * rng.uniform(0.1, 0.9);
                const double s = len * rng.uniform(0.0125, 0.25);
                for (std::size_t i = 0; i < n; ++i) f[i] += a * std::tanh((x[i] - c) / s);
            }
            break;
        }
        case Family::Indicator: {
            double a = lo + len * rng.uniform();
            double b = lo + len * rng.uniform();
            if (a > b) std::swap(a, b);
            // Every other indicator is a half-line.
            if ((k / 3) % 2 == 0) {
                if (rng.uniform() < 0.5) a = lo - 1.0;
                else b = x.back() + 1.0;
            }
            for (std::size_t i = 0; i < n; ++i) f[i] = x[i] >= a && x[i] <= b ? 1.0 : 0.0;
            break;
        }
        case Family::Ramp: {
            const double c = lo + len * rng.uniform(0.2, 0.8);
            const double s = len * rng.uniform(0.02, 0.5);
            for (std::size_t i = 0; i < n; ++i) f[i] = std::clamp((x[i] - c) / s, -1.0, 1.0);
            break;
        }
    }
    const double norm = sup_norm(f);
    if (norm > 0.0) {
        for (double& v : f) v /= norm;
    }
    return {family, std::move(f)};
}

std::vector<double> interface_gradient(const WeightedGrid& grid, std::span<const double> f) {
    std::vector<double> g(grid.size() - 1);
    for (std::size_t i = 0; i + 1 < grid.size(); ++i) g[i] = (f[i + 1] - f[i]) / grid.spacing(i);
    return g;
}

}  // namespace

VerificationReport smoothing_report(const WeightedGrid& grid, const HeatOperator& heat, double t,
                                    std::size_t trials) {
    if (grid.bc() != BoundaryCondition::Neumann) throw std::invalid_argument("smoothing checks need a Neumann grid");
    if (!grid.k_tag()) throw std::invalid_argument("smoothing checks need a K_tag on the grid");
    if (heat.size() != grid.size()) throw std::invalid_argument("heat operator does not match grid");
    if (!(t > 0.0) || t < heat.t_min()) throw std::invalid_argument("t must be positive and at least heat.t_min()");
    if (trials == 0) throw std::invalid_argument("need at least one trial");

    const double K = *grid.k_tag();
    const auto kappa = discrete_curvature(grid);
    const double kappa_min = *std::min_element(kappa.begin(), kappa.end());
    const double k_eff = std::min(K, kappa_min);
    const double decay = std::exp(-K * t);
    const double decay_eff = std::exp(-k_eff * t);
    const double lip_constant = kernels::lipschitz_smoothing_constant(K, t);
    const auto diag2t = heat.kernel_diagonal(2.0 * t);
    const double theta_sq = *std::max_element(diag2t.begin(), diag2t.end());
    const double theta = std::sqrt(theta_sq);
    const auto masses = grid.masses();
    const std::size_t n = grid.size();

    double tv_random = std::numeric_limits<double>::infinity();
    double tv_curvature = std::numeric_limits<double>::infinity();
    double tv_structured_K = std::numeric_limits<double>::infinity();
    double be_defect = 0.0;
    double lip_slack = std::numeric_limits<double>::infinity();
    double lip_ratio = std::numeric_limits<double>::infinity();
    double ultra_slack = std::numeric_limits<double>::infinity();

    auto tv_slack = [](double before, double after, double factor) { return factor * before - after; };
    auto common_checks = [&](const DiscreteFunction& f, const DiscreteFunction& hf) {
        const double sup = sup_norm(f.values());
        const double grad = sup_norm(interface_gradient(grid, hf.values()));
        const double bound = lip_constant * sup;
        if (bound > 0.0) lip_slack = std::min(lip_slack, (bound - grad) / bound);
        if (grad > 0.0) lip_ratio = std::min(lip_ratio, bound / grad);
        const double l2 = mass_norm(f.values(), masses);
        const double lhs = sup_norm(hf.values());
        const double rhs = theta * l2;
        if (rhs > 0.0) ultra_slack = std::min(ultra_slack, (rhs - lhs) / rhs);
    };

    Stream rough{kRoughSeed};
    Stream structured{kStructuredSeed};
    for (std::size_t k = 0; k < trials; ++k) {
        std::vector<double> r(n);
        for (double& v : r) v = rough.uniform(-1.0, 1.0);
        const DiscreteFunction f(std::move(r));
        const auto hf = heat.apply(f, t);
        const double before = total_variation(grid, f);
        const double after = total_variation(grid, hf);
        tv_random = std::min(tv_random, tv_slack(before, after, decay));
        tv_curvature = std::min(tv_curvature, tv_slack(before, after, decay_eff));
        common_checks(f, hf);

        auto trial = structured_trial(grid, k, structured);
        const DiscreteFunction s(trial.values);
        const auto hs = heat.apply(s, t);
        const double s_before = total_variation(grid, s);
        const double s_after = total_variation(grid, hs);
        tv_curvature = std::min(tv_curvature, tv_slack(s_before, s_after, decay_eff));
        tv_structured_K = std::min(tv_structured_K, tv_slack(s_before, s_after, decay));
        common_checks(s, hs);

        if (trial.family != Family::Indicator) {
            // |grad f| as a node function: mean of the adjacent interface slopes.
            const auto gs = interface_gradient(grid, s.values());
            std::vector<double> node_grad(n);
            for (std::size_t i = 0; i < n; ++i) {
                const double left = i > 0 ? std::abs(gs[i - 1]) : std::abs(gs[0]);
                const double right = i + 1 < n ? std::abs(gs[i]) : std::abs(gs[n - 2]);
                node_grad[i] = 0.5 * (left + right);
            }
            const auto hg = heat.apply(DiscreteFunction(std::move(node_grad)), t);
            const auto ghs = interface_gradient(grid, hs.values());
            for (std::size_t i = 0; i + 1 < n; ++i) {
                const double bound = decay * 0.5 * (hg[i] + hg[i + 1]);
                be_defect = std::max(be_defect, std::abs(ghs[i]) - bound);
            }
        }
    }

    VerificationReport rep;
    rep.check = "smoothing";
    rep.space = grid.model().to_string();
    rep.input("t", t);
    rep.input("trials", static_cast<double>(trials));
    rep.input("K", K);
    rep.value("kappa_min", kappa_min);
    rep.value("tv_slack_random", tv_random);
    rep.value("tv_slack_discrete_curvature", tv_curvature);
    rep.value("tv_slack_structured_K", tv_structured_K);
    rep.value("be_defect", be_defect);
    rep.value("lipschitz_constant", lip_constant);
    rep.value("lipschitz_min_ratio", lip_ratio);
    rep.value("lipschitz_rel_slack", lip_slack);
    rep.value("theta_sq", theta_sq);
    rep.value("ultracontractive_rel_slack", ultra_slack);

    rep.require("tv_contraction_random", tv_random, 1e-10, "min of e^{-Kt} TV(f) - TV(H_t f)");
    rep.require("tv_contraction_discrete_curvature", tv_curvature, 1e-10,
                "all trials against e^{-kappa t}, kappa = min(K, grid curvature)");
    rep.inform("tv_contraction_structured_K", tv_structured_K, 1e-10,
               "structured trials against e^{-Kt}; half-lines are equality cases, so the O(h^2) curvature deficit "
               "shows here");
    rep.require("pointwise_bakry_emery", -be_defect, 1e-3);
    rep.require("lipschitz_smoothing", lip_slack, 1e-3);
    rep.require("ultracontractivity", ultra_slack, 1e-3);
    rep.finalize();
    return rep;
}

}  // namespace cheegerlab
