#include "cheegerlab/verify.hpp"

#include "cheegerlab/kernels.hpp"
#include "cheegerlab/parallel.hpp"
#include "cheegerlab/revolution.hpp"
#include "cheegerlab/spectral.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/erf.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace cheegerlab {

namespace {

using namespace kernels;

constexpr double kPi = std::numbers::pi;

std::string indexed(std::string_view key, double v) {
    std::ostringstream out;
    out << key << '[' << v << ']';
    return out.str();
}

bool declares_strict_cheeger(const WeightedGrid& grid) {
    switch (grid.model().kind()) {
        case ModelKind::Uniform:
        case ModelKind::Gaussian:
        case ModelKind::PerturbedGaussian:
        case ModelKind::Expx2:
            return true;
        default:
            return false;
    }
}

bool declares_buser_equality(const WeightedGrid& grid) {
    const auto& model = grid.model();
    if (model.kind() == ModelKind::Gaussian) return true;
    return model.kind() == ModelKind::PerturbedGaussian && model.param("eps") == 0.0;
}

struct CheegerGap {
    double lambda;
    double h;
    double gap;
};

CheegerGap cheeger_gap(const WeightedGrid& grid) {
    const double lambda = bottom_eigenvalue(grid);
    const auto cheeger = cheeger_search(grid, {.two_interval_unions = false, .profile_bins = 0, .workers = 0});
    return {lambda, cheeger.h, lambda - 0.25 * cheeger.h * cheeger.h};
}

// Gaussian isoperimetric slack over all candidates. The profile is
// evaluated through erfc_inv here: the scan visits O(n^2) candidates.
struct IsoperimetricScan {
    double min_slack = std::numeric_limits<double>::infinity();
    double argmin_measure = 0.0;
    double argmin_perimeter = 0.0;
};

double fast_profile(double K, double v) {
    const double u = std::min(v, 1.0 - v);
    if (u <= 0.0) return 0.0;
    const double y = std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * u);
    return std::sqrt(K / (2.0 * kPi)) * std::exp(-0.5 * y * y);
}

IsoperimetricScan gaussian_scan(const WeightedGrid& grid, double K) {
    const double total = grid.total_mass();
    IsoperimetricScan scan;
    for_each_candidate(grid, [&](const CheegerCandidate& c) {
        const double v = c.measure / total;
        const double slack = c.perimeter - fast_profile(K, v);
        if (slack < scan.min_slack) {
            scan.min_slack = slack;
            scan.argmin_measure = v;
            scan.argmin_perimeter = c.perimeter;
        }
    });
    return scan;
}

void gaussian_isoperimetry(const WeightedGrid& grid, double tol, VerificationReport& rep) {
    const auto K = grid.k_tag();
    if (!K || !(*K > 0.0)) throw std::invalid_argument("Gaussian isoperimetry needs a positive K_tag");
    const double total = grid.total_mass();
    const auto m = grid.masses();
    // Median half-line: the longest left piece with measure <= 1/2.
    double acc = 0.0;
    std::size_t last = 0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if ((acc + m[i]) / total > 0.5) break;
        acc += m[i];
        last = i;
    }
    const auto half = measure_and_perimeter(grid, DiscreteSet({{0, last}}));
    const double half_slack = half.perimeter - eval_I(*K, half.measure / total);
    const auto scan = gaussian_scan(grid, *K);

    rep.input("K", *K);
    rep.value("min_slack", scan.min_slack);
    rep.value("argmin_measure", scan.argmin_measure);
    rep.value("argmin_perimeter", scan.argmin_perimeter);
    rep.value("half_line_measure", half.measure / total);
    rep.value("half_line_perimeter", half.perimeter);
    rep.value("half_line_slack", half_slack);
    rep.require("perimeter_ge_profile", scan.min_slack, tol);
    rep.require("half_line_equality", tol - std::abs(half_slack), 0.0);
}

void hyperbolic_isoperimetry(const WeightedGrid& grid, VerificationReport& rep) {
    using boost::math::quadrature::gauss_kronrod;
    const double R = grid.nodes().back();
    const auto sinh_density = [](double r) { return 2.0 * kPi * std::sinh(r); };
    constexpr double kEqualityTol = 1e-6;

    std::vector<double> radii;
    for (double r : {0.5, 1.0, 2.0, 5.0, 10.0, 15.0, 20.0}) {
        if (r <= R) radii.push_back(r);
    }
    double worst_defect = 0.0;
    double prev_ratio = std::numeric_limits<double>::infinity();
    double min_decrease = std::numeric_limits<double>::infinity();
    for (double r : radii) {
        // Ball volume by adaptive quadrature, perimeter = density at r.
        double err = 0.0;
        const double vol = gauss_kronrod<double, 31>::integrate(sinh_density, 0.0, r, 20, 1e-15, &err);
        const double per = sinh_density(r);
        const double defect = (per * per - 4.0 * kPi * vol - vol * vol) / (per * per);
        const double ratio = per / vol;
        worst_defect = std::max(worst_defect, std::abs(defect));
        min_decrease = std::min(min_decrease, prev_ratio - ratio);
        prev_ratio = ratio;
        rep.value(indexed("ball_volume", r), vol);
        rep.value(indexed("ball_perimeter", r), per);
        rep.value(indexed("ball_identity_defect", r), defect);
        rep.value(indexed("ball_ratio", r), ratio);
    }
    rep.require("ball_identity", kEqualityTol - worst_defect, 0.0, "relative defect of Per^2 = 4 pi vol + vol^2");
    rep.require("ratio_decreasing", min_decrease, 0.0);
    if (R >= 10.0) {
        double err = 0.0;
        const double vol = gauss_kronrod<double, 31>::integrate(sinh_density, 0.0, 10.0, 20, 1e-15, &err);
        const double gap = std::abs(sinh_density(10.0) / vol - 1.0);
        rep.require("ratio_near_one_at_10", 1e-3 - gap, 0.0);
    }

    // The lumped grid balls, for comparison with the quadrature balls.
    const auto m = grid.masses();
    double grid_vol = 0.0;
    double worst_grid = 0.0;
    for (std::size_t k = 0; k + 1 < grid.size(); ++k) {
        grid_vol += m[k];
        const double per = grid.iface_weights()[k];
        worst_grid = std::max(worst_grid, std::abs(per * per - 4.0 * kPi * grid_vol - grid_vol * grid_vol) / (per * per));
    }
    rep.value("grid_ball_identity_defect", worst_grid);

    const double lambda0 = bottom_eigenvalue(grid);
    const double cheng = cheng_bound(R);
    rep.value("lambda0", lambda0);
    rep.value("cheng_bound", cheng);
    rep.require("lambda0_above_quarter", lambda0 - 0.25, 0.0);
    rep.require("lambda0_below_cheng", cheng - lambda0, 0.0);
}

}  // namespace

double bottom_eigenvalue(const WeightedGrid& grid) {
    const auto op = assemble_operator(grid);
    const bool neumann = grid.bc() == BoundaryCondition::Neumann;
    const auto spectrum = solve_spectrum(op, neumann ? 2 : 1);
    return spectrum.eigenvalues[neumann ? 1 : 0];
}

double equality_tolerance(std::size_t n) {
    if (n < 2) throw std::invalid_argument("need at least two nodes");
    return 4e-3 * 4000.0 / static_cast<double>(n - 1);
}

VerificationReport verify_cheeger(const WeightedGrid& grid, double tol, double strict_margin) {
    VerificationReport rep;
    rep.check = "cheeger";
    rep.space = grid.model().to_string();
    rep.input("tol", tol);
    const auto base = cheeger_gap(grid);
    rep.value("lambda", base.lambda);
    rep.value("h", base.h);
    rep.value("h_sq_over_4", 0.25 * base.h * base.h);
    rep.value("gap", base.gap);
    rep.require("cheeger", base.gap, tol);
    if (declares_strict_cheeger(grid)) rep.require("strict", base.gap - strict_margin, 0.0);

    if (grid.measure_mode() == MeasureMode::InfiniteTruncated && grid.model().has_param("R")) {
        const double R = grid.model().param("R");
        const std::size_t n = grid.model().nodes();
        const std::size_t n2 = 2 * (n - 1) + 1;
        const auto wider = build_space(grid.model().with("R", 2.0 * R).with("n", static_cast<double>(n2)));
        const auto second = cheeger_gap(wider);
        const double drift = std::abs(second.gap - base.gap) / std::max(std::abs(base.gap), 1e-300);
        rep.value("R2", 2.0 * R);
        rep.value("lambda_R2", second.lambda);
        rep.value("h_R2", second.h);
        rep.value("gap_R2", second.gap);
        rep.value("gap_relative_drift", drift);
        if (drift > 1e-2) {
            rep.verdict = Verdict::Inconclusive;
            rep.notes = "truncation not converged: gap moves by more than 1% between R and 2R";
        }
    }
    rep.finalize();
    return rep;
}

VerificationReport verify_buser(const WeightedGrid& grid, double tol) {
    const auto K = grid.k_tag();
    if (!K) throw std::invalid_argument("Buser check needs a K_tag");
    VerificationReport rep;
    rep.check = "buser";
    rep.space = grid.model().to_string();
    rep.input("K", *K);
    rep.input("tol", tol);
    const double lambda = bottom_eigenvalue(grid);
    const double h = cheeger_search(grid, {.two_interval_unions = false, .profile_bins = 0, .workers = 0}).h;
    const auto bound = buser_sharp_bound(lambda, *K);
    const double gap = h - bound.sup_value;
    rep.value("lambda1", lambda);
    rep.value("h", h);
    rep.value("B", bound.sup_value);
    rep.value("argmax_t", bound.argmax_t);
    rep.value("at_infinity", bound.at_infinity ? 1.0 : 0.0);
    rep.value("gap", gap);
    rep.require("buser", gap, tol);
    if (declares_buser_equality(grid)) {
        const double eq_tol = equality_tolerance(grid.size());
        rep.input("eq_tol", eq_tol);
        rep.require("equality", eq_tol - std::abs(gap), 0.0, "Gaussian equality case");
    }
    rep.finalize();
    return rep;
}

VerificationReport verify_heat_chain(const WeightedGrid& grid, const DiscreteSet& set, const std::vector<double>& ts,
                                     double tol) {
    const auto K = grid.k_tag();
    if (!K) throw std::invalid_argument("heat chain needs a K_tag");
    if (grid.measure_mode() != MeasureMode::Probability) throw std::invalid_argument("heat chain needs a probability grid");
    if (ts.empty()) throw std::invalid_argument("heat chain needs at least one time");
    for (double t : ts) {
        if (!std::isfinite(t) || !(t > 0.0)) throw std::invalid_argument("heat chain times must be positive");
    }
    const auto [m, per] = measure_and_perimeter(grid, set);
    if (set.empty() || set.cardinality() == grid.size()) throw std::invalid_argument("heat chain set is empty or full");

    const double t_min = *std::min_element(ts.begin(), ts.end()) / 2.0;
    const HeatOperator heat(grid, t_min);
    const double lambda1 = heat.decomposition().eigenvalues.at(1);
    auto f = DiscreteFunction::indicator(set, grid.size());
    for (double& v : f.mutable_values()) v -= m;

    VerificationReport rep;
    rep.check = "heat-chain";
    rep.space = grid.model().to_string();
    rep.input("K", *K);
    rep.input("tol", tol);
    rep.input("measure", m);
    rep.input("perimeter", per);
    rep.value("lambda1", lambda1);
    const auto masses = grid.masses();
    for (double t : ts) {
        const auto u = heat.apply(f, t / 2.0);
        double norm_sq = 0.0;
        for (std::size_t i = 0; i < u.size(); ++i) norm_sq += masses[i] * u[i] * u[i];
        const double L = eval_J(*K, t) * per;
        const double M = 2.0 * (m - m * m - norm_sq);
        const double R = 2.0 * m * (1.0 - m) * -std::expm1(-lambda1 * t);
        rep.value(indexed("L", t), L);
        rep.value(indexed("M", t), M);
        rep.value(indexed("R", t), R);
        rep.require(indexed("L_ge_M", t), L - M, tol);
        rep.require(indexed("M_ge_R", t), M - R, tol);
    }
    rep.finalize();
    return rep;
}

VerificationReport verify_isoperimetry(const WeightedGrid& grid, double tol) {
    VerificationReport rep;
    rep.check = "isoperimetry";
    rep.space = grid.model().to_string();
    rep.input("tol", tol);
    switch (grid.model().kind()) {
        case ModelKind::Gaussian:
            gaussian_isoperimetry(grid, tol, rep);
            break;
        case ModelKind::HyperbolicRadial:
            hyperbolic_isoperimetry(grid, rep);
            break;
        default:
            throw std::invalid_argument("isoperimetry supports gaussian and hyperbolic_radial only");
    }
    rep.finalize();
    return rep;
}

VerificationReport verify_smoothing(const WeightedGrid& grid, double t, std::size_t trials) {
    if (!std::isfinite(t) || !(t > 0.0)) throw std::invalid_argument("smoothing time must be positive");
    const HeatOperator heat(grid, t);
    return smoothing_report(grid, heat, t, trials);
}

std::vector<VerificationReport> rigidity_scan(const std::vector<double>& epsilons, double R, std::size_t n,
                                              double tol) {
    if (epsilons.empty() || epsilons.front() != 0.0) throw std::invalid_argument("rigidity scan must start at eps = 0");
    for (double e : epsilons) {
        if (!std::isfinite(e) || e < 0.0) throw std::invalid_argument("eps must be >= 0");
    }
    if (!std::is_sorted(epsilons.begin(), epsilons.end())) throw std::invalid_argument("eps values must be ascending");

    std::vector<VerificationReport> reports(epsilons.size());
    parallel_for(epsilons.size(), [&](std::size_t k) {
        reports[k] = verify_buser(build_space(ModelDescriptor::perturbed_gaussian(epsilons[k], R, n)), tol);
    });

    VerificationReport summary;
    summary.check = "rigidity";
    summary.space = ModelDescriptor::perturbed_gaussian(0.0, R, n).to_string();
    const double eq_tol = equality_tolerance(n);
    summary.input("eq_tol", eq_tol);
    std::vector<double> gaps;
    for (std::size_t k = 0; k < epsilons.size(); ++k) {
        gaps.push_back(reports[k].computed_value("gap"));
        summary.value(indexed("gap", epsilons[k]), gaps.back());
    }
    summary.require("gaussian_equality", eq_tol - std::abs(gaps.front()), 0.0);
    for (std::size_t k = 0; k + 1 < gaps.size(); ++k) {
        std::ostringstream name;
        name << "increase " << epsilons[k] << "->" << epsilons[k + 1];
        summary.require(name.str(), gaps[k + 1] - gaps[k], 0.0);
    }
    summary.finalize();
    reports.push_back(std::move(summary));
    return reports;
}

VerificationReport revolution_diagnostics(const RevolutionOptions& opts) {
    if (opts.T_list.empty() || !std::is_sorted(opts.T_list.begin(), opts.T_list.end())) {
        throw std::invalid_argument("T_list must be nonempty and ascending");
    }
    if (opts.radii.empty() || !std::is_sorted(opts.radii.begin(), opts.radii.end())) {
        throw std::invalid_argument("radii must be nonempty and ascending");
    }
    for (double T : opts.T_list) {
        if (!std::isfinite(T) || !(T > 1.0)) throw std::invalid_argument("T values must exceed 1");
    }

    VerificationReport rep;
    rep.check = "revolution";
    rep.space = ModelDescriptor::revolution(opts.T_list.back(), opts.n).to_string();
    rep.input("n", static_cast<double>(opts.n));

    const auto area = revolution::total_area();
    if (!(area.relative_gap <= 1e-6)) throw std::runtime_error("area quadratures disagree beyond 1e-6");
    rep.value("volume", area.volume);
    rep.value("volume_alternate", area.alternate);
    rep.value("volume_relative_gap", area.relative_gap);

    // F is even, so t >= 0 covers both sides.
    constexpr double kStep = 1e-3;
    double inf_outer = std::numeric_limits<double>::infinity();
    double inf_inner = std::numeric_limits<double>::infinity();
    const double t_end = opts.T_list.back();
    for (std::size_t k = 0;; ++k) {
        const double t = kStep * static_cast<double>(k);
        if (t > t_end) break;
        const double kappa = revolution::discrete_gaussian_curvature(t, kStep);
        if (t > 1.0) inf_outer = std::min(inf_outer, kappa);
        else inf_inner = std::min(inf_inner, kappa);
    }
    rep.value("curvature_inf_outer", inf_outer);
    rep.value("curvature_inf_inner", inf_inner);
    rep.require("curvature_floor", inf_outer - opts.curvature_floor, 0.0, "|t| > 1");

    // Bands {|s| < r} around the waist in arclength s.
    std::vector<double> mu;
    for (double r : opts.radii) {
        const double tail = revolution::tail_area(revolution::arclength_inverse(r));
        mu.push_back(-std::log(tail) / r);
        rep.value(indexed("mu_estimate", r), mu.back());
    }
    for (std::size_t k = 0; k + 1 < mu.size(); ++k) {
        rep.require(indexed("mu_decreasing", opts.radii[k + 1]), mu[k] - mu[k + 1], 0.0);
    }
    for (std::size_t k = 0; k < mu.size(); ++k) {
        if (opts.radii[k] >= 1e3) rep.require(indexed("mu_small", opts.radii[k]), opts.mu_ceiling - mu[k], 0.0);
    }

    std::vector<double> lambdas(opts.T_list.size());
    parallel_for(opts.T_list.size(), [&](std::size_t k) {
        lambdas[k] = bottom_eigenvalue(build_space(ModelDescriptor::revolution(opts.T_list[k], opts.n)));
    });
    for (std::size_t k = 0; k < lambdas.size(); ++k) rep.value(indexed("lambda1", opts.T_list[k]), lambdas[k]);
    for (std::size_t k = 0; k + 1 < lambdas.size(); ++k) {
        rep.require(indexed("lambda1_decreasing", opts.T_list[k + 1]), lambdas[k] - lambdas[k + 1], 0.0);
    }
    if (opts.T_list.back() >= 40.0) rep.require("lambda1_small", opts.lambda_ceiling - lambdas.back(), 0.0);
    rep.finalize();
    return rep;
}

}  // namespace cheegerlab
