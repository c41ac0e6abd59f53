#include "cheegerlab/plaplacian.hpp"
#include "cheegerlab/spectral.hpp"
#include "generators.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

using namespace cheegerlab;

namespace {

constexpr double kPi = std::numbers::pi;

// Neumann eigenvalue of the one-dimensional p-Laplacian on an interval of
// length L: half a period of sin_p, with pi_p = 2 pi / (p sin(pi / p)).
double interval_lambda(double p, double L) {
    const double pi_p = 2.0 * kPi / (p * std::sin(kPi / p));
    return (p - 1.0) * std::pow(pi_p / L, p);
}

PEigenOptions quick(std::size_t restarts = 4) {
    PEigenOptions o;
    o.restarts = restarts;
    o.workers = 1;
    return o;
}

}  // namespace

TEST_SUITE("plaplacian") {

TEST_CASE("energy, norm and constraint on small vectors") {
    const auto grid = build_space(ModelDescriptor::uniform(2.0, 3));
    const std::vector<double> f{0.0, 1.0, 3.0};
    // Spacing 1, density 1/2 at both interfaces: sum w h |df/h|^p.
    CHECK(p_energy(grid, f, 2.0) == doctest::Approx(0.5 * 1.0 + 0.5 * 4.0));
    CHECK(p_energy(grid, f, 3.0) == doctest::Approx(0.5 * 1.0 + 0.5 * 8.0));
    // Masses 1/4, 1/2, 1/4.
    CHECK(p_norm_power(grid, f, 2.0) == doctest::Approx(0.5 + 0.25 * 9.0));
    CHECK(p_constraint(grid, std::vector<double>{-1.0, 0.0, 1.0}, 3.0) == doctest::Approx(0.0));
    CHECK(p_constraint(grid, f, 2.0) == doctest::Approx(0.5 + 0.75));
}

TEST_CASE("uniform interval matches the closed-form p-eigenvalue") {
    const double L = kPi;
    const auto grid = build_space(ModelDescriptor::uniform(L, 801));
    for (double p : {1.5, 2.0, 3.0, 5.0}) {
        const auto r = lambda_1p(grid, p, quick());
        INFO("p = " << p);
        CHECK(r.value == doctest::Approx(interval_lambda(p, L)).epsilon(1e-3));
        CHECK(r.converged);
    }
}

TEST_CASE("p = 2 agrees with the linear spectrum") {
    for (const char* name : {"gaussian:n=801", "perturbed_gaussian:eps=0.1,n=801"}) {
        const auto grid = build_space(ModelDescriptor::parse(name));
        const double lambda1 = solve_spectrum(assemble_operator(grid), 2).eigenvalues[1];
        const auto r = lambda_1p(grid, 2.0, quick());
        CHECK(r.value == doctest::Approx(lambda1).epsilon(1e-6));
    }
}

TEST_CASE("p = 1 is the Cheeger constant with an indicator minimiser") {
    const auto grid = build_space(ModelDescriptor::parse("gaussian:n=801"));
    const auto cheeger = cheeger_search(grid);
    const auto r = lambda_1p(grid, 1.0, quick());
    CHECK(r.value == cheeger.h);
    CHECK(std::isnan(r.constraint_residual));
    const double level = 1.0 / cheeger.measure;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        CHECK(r.minimizer[i] == (cheeger.optimizer.contains(i) ? level : 0.0));
    }
}

TEST_CASE("minimiser invariants") {
    testkit::SplitMix rng{2};
    for (int trial = 0; trial < 4; ++trial) {
        testkit::GridShape shape;
        shape.n = 40 + rng.index(40);
        shape.mode = MeasureMode::Probability;
        const auto grid = testkit::random_grid(rng, shape);
        const double p = rng.uniform(1.3, 4.0);
        const auto r = lambda_1p(grid, p, quick());
        const auto f = r.minimizer.values();
        const double norm = p_norm_power(grid, f, p);
        CHECK(r.constraint_residual <= 1e-10);
        CHECK(std::abs(p_constraint(grid, f, p)) <= 1e-10 * std::pow(norm, (p - 1.0) / p));
        CHECK(r.value == doctest::Approx(p_energy(grid, f, p) / norm).epsilon(1e-12));
        CHECK(r.restarts_agreeing >= 1);
        CHECK(r.restarts_agreeing <= 4);
        // The minimiser changes sign.
        CHECK(*std::min_element(f.begin(), f.end()) < 0.0);
        CHECK(*std::max_element(f.begin(), f.end()) > 0.0);
    }
}

TEST_CASE("a perturbed constrained function never beats the minimum") {
    const auto grid = build_space(ModelDescriptor::parse("perturbed_gaussian:n=401"));
    const double p = 3.0;
    const auto r = lambda_1p(grid, p, quick());
    testkit::SplitMix rng{9};
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> g(r.minimizer.values().begin(), r.minimizer.values().end());
        for (double& v : g) v += 1e-3 * rng.uniform(-1.0, 1.0);
        // Restore the constraint with the recentering shift at q = p + tiny.
        const auto rec = recentering_shift(grid, DiscreteFunction(g), p - 1e-9, p);
        const auto gamma = rec.gamma_q.values();
        const double q = p_energy(grid, gamma, p) / p_norm_power(grid, gamma, p);
        CHECK(q >= r.value * (1.0 - 1e-6));
    }
}

TEST_CASE("input errors") {
    const auto neumann = build_space(ModelDescriptor::uniform(1.0, 51));
    CHECK_THROWS_AS(lambda_1p(neumann, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(lambda_1p(neumann, 8.5), std::invalid_argument);
    CHECK_THROWS_AS(lambda_1p(neumann, std::nan("")), std::invalid_argument);
    CHECK_THROWS_AS(lambda_1p(build_space(ModelDescriptor::parse("expx2:n=51")), 2.0), std::invalid_argument);
    CHECK_THROWS_AS(lambda_1p(build_space(ModelDescriptor::parse("hyperbolic_radial:n=51")), 2.0),
                    std::invalid_argument);
    const DiscreteFunction constant(std::vector<double>(51, 2.0));
    CHECK_THROWS_AS(recentering_shift(neumann, constant, 2.0, 3.0), std::invalid_argument);
    const DiscreteFunction ramp(std::vector<double>(neumann.nodes().begin(), neumann.nodes().end()));
    CHECK_THROWS_AS(recentering_shift(neumann, ramp, 3.0, 2.0), std::invalid_argument);
    CHECK_THROWS_AS(recentering_shift(neumann, ramp, 1.0, 2.0), std::invalid_argument);
    CHECK_THROWS_AS(recentering_shift(neumann, ramp, 2.0, 9.0), std::invalid_argument);
    CHECK_THROWS_AS(monotonicity_sweep(neumann, {2.0, 1.5}), std::invalid_argument);
}

TEST_CASE("recentering shift: constraint, shift and scale covariance, chain lower bound") {
    const auto grid = build_space(ModelDescriptor::uniform(kPi, 201));
    const double lambda2 = solve_spectrum(assemble_operator(grid), 2).eigenvalues[1];
    testkit::SplitMix rng{61};
    for (int trial = 0; trial < 60; ++trial) {
        const double q = rng.uniform(2.2, 6.0);
        const auto f = testkit::random_function(rng, grid.size(), trial % 3 == 0 ? 4 : 0);
        const auto r = recentering_shift(grid, f, 2.0, q);
        CHECK(r.constraint_residual <= 1e-10);
        CHECK(std::abs(p_constraint(grid, r.gamma.values(), 2.0)) <= 1e-10);
        CHECK(p_norm_power(grid, r.gamma_q.values(), q) == doctest::Approx(1.0).epsilon(1e-12));
        // gamma has unit p-norm because |gamma|^p = |gamma_q|^q.
        CHECK(p_norm_power(grid, r.gamma.values(), 2.0) == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(r.chain_middle >= lambda2 - 1e-8);
        CHECK(r.chain_left >= lambda2 - 1e-8);

        std::vector<double> moved(f.values().begin(), f.values().end());
        for (double& v : moved) v = 3.0 * v + 0.7;
        const auto r2 = recentering_shift(grid, DiscreteFunction(moved), 2.0, q);
        CHECK(r2.shift == doctest::Approx(3.0 * r.shift - 0.7).epsilon(1e-9));
        for (std::size_t i = 0; i < grid.size(); i += 17) {
            CHECK(std::abs(r2.gamma[i] - r.gamma[i]) <= 1e-9);
        }
    }
}

TEST_CASE("chain on the q-minimiser: left >= middle >= lambda_p") {
    const auto grid = build_space(ModelDescriptor::parse("perturbed_gaussian:n=401"));
    const double p = 2.0, q = 3.0;
    const auto fq = lambda_1p(grid, q, quick());
    const auto fp = lambda_1p(grid, p, quick());
    const auto r = recentering_shift(grid, fq.minimizer, p, q);
    CHECK(r.chain_left == doctest::Approx(std::pow(q / p, p) * std::pow(fq.value, p / q)).epsilon(1e-6));
    CHECK(r.chain_left >= r.chain_middle);
    CHECK(r.chain_middle >= fp.value - 1e-8);
}

TEST_CASE("sweep is monotone on the catalogue examples") {
    for (const char* name : {"uniform:n=401", "gaussian:n=401"}) {
        const auto grid = build_space(ModelDescriptor::parse(name));
        const auto rows = monotonicity_sweep(grid, {1.0, 1.5, 2.0, 3.0}, quick());
        REQUIRE(rows.size() == 4);
        for (const auto& row : rows) CHECK(row.scaled == doctest::Approx(row.p * std::pow(row.value, 1.0 / row.p)));
        for (std::size_t k = 0; k + 1 < rows.size(); ++k) CHECK(rows[k + 1].scaled > rows[k].scaled);
        const auto rep = monotonicity_report(grid, rows, 1e-3);
        CHECK(rep.verdict == Verdict::Pass);

        const auto csv = sweep_csv(rows);
        CHECK(csv.rfind("p,lambda_1p,p_lambda_pow,restarts_agreeing\n", 0) == 0);
        CHECK(std::count(csv.begin(), csv.end(), '\n') == 5);
    }
}

TEST_CASE("a decreasing sweep fails the report") {
    const auto grid = build_space(ModelDescriptor::uniform(1.0, 11));
    std::vector<SweepRow> rows{{1.0, 2.0, 2.0, 1, true}, {2.0, 0.5, 2.0 * std::sqrt(0.5), 1, true}};
    CHECK(monotonicity_report(grid, rows).verdict == Verdict::Fail);
}

TEST_CASE("results do not depend on the worker count") {
    const auto grid = build_space(ModelDescriptor::parse("gaussian:n=301"));
    PEigenOptions one = quick(6);
    PEigenOptions many = quick(6);
    many.workers = 3;
    const auto a = lambda_1p(grid, 2.5, one);
    const auto b = lambda_1p(grid, 2.5, many);
    CHECK(a.value == b.value);
    CHECK(a.restarts_agreeing == b.restarts_agreeing);
    for (std::size_t i = 0; i < grid.size(); ++i) CHECK(a.minimizer[i] == b.minimizer[i]);
}

}  // TEST_SUITE
