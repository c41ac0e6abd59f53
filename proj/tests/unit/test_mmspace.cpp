#include "cheegerlab/kernels.hpp"
#include "cheegerlab/mmspace.hpp"
#include "generators.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

using namespace cheegerlab;

namespace {

constexpr double kPi = std::numbers::pi;

double meridian_profile(double t) {
    const double a = std::abs(t);
    if (a > 1.0) return std::exp(-std::sqrt(a));
    return std::exp(-1.0) * (11.0 / 8.0 - a * a / 2.0 + a * a * a * a / 8.0);
}

double meridian_slope(double t) {
    const double a = std::abs(t);
    const double s = t < 0 ? -1.0 : 1.0;
    if (a > 1.0) return -s * std::exp(-std::sqrt(a)) / (2.0 * std::sqrt(a));
    return s * std::exp(-1.0) * (-a + a * a * a / 2.0);
}

}  // namespace

TEST_SUITE("mmspace") {

TEST_CASE("descriptor text round trip and defaults") {
    const auto g = ModelDescriptor::parse("gaussian:K=4");
    CHECK(g.param("K") == 4.0);
    CHECK(g.param("R") == 4.0);
    CHECK(g.nodes() == 4001);
    CHECK(ModelDescriptor::parse(g.to_string()) == g);
    CHECK(ModelDescriptor::parse("gaussian:R=6,K=4").param("R") == 6.0);
    const auto u = ModelDescriptor::parse("uniform");
    CHECK(u.param("L") == doctest::Approx(kPi));
    CHECK(u.nodes() == 2001);
    for (const char* name : {"expx2", "revolution", "hyperbolic_radial", "perturbed_gaussian"}) {
        const auto d = ModelDescriptor::parse(name);
        CHECK(ModelDescriptor::parse(d.to_string()) == d);
    }
    CHECK(model_catalog().size() == 6);
}

TEST_CASE("descriptor validation") {
    CHECK_THROWS_AS(ModelDescriptor::parse("uniform:L=-1"), std::invalid_argument);
    CHECK_THROWS_AS(ModelDescriptor::parse("uniform:n=2"), std::invalid_argument);
    CHECK_THROWS_AS(ModelDescriptor::parse("uniform:n=10.5"), std::invalid_argument);
    CHECK_THROWS_AS(ModelDescriptor::parse("uniform:Q=1"), std::invalid_argument);
    CHECK_THROWS_AS(ModelDescriptor::parse("perturbed_gaussian:eps=-0.1"), std::invalid_argument);
    CHECK_THROWS_AS(ModelDescriptor::parse("gaussian:K=0"), std::invalid_argument);
    CHECK_THROWS_AS(ModelDescriptor::parse("torus"), std::invalid_argument);
    CHECK_THROWS_AS(ModelDescriptor::parse("gaussian:K=abc"), std::invalid_argument);
    CHECK_THROWS_AS(ModelDescriptor::parse("expx2:R=0"), std::invalid_argument);
}

TEST_CASE("uniform grid") {
    const auto grid = build_space(ModelDescriptor::parse("uniform"));
    CHECK(grid.measure_mode() == MeasureMode::Probability);
    CHECK(grid.bc() == BoundaryCondition::Neumann);
    double total = 0.0;
    for (double m : grid.masses()) total += m;
    CHECK(std::abs(total - 1.0) <= 1e-12);
    for (double w : grid.iface_weights()) CHECK(w == doctest::Approx(1.0 / kPi).epsilon(1e-12));
    const auto half = measure_and_perimeter(grid, DiscreteSet({{0, 999}}));
    CHECK(half.perimeter == doctest::Approx(1.0 / kPi).epsilon(1e-12));
    CHECK(half.measure == doctest::Approx(0.5).epsilon(1e-3));
}

TEST_CASE("Gaussian grid: tail mass and central density") {
    const auto grid = build_space(ModelDescriptor::parse("gaussian:K=1,R=8,n=4001"));
    CHECK(2.0 * kernels::gaussian_tail(1.0, 8.0) < 1e-13);
    // The node at 0 is index 2000; interface weights on either side average
    // the density there with its neighbour.
    const double w = 0.5 * (grid.iface_weights()[1999] + grid.iface_weights()[2000]);
    CHECK(w == doctest::Approx(1.0 / std::sqrt(2.0 * kPi)).epsilon(1e-5));
    std::vector<IndexInterval> left{{0, 1999}};
    const auto A = measure_and_perimeter(grid, DiscreteSet(left));
    // {x < 0} plus half the mass of the centre node is exactly 1/2 by symmetry.
    CHECK(A.measure + 0.5 * grid.masses()[2000] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(std::abs(A.perimeter - 0.398942) <= 1e-3);
}

TEST_CASE("revolution grid mass matches the area integral") {
    const auto grid = build_space(ModelDescriptor::parse("revolution:T=40,n=8001"));
    using boost::math::quadrature::gauss_kronrod;
    auto area = [](double t) { return 2.0 * kPi * meridian_profile(t) * std::sqrt(1.0 + std::pow(meridian_slope(t), 2)); };
    double err = 0.0;
    const double exact = 2.0 * (gauss_kronrod<double, 61>::integrate(area, 0.0, 1.0, 15, 1e-14, &err) +
                                gauss_kronrod<double, 61>::integrate(area, 1.0, 40.0, 20, 1e-14, &err));
    CHECK(grid.total_mass() == doctest::Approx(exact).epsilon(1e-6));
    // Arclength coordinate: total length exceeds the parameter length 80.
    CHECK(grid.nodes().back() - grid.nodes().front() > 80.0);
}

TEST_CASE("sets: merge, complement, mask and range checks") {
    const DiscreteSet s({{5, 7}, {0, 2}, {3, 4}});
    REQUIRE(s.intervals().size() == 1);
    CHECK(s.intervals()[0] == IndexInterval{0, 7});
    CHECK(s.complement(10) == DiscreteSet({{8, 9}}));
    CHECK(DiscreteSet().complement(4) == DiscreteSet({{0, 3}}));

    testkit::SplitMix rng{3};
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 1 + rng.index(30);
        std::vector<char> raw(n);
        for (auto& b : raw) b = rng.uniform() < 0.5;
        std::vector<bool> mask_vec(raw.begin(), raw.end());
        bool buf[64];
        for (std::size_t i = 0; i < n; ++i) buf[i] = raw[i];
        const auto set = DiscreteSet::from_mask(std::span<const bool>(buf, n));
        std::size_t count = 0;
        for (std::size_t i = 0; i < n; ++i) {
            CHECK(set.contains(i) == static_cast<bool>(raw[i]));
            count += raw[i];
        }
        CHECK(set.cardinality() == count);
        CHECK(set.complement(n).complement(n) == set);
        for (std::size_t k = 0; k + 1 < set.intervals().size(); ++k) {
            CHECK(set.intervals()[k].last + 1 < set.intervals()[k + 1].first);
        }
    }

    const auto grid = build_space(ModelDescriptor::parse("uniform:n=11"));
    CHECK_THROWS_AS(measure_and_perimeter(grid, DiscreteSet({{5, 11}})), std::out_of_range);
    const auto empty = measure_and_perimeter(grid, DiscreteSet());
    CHECK(empty.measure == 0.0);
    CHECK(empty.perimeter == 0.0);
    const auto all = measure_and_perimeter(grid, DiscreteSet({{0, 10}}));
    CHECK(all.perimeter == 0.0);
    CHECK(all.measure == doctest::Approx(1.0));
}

TEST_CASE("Dirichlet ends count as perimeter") {
    const auto grid = build_space(ModelDescriptor::parse("expx2:R=2,n=21"));
    const auto touching = measure_and_perimeter(grid, DiscreteSet({{0, 4}}));
    CHECK(touching.perimeter == doctest::Approx(grid.boundary_weight(Side::Left) + grid.iface_weights()[4]));
    CHECK(grid.boundary_weight(Side::Left) == doctest::Approx(std::exp(2.0)));
}

TEST_CASE("total variation basics") {
    const auto grid = build_space(ModelDescriptor::parse("gaussian:n=101"));
    CHECK(total_variation(grid, DiscreteFunction(std::vector<double>(101, 3.0))) == 0.0);
    const DiscreteSet A({{10, 40}, {60, 70}});
    CHECK(total_variation(grid, DiscreteFunction::indicator(A, 101)) ==
          doctest::Approx(measure_and_perimeter(grid, A).perimeter).epsilon(1e-14));
    // Dirichlet: the exterior is pinned to 0.
    const auto dgrid = build_space(ModelDescriptor::parse("expx2:R=2,n=21"));
    const auto one = DiscreteFunction(std::vector<double>(21, 1.0));
    CHECK(total_variation(dgrid, one) ==
          doctest::Approx(dgrid.boundary_weight(Side::Left) + dgrid.boundary_weight(Side::Right)));
}

TEST_CASE("coarea identity on random functions") {
    for (auto mode : {0, 1}) {
        testkit::SplitMix rng{100 + static_cast<std::uint64_t>(mode)};
        const auto grid = mode == 0 ? build_space(ModelDescriptor::parse("uniform:n=500"))
                                    : build_space(ModelDescriptor::parse("expx2:R=3,n=500"));
        for (int trial = 0; trial < 100; ++trial) {
            const auto f = testkit::random_function(rng, grid.size(), trial % 2 == 0 ? 0 : 7);
            const double tv = total_variation(grid, f);
            const auto levels = coarea_decompose(grid, f);
            CHECK(std::abs(coarea_integral(levels) - tv) <= 1e-12 * tv);
        }
    }
}

TEST_CASE("coarea: level counts and the tent function") {
    const auto grid = build_space(ModelDescriptor::parse("gaussian:n=801"));
    const DiscreteSet A({{100, 300}});
    const auto levels = coarea_decompose(grid, DiscreteFunction::indicator(A, 801));
    REQUIRE(levels.size() == 1);
    CHECK(levels[0].perimeter == doctest::Approx(measure_and_perimeter(grid, A).perimeter));
    CHECK(levels[0].width == 1.0);

    testkit::SplitMix rng{8};
    const auto f = testkit::random_function(rng, 801, 5);
    std::vector<double> distinct(f.values().begin(), f.values().end());
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    CHECK(coarea_decompose(grid, f).size() == distinct.size() - 1);

    std::vector<double> tent(801);
    for (std::size_t i = 0; i < 801; ++i) tent[i] = std::max(1.0 - std::abs(grid.nodes()[i]), 0.0);
    const DiscreteFunction t(tent);
    const double tv = total_variation(grid, t);
    CHECK(std::abs(coarea_integral(coarea_decompose(grid, t)) - tv) <= 1e-12 * tv);
}

TEST_CASE("1-Lipschitz post-composition does not increase total variation") {
    testkit::SplitMix rng{21};
    for (int trial = 0; trial < 100; ++trial) {
        testkit::GridShape shape;
        shape.n = 5 + rng.index(60);
        if (trial % 3 == 0) shape.ends.right = BoundaryCondition::Dirichlet;
        const auto grid = testkit::random_grid(rng, shape);
        const auto f = testkit::random_function(rng, grid.size());
        const double a = rng.uniform(-1.0, 0.0);
        const double b = rng.uniform(0.0, 1.0);
        std::vector<double> clamped(f.size()), absval(f.size());
        for (std::size_t i = 0; i < f.size(); ++i) {
            clamped[i] = std::clamp(f[i], a, b);
            absval[i] = std::abs(f[i]);
        }
        const double tv = total_variation(grid, f);
        CHECK(total_variation(grid, DiscreteFunction(clamped)) <= tv * (1.0 + 1e-14));
        CHECK(total_variation(grid, DiscreteFunction(absval)) <= tv * (1.0 + 1e-14));
    }
}

TEST_CASE("Cheeger search matches brute force over the same candidate class") {
    testkit::SplitMix rng{77};
    for (int trial = 0; trial < 60; ++trial) {
        testkit::GridShape shape;
        shape.n = 4 + rng.index(9);
        if (trial % 4 == 1) shape.ends.left = BoundaryCondition::Dirichlet;
        if (trial % 4 == 2) shape.mode = MeasureMode::InfiniteTruncated;
        if (trial % 4 == 3) shape.ends.right = BoundaryCondition::Dirichlet;
        const auto grid = testkit::random_grid(rng, shape);
        const int single_runs = shape.mode == MeasureMode::InfiniteTruncated ? 1 : 1;
        const auto brute1 = testkit::brute_force_cheeger(grid, single_runs);
        const auto found = cheeger_search(grid, {.two_interval_unions = false, .profile_bins = 8, .workers = 1});
        CHECK(found.h == doctest::Approx(brute1.h).epsilon(1e-13));
        const auto opt = measure_and_perimeter(grid, found.optimizer);
        CHECK(opt.perimeter / opt.measure == doctest::Approx(found.h).epsilon(1e-13));

        if (shape.mode != MeasureMode::InfiniteTruncated) {
            const auto brute2 = testkit::brute_force_cheeger(grid, 2);
            const auto two = cheeger_search(grid, {.two_interval_unions = true, .profile_bins = 8, .workers = 1});
            CHECK(two.h == doctest::Approx(brute2.h).epsilon(1e-13));
            CHECK(two.h <= found.h + 1e-15);
        }
    }
}

TEST_CASE("Cheeger search: uniform and Gaussian examples") {
    const auto uniform = build_space(ModelDescriptor::parse("uniform"));
    const auto u = cheeger_search(uniform);
    CHECK(std::abs(u.h - 2.0 / kPi) <= 1e-3);
    REQUIRE(u.optimizer.intervals().size() == 1);
    // One of the two mirror-image halves.
    const auto ui = u.optimizer.intervals()[0];
    CHECK((ui == IndexInterval{0, 999} || ui == IndexInterval{1001, 2000}));

    const auto gaussian = build_space(ModelDescriptor::parse("gaussian"));
    const auto g = cheeger_search(gaussian);
    CHECK(std::abs(g.h - std::sqrt(2.0 / kPi)) <= 2e-3);
    REQUIRE(g.optimizer.intervals().size() == 1);
    const auto iv = g.optimizer.intervals()[0];
    const bool half_line = iv.first == 0 || iv.last == gaussian.size() - 1;
    CHECK(half_line);
    const std::size_t cut = iv.first == 0 ? iv.last : iv.first;
    CHECK(std::abs(gaussian.nodes()[cut]) <= 0.01);
}

TEST_CASE("Cheeger search is independent of the worker count") {
    const auto grid = build_space(ModelDescriptor::parse("perturbed_gaussian:eps=0.03,n=601"));
    const auto one = cheeger_search(grid, {.two_interval_unions = false, .profile_bins = 24, .workers = 1});
    for (std::size_t w : {2, 3, 7}) {
        const auto many = cheeger_search(grid, {.two_interval_unions = false, .profile_bins = 24, .workers = w});
        CHECK(many.h == one.h);
        CHECK(many.optimizer == one.optimizer);
        CHECK(many.candidates == one.candidates);
        REQUIRE(many.profile.size() == one.profile.size());
        for (std::size_t k = 0; k < one.profile.size(); ++k) CHECK(many.profile[k].perimeter == one.profile[k].perimeter);
    }
}

TEST_CASE("expx2: bounded optimiser, two-digit convergence in n") {
    const auto coarse = build_space(ModelDescriptor::parse("expx2:R=4,n=2001"));
    const auto fine = build_space(ModelDescriptor::parse("expx2:R=4,n=4001"));
    const auto a = cheeger_search(coarse);
    const auto b = cheeger_search(fine);
    REQUIRE(a.optimizer.intervals().size() == 1);
    const auto iv = a.optimizer.intervals()[0];
    CHECK(iv.first > 0);
    CHECK(iv.last < coarse.size() - 1);
    CHECK(std::abs(a.h - b.h) <= 0.005 * a.h);
}

TEST_CASE("expx2: widening the window never raises h") {
    // Most of the mass sits in the tails, where interval masses computed from
    // left-anchored prefix sums would cancel catastrophically.
    double prev = INFINITY;
    for (double R : {4.0, 6.0, 8.0}) {
        const auto grid = build_space(ModelDescriptor::expx2(R, static_cast<std::size_t>(500 * R) + 1));
        const auto r = cheeger_search(grid);
        CHECK(r.h <= prev * (1.0 + 1e-12));
        CHECK(r.measure == doctest::Approx(measure_and_perimeter(grid, r.optimizer).measure).epsilon(1e-12));
        prev = r.h;
    }
}

TEST_CASE("scaling law: h scales by 1/alpha, optimiser unchanged") {
    const auto grid = build_space(ModelDescriptor::parse("perturbed_gaussian:eps=0.05,n=401"));
    const auto base = cheeger_search(grid);
    for (auto [alpha, beta] : {std::pair{2.0, 1.0}, std::pair{0.5, 3.0}, std::pair{1.7, 0.2}}) {
        const auto scaled = cheeger_search(grid.scaled(alpha, beta));
        CHECK(scaled.h == doctest::Approx(base.h / alpha).epsilon(1e-12));
        // The density is even, so rounding may pick the mirror image.
        const auto mirrored = [&](const DiscreteSet& s) {
            std::vector<IndexInterval> out;
            for (const auto& iv : s.intervals()) out.push_back({grid.size() - 1 - iv.last, grid.size() - 1 - iv.first});
            return DiscreteSet(out);
        };
        CHECK((scaled.optimizer == base.optimizer || scaled.optimizer == mirrored(base.optimizer)));
    }
    CHECK(grid.scaled(2.0, 1.0).k_tag().value() == doctest::Approx(0.25));
}

TEST_CASE("empirical isoperimetric profile is superlinear") {
    for (const char* name : {"gaussian:n=2001", "uniform"}) {
        const auto r = cheeger_search(build_space(ModelDescriptor::parse(name)));
        std::vector<double> ratios;
        for (const auto& bin : r.profile) {
            if (bin.measure > 0.0) ratios.push_back(bin.perimeter / bin.measure);
        }
        REQUIRE(ratios.size() > 10);
        CHECK(ratios.front() > 10.0 * ratios.back());
        // On the uniform grid the end half-masses make small bins alternate
        // between end and interior sets; the Gaussian profile is strictly monotone.
        if (std::string_view(name).starts_with("gaussian")) {
            for (std::size_t k = 0; k + 1 < ratios.size(); ++k) CHECK(ratios[k] > ratios[k + 1]);
        }
    }
}

TEST_CASE("Gaussian candidates satisfy the isoperimetric inequality") {
    const auto grid = build_space(ModelDescriptor::parse("gaussian:n=801"));
    double worst = INFINITY;
    for_each_candidate(grid, [&](const CheegerCandidate& c) {
        worst = std::min(worst, c.perimeter - kernels::eval_I(1.0, c.measure));
    });
    CHECK(worst >= -1e-3);
}

TEST_CASE("grid CSV export") {
    const auto grid = build_space(ModelDescriptor::parse("uniform:n=3"));
    const auto csv = grid.to_csv();
    CHECK(csv.rfind("x,mass,iface_weight\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);
}

}  // TEST_SUITE
