#pragma once

// Seeded generators and brute-force oracles shared by the unit and
// acceptance tests.

#include "cheegerlab/mmspace.hpp"

#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

namespace testkit {

struct SplitMix {
    std::uint64_t state;

    std::uint64_t next() {
        std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
    double uniform(double a, double b) { return a + (b - a) * uniform(); }
    std::size_t index(std::size_t n) { return static_cast<std::size_t>(next() % n); }
};

struct GridShape {
    std::size_t n = 12;
    cheegerlab::EndConditions ends{};
    cheegerlab::MeasureMode mode = cheegerlab::MeasureMode::Finite;
};

/// Jittered nodes, log-uniform masses and weights in [0.2, 5].
inline cheegerlab::WeightedGrid random_grid(SplitMix& rng, const GridShape& shape) {
    using namespace cheegerlab;
    std::vector<double> x(shape.n), m(shape.n), w(shape.n - 1);
    double pos = 0.0;
    for (std::size_t i = 0; i < shape.n; ++i) {
        x[i] = pos;
        pos += rng.uniform(0.5, 1.5);
        m[i] = std::exp(rng.uniform(std::log(0.2), std::log(5.0)));
    }
    for (double& v : w) v = std::exp(rng.uniform(std::log(0.2), std::log(5.0)));
    if (shape.mode == MeasureMode::Probability) {
        double total = 0.0;
        for (double v : m) total += v;
        for (double& v : m) v /= total;
        for (double& v : w) v /= total;
    }
    std::array<double, 2> boundary{
        shape.ends.left == BoundaryCondition::Dirichlet ? rng.uniform(0.2, 5.0) : 0.0,
        shape.ends.right == BoundaryCondition::Dirichlet ? rng.uniform(0.2, 5.0) : 0.0,
    };
    return WeightedGrid(std::move(x), std::move(m), std::move(w), shape.ends, boundary, std::nullopt, shape.mode,
                        ModelDescriptor::uniform(1.0, shape.n));
}

/// Values drawn from `levels` distinct integers (0 = continuous uniform).
inline cheegerlab::DiscreteFunction random_function(SplitMix& rng, std::size_t n, int levels = 0) {
    std::vector<double> f(n);
    for (double& v : f) {
        v = levels > 0 ? static_cast<double>(rng.index(static_cast<std::size_t>(levels))) : rng.uniform(-1.0, 1.0);
    }
    return cheegerlab::DiscreteFunction(std::move(f));
}

inline int runs(std::uint32_t mask, std::size_t n) {
    int r = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if ((mask >> i & 1U) && (i == 0 || !(mask >> (i - 1) & 1U))) ++r;
    }
    return r;
}

struct BruteCheeger {
    double h = std::numeric_limits<double>::infinity();
    std::uint32_t mask = 0;
};

/// Minimum of Per/m over every subset S such that S or its complement has at
/// most `max_runs` runs, with 0 < m(S) <= m(X)/2 (finite) or m(S) > 0.
inline BruteCheeger brute_force_cheeger(const cheegerlab::WeightedGrid& grid, int max_runs) {
    using namespace cheegerlab;
    const std::size_t n = grid.size();
    const double total = grid.total_mass();
    const bool infinite = grid.measure_mode() == MeasureMode::InfiniteTruncated;
    const std::uint32_t full = (1U << n) - 1U;
    BruteCheeger best;
    for (std::uint32_t mask = 1; mask <= full; ++mask) {
        const int r = runs(mask, n);
        const int rc = runs(full & ~mask, n);
        if (infinite ? r > max_runs : (r > max_runs && rc > max_runs)) continue;
        double m = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (mask >> i & 1U) m += grid.masses()[i];
        }
        if (!(m > 0.0) || (!infinite && m > 0.5 * total)) continue;
        double per = 0.0;
        for (std::size_t i = 0; i + 1 < n; ++i) {
            if ((mask >> i & 1U) != (mask >> (i + 1) & 1U)) per += grid.iface_weights()[i];
        }
        if (mask & 1U) per += grid.boundary_weight(Side::Left);
        if (mask >> (n - 1) & 1U) per += grid.boundary_weight(Side::Right);
        if (per / m < best.h) best = {per / m, mask};
    }
    return best;
}

}  // namespace testkit
