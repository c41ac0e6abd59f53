#pragma once

// Discretised one-dimensional weighted spaces: model catalogue, lumped
// measures, sets with perimeter, total variation, coarea decomposition and the
// exhaustive Cheeger search.

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace cheegerlab {

enum class ModelKind { Uniform, Gaussian, Expx2, Revolution, HyperbolicRadial, PerturbedGaussian };

std::string_view model_name(ModelKind kind);

/// Model name plus named numeric parameters, kept in canonical order.
///
/// Text form: `name:key=value,key=value`, e.g. `gaussian:K=1,R=8,n=4001`.
/// Missing parameters take catalogue defaults; unknown keys are rejected.
class ModelDescriptor {
public:
    static ModelDescriptor uniform(double L, std::size_t n = 2001);
    static ModelDescriptor gaussian(double K, double R, std::size_t n = 4001);
    static ModelDescriptor expx2(double R, std::size_t n = 2001);
    static ModelDescriptor revolution(double T, std::size_t n = 8001);
    static ModelDescriptor hyperbolic_radial(double R, std::size_t n = 4001);
    static ModelDescriptor perturbed_gaussian(double eps, double R = 8.0, std::size_t n = 4001);

    /// Parses the text form; throws std::invalid_argument on malformed input,
    /// unknown keys or out-of-range values.
    static ModelDescriptor parse(std::string_view text);

    ModelKind kind() const { return kind_; }
    std::string_view name() const { return model_name(kind_); }
    const std::vector<std::pair<std::string, double>>& params() const { return params_; }

    double param(std::string_view key) const;
    bool has_param(std::string_view key) const;
    std::size_t nodes() const { return static_cast<std::size_t>(param("n")); }

    /// Copy with one parameter replaced (and re-validated).
    ModelDescriptor with(std::string_view key, double value) const;

    /// Canonical text form; numbers printed with round-trip precision.
    std::string to_string() const;

    /// Throws std::invalid_argument when a parameter is out of range.
    void validate() const;

    friend bool operator==(const ModelDescriptor&, const ModelDescriptor&) = default;

private:
    ModelDescriptor(ModelKind kind, std::vector<std::pair<std::string, double>> params);

    ModelKind kind_;
    std::vector<std::pair<std::string, double>> params_;
};

/// One-line summaries of every catalogue model with its defaults.
std::vector<std::string> model_catalog();

enum class BoundaryCondition { Neumann, Dirichlet };
enum class MeasureMode { Probability, Finite, InfiniteTruncated };
enum class Side { Left = 0, Right = 1 };

std::string_view to_string(BoundaryCondition bc);
std::string_view to_string(MeasureMode mode);

struct EndConditions {
    BoundaryCondition left = BoundaryCondition::Neumann;
    BoundaryCondition right = BoundaryCondition::Neumann;

    bool any_dirichlet() const {
        return left == BoundaryCondition::Dirichlet || right == BoundaryCondition::Dirichlet;
    }
};

/// Discretised weighted interval.
///
/// masses[i] is the lumped measure of node i; iface_weights[i] is the density
/// at the interface between nodes i and i+1. A Dirichlet end carries a
/// boundary weight equal to the density at the end node; it counts as
/// perimeter for sets touching that end. Neumann ends carry weight 0.
class WeightedGrid {
public:
    WeightedGrid(std::vector<double> nodes, std::vector<double> masses, std::vector<double> iface_weights,
                 EndConditions ends, std::array<double, 2> boundary_weights, std::optional<double> k_tag,
                 MeasureMode mode, ModelDescriptor model);

    std::size_t size() const { return nodes_.size(); }
    std::span<const double> nodes() const { return nodes_; }
    std::span<const double> masses() const { return masses_; }
    std::span<const double> iface_weights() const { return weights_; }
    double spacing(std::size_t i) const { return nodes_[i + 1] - nodes_[i]; }

    /// iface_weights[i] / spacing(i): the coefficient of (f_{i+1} - f_i)^2 in
    /// the Dirichlet form.
    double conductance(std::size_t i) const { return weights_[i] / spacing(i); }

    const EndConditions& ends() const { return ends_; }
    /// Dirichlet if either end is Dirichlet.
    BoundaryCondition bc() const;
    double boundary_weight(Side side) const { return boundary_weights_[static_cast<int>(side)]; }
    std::optional<double> k_tag() const { return k_tag_; }
    MeasureMode measure_mode() const { return mode_; }
    const ModelDescriptor& model() const { return model_; }
    double total_mass() const { return total_mass_; }

    /// Node coordinates scaled by alpha, masses by beta (densities by beta/alpha).
    WeightedGrid scaled(double alpha, double beta) const;

    /// Copy with a different declared curvature bound.
    WeightedGrid with_k_tag(std::optional<double> k) const;

    /// CSV with header `x,mass,iface_weight`; the last row has an empty weight.
    std::string to_csv() const;

private:
    std::vector<double> nodes_;
    std::vector<double> masses_;
    std::vector<double> weights_;
    EndConditions ends_;
    std::array<double, 2> boundary_weights_;
    std::optional<double> k_tag_;
    MeasureMode mode_;
    ModelDescriptor model_;
    double total_mass_ = 0.0;
};

/// Discretises a catalogue model. Masses are trapezoid integrals of the
/// density over the dual cells, interface weights are arithmetic means of the
/// adjacent nodal densities.
WeightedGrid build_space(const ModelDescriptor& model);

/// Closed index range [first, last].
struct IndexInterval {
    std::size_t first;
    std::size_t last;
    friend bool operator==(const IndexInterval&, const IndexInterval&) = default;
};

/// Union of disjoint index intervals; stored sorted with touching intervals merged.
class DiscreteSet {
public:
    DiscreteSet() = default;
    explicit DiscreteSet(std::vector<IndexInterval> intervals);

    static DiscreteSet from_mask(std::span<const bool> mask);

    const std::vector<IndexInterval>& intervals() const { return intervals_; }
    bool empty() const { return intervals_.empty(); }
    bool contains(std::size_t i) const;
    std::size_t cardinality() const;

    /// Complement inside {0, ..., n-1}.
    DiscreteSet complement(std::size_t n) const;

    friend bool operator==(const DiscreteSet&, const DiscreteSet&) = default;

private:
    std::vector<IndexInterval> intervals_;
};

struct SetMeasure {
    double measure = 0.0;
    double perimeter = 0.0;
};

/// Measure and perimeter of a set; throws std::out_of_range for indices
/// beyond the grid.
SetMeasure measure_and_perimeter(const WeightedGrid& grid, const DiscreteSet& set);

/// Node-indexed function.
class DiscreteFunction {
public:
    DiscreteFunction() = default;
    explicit DiscreteFunction(std::vector<double> values);

    static DiscreteFunction indicator(const DiscreteSet& set, std::size_t n);

    std::size_t size() const { return values_.size(); }
    std::span<const double> values() const { return values_; }
    std::vector<double>& mutable_values() { return values_; }
    double operator[](std::size_t i) const { return values_[i]; }

private:
    std::vector<double> values_;
};

/// sum_i w_{i+1/2} |f_{i+1} - f_i|, plus w_b |f_end| at Dirichlet ends
/// (the exterior is pinned to 0 there).
double total_variation(const WeightedGrid& grid, const DiscreteFunction& f);

struct CoareaLevel {
    double threshold;  ///< t: the level set is {f > t}
    double width;      ///< distance to the next distinct value
    double perimeter;  ///< Per({f > t})
    double measure;    ///< m({f > t})
};

/// Level-set decomposition of f over its distinct values (the exterior value
/// 0 joins the list on grids with a Dirichlet end). sum perimeter * width
/// equals total_variation(grid, f).
std::vector<CoareaLevel> coarea_decompose(const WeightedGrid& grid, const DiscreteFunction& f);

/// sum over levels of perimeter * width.
double coarea_integral(std::span<const CoareaLevel> levels);

/// One candidate of the Cheeger enumeration: the interval [first, last] or,
/// when `complement` is set, its complement.
struct CheegerCandidate {
    std::size_t first;
    std::size_t last;
    bool complement;
    double measure;
    double perimeter;

    DiscreteSet to_set(std::size_t n) const;
};

struct ProfileBin {
    double measure_lo;
    double measure_hi;
    double measure;    ///< measure of the minimising candidate
    double perimeter;  ///< minimal perimeter found in the bin
};

struct CheegerOptions {
    /// Also enumerate unions of two disjoint intervals (O(n^4); small n only).
    bool two_interval_unions = false;
    std::size_t profile_bins = 48;
    std::size_t workers = 0;  ///< 0 = worker_count()
};

struct CheegerResult {
    double h = 0.0;
    DiscreteSet optimizer;
    double measure = 0.0;
    double perimeter = 0.0;
    std::vector<ProfileBin> profile;
    std::size_t candidates = 0;
};

/// Calls visit for every admissible single-interval candidate: intervals and
/// their complements with 0 < m <= m(X)/2 on finite-measure grids, every
/// interval on truncated infinite-measure grids.
template <typename Visitor>
void for_each_candidate(const WeightedGrid& grid, Visitor&& visit);

/// Exhaustive minimisation of perimeter / measure over the candidate class.
/// Ties resolve to the smaller measure, then the leftmost start index.
CheegerResult cheeger_search(const WeightedGrid& grid, const CheegerOptions& opts = {});

// ---------------------------------------------------------------------------

namespace detail {

/// Mass prefix sums shifted to vanish at the lightest node, so that
/// prefix[j + 1] - prefix[i] = sum_{i<=k<=j} m_k. Anchoring at the lightest
/// node keeps interval masses accurate when the tails carry most of the mass,
/// as on truncated e^{x^2/2} grids.
std::vector<double> mass_prefix(const WeightedGrid& grid);

/// Perimeter contributions of a cut just left of node i (i = 0: left end)
/// and just right of node j (j = n-1: right end).
inline double left_cut(const WeightedGrid& grid, std::size_t i) {
    return i == 0 ? grid.boundary_weight(Side::Left) : grid.iface_weights()[i - 1];
}
inline double right_cut(const WeightedGrid& grid, std::size_t j) {
    return j + 1 == grid.size() ? grid.boundary_weight(Side::Right) : grid.iface_weights()[j];
}

template <typename Visitor>
void visit_rows(const WeightedGrid& grid, std::span<const double> prefix, std::size_t row_begin,
                std::size_t row_end, Visitor& visit) {
    const std::size_t n = grid.size();
    const double total = prefix[n] - prefix[0];
    const bool infinite = grid.measure_mode() == MeasureMode::InfiniteTruncated;
    const double half = 0.5 * total;
    for (std::size_t i = row_begin; i < row_end; ++i) {
        const double lcut = left_cut(grid, i);
        // Complement pieces: [0, i-1] and [j+1, n-1]; their outer ends
        // contribute Dirichlet weight when present.
        const double comp_left = i == 0 ? 0.0 : grid.iface_weights()[i - 1] + grid.boundary_weight(Side::Left);
        for (std::size_t j = i; j < n; ++j) {
            const double m = prefix[j + 1] - prefix[i];
            const double per = lcut + right_cut(grid, j);
            if (infinite) {
                if (m > 0.0) visit(CheegerCandidate{i, j, false, m, per});
                continue;
            }
            if (m > 0.0 && m <= half) visit(CheegerCandidate{i, j, false, m, per});
            const double cm = total - m;
            if (cm > 0.0 && cm <= half) {
                const double comp_right =
                    j + 1 == n ? 0.0 : grid.iface_weights()[j] + grid.boundary_weight(Side::Right);
                visit(CheegerCandidate{i, j, true, cm, comp_left + comp_right});
            }
        }
    }
}

}  // namespace detail

template <typename Visitor>
void for_each_candidate(const WeightedGrid& grid, Visitor&& visit) {
    const auto prefix = detail::mass_prefix(grid);
    detail::visit_rows(grid, prefix, 0, grid.size(), visit);
}

}  // namespace cheegerlab
