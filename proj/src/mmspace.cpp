#include "cheegerlab/mmspace.hpp"

#include "cheegerlab/kernels.hpp"
#include "cheegerlab/parallel.hpp"
#include "cheegerlab/report.hpp"
#include "cheegerlab/revolution.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace cheegerlab {

namespace {

constexpr double kPi = std::numbers::pi;

double parse_number(std::string_view text, std::string_view key) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(v)) {
        throw std::invalid_argument("parameter '" + std::string(key) + "' is not a finite number: '" +
                                    std::string(text) + "'");
    }
    return v;
}

struct ModelSpec {
    ModelKind kind;
    std::string_view name;
    std::vector<std::pair<std::string, double>> defaults;
};

const std::vector<ModelSpec>& model_specs() {
    static const std::vector<ModelSpec> specs = {
        {ModelKind::Uniform, "uniform", {{"L", kPi}, {"n", 2001}}},
        {ModelKind::Gaussian, "gaussian", {{"K", 1.0}, {"R", 8.0}, {"n", 4001}}},
        {ModelKind::Expx2, "expx2", {{"R", 4.0}, {"n", 2001}}},
        {ModelKind::Revolution, "revolution", {{"T", 40.0}, {"n", 8001}}},
        {ModelKind::HyperbolicRadial, "hyperbolic_radial", {{"R", 20.0}, {"n", 4001}}},
        {ModelKind::PerturbedGaussian, "perturbed_gaussian", {{"eps", 0.05}, {"R", 8.0}, {"n", 4001}}},
    };
    return specs;
}

const ModelSpec& spec_for(ModelKind kind) {
    for (const auto& s : model_specs()) {
        if (s.kind == kind) return s;
    }
    throw std::logic_error("unknown model kind");
}

std::vector<double> linspace(double a, double b, std::size_t n) {
    std::vector<double> x(n);
    const double step = (b - a) / static_cast<double>(n - 1);
    for (std::size_t i = 0; i < n; ++i) x[i] = a + step * static_cast<double>(i);
    x.back() = b;
    return x;
}

struct Sampled {
    std::vector<double> nodes;
    std::vector<double> rho;      // density at nodes
    std::vector<double> rho_mid;  // density at cell midpoints
};

Sampled sample_density(std::vector<double> nodes, const std::function<double(double)>& rho) {
    Sampled s;
    s.rho.resize(nodes.size());
    s.rho_mid.resize(nodes.size() - 1);
    for (std::size_t i = 0; i < nodes.size(); ++i) s.rho[i] = rho(nodes[i]);
    for (std::size_t i = 0; i + 1 < nodes.size(); ++i) s.rho_mid[i] = rho(0.5 * (nodes[i] + nodes[i + 1]));
    s.nodes = std::move(nodes);
    return s;
}

WeightedGrid assemble(const Sampled& s, EndConditions ends, std::optional<double> k_tag, MeasureMode mode,
                      const ModelDescriptor& model) {
    const std::size_t n = s.nodes.size();
    std::vector<double> masses(n, 0.0);
    std::vector<double> weights(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double h = s.nodes[i + 1] - s.nodes[i];
        masses[i] += 0.25 * h * (s.rho[i] + s.rho_mid[i]);
        masses[i + 1] += 0.25 * h * (s.rho[i + 1] + s.rho_mid[i]);
        weights[i] = 0.5 * (s.rho[i] + s.rho[i + 1]);
    }
    std::array<double, 2> boundary{
        ends.left == BoundaryCondition::Dirichlet ? s.rho.front() : 0.0,
        ends.right == BoundaryCondition::Dirichlet ? s.rho.back() : 0.0,
    };
    if (mode == MeasureMode::Probability) {
        double total = 0.0;
        for (double m : masses) total += m;
        for (double& m : masses) m /= total;
        for (double& w : weights) w /= total;
        for (double& b : boundary) b /= total;
    }
    return WeightedGrid(s.nodes, std::move(masses), std::move(weights), ends, boundary, k_tag, mode, model);
}

// Arclength coordinates of a uniform t-grid on the revolution meridian.
std::vector<double> meridian_nodes(const std::vector<double>& t) {
    using boost::math::quadrature::gauss;
    std::vector<double> x(t.size());
    const std::size_t mid = t.size() / 2;
    // Start from the node closest to t = 0 so the coordinate is centred.
    x[mid] = revolution::arclength(t[mid]);
    for (std::size_t i = mid; i + 1 < t.size(); ++i) {
        x[i + 1] = x[i] + gauss<double, 7>::integrate(revolution::arclength_element, t[i], t[i + 1]);
    }
    for (std::size_t i = mid; i > 0; --i) {
        x[i - 1] = x[i] - gauss<double, 7>::integrate(revolution::arclength_element, t[i - 1], t[i]);
    }
    return x;
}

}  // namespace

std::string_view model_name(ModelKind kind) { return spec_for(kind).name; }

ModelDescriptor::ModelDescriptor(ModelKind kind, std::vector<std::pair<std::string, double>> params)
    : kind_(kind), params_(std::move(params)) {
    validate();
}

ModelDescriptor ModelDescriptor::uniform(double L, std::size_t n) {
    return ModelDescriptor(ModelKind::Uniform, {{"L", L}, {"n", static_cast<double>(n)}});
}
ModelDescriptor ModelDescriptor::gaussian(double K, double R, std::size_t n) {
    return ModelDescriptor(ModelKind::Gaussian, {{"K", K}, {"R", R}, {"n", static_cast<double>(n)}});
}
ModelDescriptor ModelDescriptor::expx2(double R, std::size_t n) {
    return ModelDescriptor(ModelKind::Expx2, {{"R", R}, {"n", static_cast<double>(n)}});
}
ModelDescriptor ModelDescriptor::revolution(double T, std::size_t n) {
    return ModelDescriptor(ModelKind::Revolution, {{"T", T}, {"n", static_cast<double>(n)}});
}
ModelDescriptor ModelDescriptor::hyperbolic_radial(double R, std::size_t n) {
    return ModelDescriptor(ModelKind::HyperbolicRadial, {{"R", R}, {"n", static_cast<double>(n)}});
}
ModelDescriptor ModelDescriptor::perturbed_gaussian(double eps, double R, std::size_t n) {
    return ModelDescriptor(ModelKind::PerturbedGaussian, {{"eps", eps}, {"R", R}, {"n", static_cast<double>(n)}});
}

ModelDescriptor ModelDescriptor::parse(std::string_view text) {
    const auto colon = text.find(':');
    const std::string_view name = text.substr(0, colon);
    const ModelSpec* spec = nullptr;
    for (const auto& s : model_specs()) {
        if (s.name == name) spec = &s;
    }
    if (spec == nullptr) throw std::invalid_argument("unknown model '" + std::string(name) + "'");

    auto params = spec->defaults;
    bool explicit_R = false;
    if (colon != std::string_view::npos) {
        std::string_view rest = text.substr(colon + 1);
        while (!rest.empty()) {
            const auto comma = rest.find(',');
            const std::string_view item = rest.substr(0, comma);
            rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
            const auto eq = item.find('=');
            if (eq == std::string_view::npos || eq == 0) {
                throw std::invalid_argument("malformed parameter '" + std::string(item) + "'");
            }
            const std::string_view key = item.substr(0, eq);
            auto it = std::find_if(params.begin(), params.end(), [&](const auto& p) { return p.first == key; });
            if (it == params.end()) {
                throw std::invalid_argument("model '" + std::string(name) + "' has no parameter '" +
                                            std::string(key) + "'");
            }
            it->second = parse_number(item.substr(eq + 1), key);
            if (key == "R") explicit_R = true;
        }
    }
    // Gaussian default truncation scales with the standard deviation.
    if (spec->kind == ModelKind::Gaussian && !explicit_R) {
        const double K = params[0].second;
        if (K > 0.0) params[1].second = 8.0 / std::sqrt(K);
    }
    return ModelDescriptor(spec->kind, std::move(params));
}

double ModelDescriptor::param(std::string_view key) const {
    for (const auto& [k, v] : params_) {
        if (k == key) return v;
    }
    throw std::out_of_range("model '" + std::string(name()) + "' has no parameter '" + std::string(key) + "'");
}

bool ModelDescriptor::has_param(std::string_view key) const {
    return std::any_of(params_.begin(), params_.end(), [&](const auto& p) { return p.first == key; });
}

ModelDescriptor ModelDescriptor::with(std::string_view key, double value) const {
    auto params = params_;
    auto it = std::find_if(params.begin(), params.end(), [&](const auto& p) { return p.first == key; });
    if (it == params.end()) {
        throw std::invalid_argument("model '" + std::string(name()) + "' has no parameter '" + std::string(key) + "'");
    }
    it->second = value;
    return ModelDescriptor(kind_, std::move(params));
}

std::string ModelDescriptor::to_string() const {
    std::string out(name());
    char sep = ':';
    for (const auto& [k, v] : params_) {
        out += sep;
        out += k;
        out += '=';
        out += format_number(v);
        sep = ',';
    }
    return out;
}

void ModelDescriptor::validate() const {
    auto fail = [&](const std::string& msg) {
        throw std::invalid_argument("model '" + std::string(name()) + "': " + msg);
    };
    for (const auto& [k, v] : params_) {
        if (!std::isfinite(v)) fail("parameter " + k + " must be finite");
    }
    const double n = param("n");
    if (n != std::floor(n) || n < 3 || n > 5e6) fail("n must be an integer in [3, 5e6]");
    switch (kind_) {
        case ModelKind::Uniform:
            if (!(param("L") > 0.0)) fail("L must be positive");
            break;
        case ModelKind::Gaussian:
            if (!(param("K") > 0.0)) fail("K must be positive");
            if (!(param("R") > 0.0)) fail("R must be positive");
            break;
        case ModelKind::Expx2:
        case ModelKind::HyperbolicRadial:
            if (!(param("R") > 0.0)) fail("R must be positive");
            break;
        case ModelKind::Revolution:
            if (!(param("T") > 0.0)) fail("T must be positive");
            break;
        case ModelKind::PerturbedGaussian:
            if (param("eps") < 0.0) fail("eps must be nonnegative");
            if (!(param("R") > 0.0)) fail("R must be positive");
            break;
    }
}

std::vector<std::string> model_catalog() {
    std::vector<std::string> out;
    const char* notes[] = {
        "constant density on [0, L]; probability; Neumann; K_tag 0",
        "Gaussian density with variance 1/K on [-R, R]; probability; Neumann; K_tag K",
        "density e^{x^2/2} on [-R, R]; infinite measure truncated; Dirichlet; K_tag -1",
        "meridian of the surface with F(t) = e^{-sqrt|t|}, |t| <= T; finite; Neumann",
        "geodesic polar density 2 pi sinh r on [0, R]; infinite measure truncated; Dirichlet at R",
        "density e^{-(x^2/2 + eps x^4)} on [-R, R]; probability; Neumann; K_tag 1",
    };
    std::size_t k = 0;
    for (const auto& s : model_specs()) {
        out.push_back(ModelDescriptor::parse(s.name).to_string() + "  " + notes[k++]);
    }
    return out;
}

std::string_view to_string(BoundaryCondition bc) { return bc == BoundaryCondition::Neumann ? "NEUMANN" : "DIRICHLET"; }

std::string_view to_string(MeasureMode mode) {
    switch (mode) {
        case MeasureMode::Probability: return "PROBABILITY";
        case MeasureMode::Finite: return "FINITE";
        case MeasureMode::InfiniteTruncated: return "INFINITE_TRUNCATED";
    }
    return "?";
}

// --- WeightedGrid -----------------------------------------------------------

WeightedGrid::WeightedGrid(std::vector<double> nodes, std::vector<double> masses, std::vector<double> iface_weights,
                           EndConditions ends, std::array<double, 2> boundary_weights, std::optional<double> k_tag,
                           MeasureMode mode, ModelDescriptor model)
    : nodes_(std::move(nodes)),
      masses_(std::move(masses)),
      weights_(std::move(iface_weights)),
      ends_(ends),
      boundary_weights_(boundary_weights),
      k_tag_(k_tag),
      mode_(mode),
      model_(std::move(model)) {
    const std::size_t n = nodes_.size();
    if (n < 2) throw std::invalid_argument("grid needs at least two nodes");
    if (masses_.size() != n || weights_.size() != n - 1) throw std::invalid_argument("grid array sizes disagree");
    for (std::size_t i = 0; i + 1 < n; ++i) {
        if (!(nodes_[i + 1] > nodes_[i])) throw std::invalid_argument("grid nodes must be strictly increasing");
        if (!(weights_[i] > 0.0) || !std::isfinite(weights_[i])) {
            throw std::invalid_argument("interface weights must be positive and finite (density underflow?)");
        }
    }
    for (double m : masses_) {
        if (!(m > 0.0) || !std::isfinite(m)) throw std::invalid_argument("masses must be positive and finite");
        total_mass_ += m;
    }
    for (int s = 0; s < 2; ++s) {
        const bool dirichlet = (s == 0 ? ends_.left : ends_.right) == BoundaryCondition::Dirichlet;
        if (boundary_weights_[s] < 0.0 || (!dirichlet && boundary_weights_[s] != 0.0)) {
            throw std::invalid_argument("boundary weights must be nonnegative and vanish at Neumann ends");
        }
    }
    if (mode_ == MeasureMode::Probability && std::abs(total_mass_ - 1.0) > 1e-12) {
        throw std::invalid_argument("probability grid masses must sum to 1");
    }
}

BoundaryCondition WeightedGrid::bc() const {
    return ends_.any_dirichlet() ? BoundaryCondition::Dirichlet : BoundaryCondition::Neumann;
}

WeightedGrid WeightedGrid::scaled(double alpha, double beta) const {
    if (!(alpha > 0.0) || !(beta > 0.0)) throw std::invalid_argument("scaling factors must be positive");
    auto nodes = nodes_;
    auto masses = masses_;
    auto weights = weights_;
    auto boundary = boundary_weights_;
    for (double& x : nodes) x *= alpha;
    for (double& m : masses) m *= beta;
    for (double& w : weights) w *= beta / alpha;
    for (double& b : boundary) b *= beta / alpha;
    MeasureMode mode = mode_;
    if (mode == MeasureMode::Probability && beta != 1.0) mode = MeasureMode::Finite;
    std::optional<double> k;
    if (k_tag_) k = *k_tag_ / (alpha * alpha);
    return WeightedGrid(std::move(nodes), std::move(masses), std::move(weights), ends_, boundary, k, mode, model_);
}

WeightedGrid WeightedGrid::with_k_tag(std::optional<double> k) const {
    WeightedGrid copy = *this;
    copy.k_tag_ = k;
    return copy;
}

std::string WeightedGrid::to_csv() const {
    std::ostringstream out;
    out << "x,mass,iface_weight\n";
    for (std::size_t i = 0; i < size(); ++i) {
        out << format_number(nodes_[i]) << ',' << format_number(masses_[i]) << ',';
        if (i + 1 < size()) out << format_number(weights_[i]);
        out << '\n';
    }
    return out.str();
}

WeightedGrid build_space(const ModelDescriptor& model) {
    model.validate();
    const std::size_t n = model.nodes();
    const EndConditions neumann{};
    switch (model.kind()) {
        case ModelKind::Uniform: {
            const double L = model.param("L");
            auto s = sample_density(linspace(0.0, L, n), [L](double) { return 1.0 / L; });
            return assemble(s, neumann, 0.0, MeasureMode::Probability, model);
        }
        case ModelKind::Gaussian: {
            const double K = model.param("K");
            const double R = model.param("R");
            auto s = sample_density(linspace(-R, R, n), [K](double x) { return kernels::gaussian_density(K, x); });
            return assemble(s, neumann, K, MeasureMode::Probability, model);
        }
        case ModelKind::Expx2: {
            const double R = model.param("R");
            auto s = sample_density(linspace(-R, R, n), [](double x) { return std::exp(0.5 * x * x); });
            return assemble(s, {BoundaryCondition::Dirichlet, BoundaryCondition::Dirichlet}, -1.0,
                            MeasureMode::InfiniteTruncated, model);
        }
        case ModelKind::Revolution: {
            const double T = model.param("T");
            const auto t = linspace(-T, T, n);
            Sampled s;
            s.nodes = meridian_nodes(t);
            s.rho.resize(n);
            s.rho_mid.resize(n - 1);
            for (std::size_t i = 0; i < n; ++i) s.rho[i] = 2.0 * kPi * revolution::profile(t[i]);
            for (std::size_t i = 0; i + 1 < n; ++i) s.rho_mid[i] = 2.0 * kPi * revolution::profile(0.5 * (t[i] + t[i + 1]));
            return assemble(s, neumann, std::nullopt, MeasureMode::Finite, model);
        }
        case ModelKind::HyperbolicRadial: {
            const double R = model.param("R");
            auto s = sample_density(linspace(0.0, R, n), [](double r) { return 2.0 * kPi * std::sinh(r); });
            return assemble(s, {BoundaryCondition::Neumann, BoundaryCondition::Dirichlet}, std::nullopt,
                            MeasureMode::InfiniteTruncated, model);
        }
        case ModelKind::PerturbedGaussian: {
            const double eps = model.param("eps");
            const double R = model.param("R");
            auto s = sample_density(linspace(-R, R, n), [eps](double x) {
                const double x2 = x * x;
                return std::exp(-(0.5 * x2 + eps * x2 * x2));
            });
            return assemble(s, neumann, 1.0, MeasureMode::Probability, model);
        }
    }
    throw std::logic_error("unhandled model kind");
}

// --- sets and functions -----------------------------------------------------

DiscreteSet::DiscreteSet(std::vector<IndexInterval> intervals) {
    for (const auto& iv : intervals) {
        if (iv.first > iv.last) throw std::invalid_argument("interval with first > last");
    }
    std::sort(intervals.begin(), intervals.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    for (const auto& iv : intervals) {
        if (!intervals_.empty() && iv.first <= intervals_.back().last + 1) {
            intervals_.back().last = std::max(intervals_.back().last, iv.last);
        } else {
            intervals_.push_back(iv);
        }
    }
}

DiscreteSet DiscreteSet::from_mask(std::span<const bool> mask) {
    std::vector<IndexInterval> out;
    for (std::size_t i = 0; i < mask.size(); ++i) {
        if (!mask[i]) continue;
        if (!out.empty() && out.back().last + 1 == i) {
            out.back().last = i;
        } else {
            out.push_back({i, i});
        }
    }
    return DiscreteSet(std::move(out));
}

bool DiscreteSet::contains(std::size_t i) const {
    auto it = std::upper_bound(intervals_.begin(), intervals_.end(), i,
                               [](std::size_t v, const IndexInterval& iv) { return v < iv.first; });
    if (it == intervals_.begin()) return false;
    return i <= std::prev(it)->last;
}

std::size_t DiscreteSet::cardinality() const {
    std::size_t c = 0;
    for (const auto& iv : intervals_) c += iv.last - iv.first + 1;
    return c;
}

DiscreteSet DiscreteSet::complement(std::size_t n) const {
    std::vector<IndexInterval> out;
    std::size_t next = 0;
    for (const auto& iv : intervals_) {
        if (iv.first > next) out.push_back({next, iv.first - 1});
        next = iv.last + 1;
    }
    if (next < n) out.push_back({next, n - 1});
    return DiscreteSet(std::move(out));
}

SetMeasure measure_and_perimeter(const WeightedGrid& grid, const DiscreteSet& set) {
    SetMeasure out;
    const auto masses = grid.masses();
    for (const auto& iv : set.intervals()) {
        if (iv.last >= grid.size()) throw std::out_of_range("set index beyond grid");
        for (std::size_t i = iv.first; i <= iv.last; ++i) out.measure += masses[i];
        out.perimeter += detail::left_cut(grid, iv.first) + detail::right_cut(grid, iv.last);
    }
    return out;
}

DiscreteFunction::DiscreteFunction(std::vector<double> values) : values_(std::move(values)) {
    for (double v : values_) {
        if (!std::isfinite(v)) throw std::invalid_argument("function values must be finite");
    }
}

DiscreteFunction DiscreteFunction::indicator(const DiscreteSet& set, std::size_t n) {
    std::vector<double> v(n, 0.0);
    for (const auto& iv : set.intervals()) {
        if (iv.last >= n) throw std::out_of_range("set index beyond grid");
        for (std::size_t i = iv.first; i <= iv.last; ++i) v[i] = 1.0;
    }
    return DiscreteFunction(std::move(v));
}

double total_variation(const WeightedGrid& grid, const DiscreteFunction& f) {
    if (f.size() != grid.size()) throw std::invalid_argument("function size does not match grid");
    const auto w = grid.iface_weights();
    double tv = 0.0;
    for (std::size_t i = 0; i + 1 < f.size(); ++i) tv += w[i] * std::abs(f[i + 1] - f[i]);
    tv += grid.boundary_weight(Side::Left) * std::abs(f[0]);
    tv += grid.boundary_weight(Side::Right) * std::abs(f[f.size() - 1]);
    return tv;
}

std::vector<CoareaLevel> coarea_decompose(const WeightedGrid& grid, const DiscreteFunction& f) {
    if (f.size() != grid.size()) throw std::invalid_argument("function size does not match grid");
    const std::size_t n = f.size();
    std::vector<double> values(f.values().begin(), f.values().end());
    if (grid.ends().any_dirichlet()) values.push_back(0.0);
    std::sort(values.begin(), values.end());
    values.erase(std::unique(values.begin(), values.end()), values.end());
    const std::size_t k = values.size();
    if (k < 2) return {};

    auto rank = [&](double v) {
        return static_cast<std::size_t>(std::lower_bound(values.begin(), values.end(), v) - values.begin());
    };
    // Level j is {f > values[j]}; an interface with ranks ra < rb is cut for
    // j in [ra, rb).
    std::vector<double> per_diff(k + 1, 0.0);
    auto add_edge = [&](double a, double b, double w) {
        std::size_t ra = rank(a);
        std::size_t rb = rank(b);
        if (ra == rb) return;
        if (ra > rb) std::swap(ra, rb);
        per_diff[ra] += w;
        per_diff[rb] -= w;
    };
    const auto weights = grid.iface_weights();
    for (std::size_t i = 0; i + 1 < n; ++i) add_edge(f[i], f[i + 1], weights[i]);
    if (grid.ends().left == BoundaryCondition::Dirichlet) add_edge(f[0], 0.0, grid.boundary_weight(Side::Left));
    if (grid.ends().right == BoundaryCondition::Dirichlet) add_edge(f[n - 1], 0.0, grid.boundary_weight(Side::Right));

    std::vector<double> mass_at_rank(k, 0.0);
    const auto masses = grid.masses();
    for (std::size_t i = 0; i < n; ++i) mass_at_rank[rank(f[i])] += masses[i];

    std::vector<CoareaLevel> levels(k - 1);
    double per = 0.0;
    double above = 0.0;
    for (std::size_t r = 1; r < k; ++r) above += mass_at_rank[r];
    for (std::size_t j = 0; j + 1 < k; ++j) {
        per += per_diff[j];
        levels[j] = {values[j], values[j + 1] - values[j], per, above};
        above -= mass_at_rank[j + 1];
    }
    return levels;
}

double coarea_integral(std::span<const CoareaLevel> levels) {
    double s = 0.0;
    for (const auto& l : levels) s += l.perimeter * l.width;
    return s;
}

// --- Cheeger search ---------------------------------------------------------

DiscreteSet CheegerCandidate::to_set(std::size_t n) const {
    DiscreteSet s({{first, last}});
    return complement ? s.complement(n) : s;
}

namespace detail {

std::vector<double> mass_prefix(const WeightedGrid& grid) {
    const auto masses = grid.masses();
    const std::size_t n = masses.size();
    const auto anchor = static_cast<std::size_t>(std::min_element(masses.begin(), masses.end()) - masses.begin());
    std::vector<double> prefix(n + 1, 0.0);
    for (std::size_t i = anchor; i < n; ++i) prefix[i + 1] = prefix[i] + masses[i];
    for (std::size_t i = anchor; i > 0; --i) prefix[i - 1] = prefix[i] - masses[i - 1];
    return prefix;
}

}  // namespace detail

namespace {

struct Ranked {
    double ratio = std::numeric_limits<double>::infinity();
    CheegerCandidate cand{0, 0, false, 0.0, 0.0};
    std::vector<IndexInterval> union_parts;  // two-interval mode only
    bool valid = false;
};

// Total order: ratio, then measure, then start index, then plain before
// complement, then end index.
bool better(double ratio, const CheegerCandidate& c, const Ranked& best) {
    if (!best.valid) return true;
    if (ratio != best.ratio) return ratio < best.ratio;
    if (c.measure != best.cand.measure) return c.measure < best.cand.measure;
    if (c.first != best.cand.first) return c.first < best.cand.first;
    if (c.complement != best.cand.complement) return !c.complement;
    return c.last < best.cand.last;
}

struct Profile {
    double lo = 0.0;
    double log_span = 1.0;
    std::vector<ProfileBin> bins;

    Profile(std::size_t count, double vmin, double vmax) : lo(vmin), log_span(std::log(vmax / vmin)) {
        bins.resize(count);
        for (std::size_t b = 0; b < count; ++b) {
            bins[b].measure_lo = vmin * std::exp(log_span * static_cast<double>(b) / static_cast<double>(count));
            bins[b].measure_hi = vmin * std::exp(log_span * static_cast<double>(b + 1) / static_cast<double>(count));
            bins[b].measure = 0.0;
            bins[b].perimeter = std::numeric_limits<double>::infinity();
        }
    }

    void record(double m, double per) {
        if (bins.empty() || m <= 0.0) return;
        const double pos = std::log(m / lo) / log_span * static_cast<double>(bins.size());
        const auto b = static_cast<std::size_t>(std::clamp(pos, 0.0, static_cast<double>(bins.size() - 1)));
        if (per < bins[b].perimeter || (per == bins[b].perimeter && m < bins[b].measure)) {
            bins[b].perimeter = per;
            bins[b].measure = m;
        }
    }

    void merge(const Profile& other) {
        for (std::size_t b = 0; b < bins.size(); ++b) {
            const auto& o = other.bins[b];
            if (o.perimeter < bins[b].perimeter || (o.perimeter == bins[b].perimeter && o.measure < bins[b].measure)) {
                bins[b].perimeter = o.perimeter;
                bins[b].measure = o.measure;
            }
        }
    }
};

void two_interval_search(const WeightedGrid& grid, std::span<const double> prefix, Ranked& best, Profile& profile,
                         std::size_t& count) {
    const std::size_t n = grid.size();
    const double total = prefix[n] - prefix[0];
    const bool infinite = grid.measure_mode() == MeasureMode::InfiniteTruncated;
    for (std::size_t a = 0; a < n; ++a) {
        for (std::size_t b = a; b < n; ++b) {
            for (std::size_t c = b + 2; c < n; ++c) {
                for (std::size_t d = c; d < n; ++d) {
                    const double m = prefix[b + 1] - prefix[a] + prefix[d + 1] - prefix[c];
                    const double interior = detail::left_cut(grid, a) + detail::right_cut(grid, b) +
                                            detail::left_cut(grid, c) + detail::right_cut(grid, d);
                    auto consider = [&](double meas, double per, bool comp) {
                        ++count;
                        profile.record(meas, per);
                        CheegerCandidate cand{a, d, comp, meas, per};
                        const double ratio = per / meas;
                        if (better(ratio, cand, best)) {
                            best = {ratio, cand, {{a, b}, {c, d}}, true};
                        }
                    };
                    if (infinite ? m > 0.0 : (m > 0.0 && m <= 0.5 * total)) consider(m, interior, false);
                    if (!infinite) {
                        const double cm = total - m;
                        if (cm > 0.0 && cm <= 0.5 * total) {
                            // Same interior cuts; Dirichlet ends switch sides.
                            double per = interior;
                            if (a == 0) per -= grid.boundary_weight(Side::Left);
                            else per += grid.boundary_weight(Side::Left);
                            if (d + 1 == n) per -= grid.boundary_weight(Side::Right);
                            else per += grid.boundary_weight(Side::Right);
                            consider(cm, per, true);
                        }
                    }
                }
            }
        }
    }
}

}  // namespace

CheegerResult cheeger_search(const WeightedGrid& grid, const CheegerOptions& opts) {
    const std::size_t n = grid.size();
    if (n < 2) throw std::invalid_argument("Cheeger search needs at least two nodes");
    if (opts.two_interval_unions && n > 200) {
        throw std::invalid_argument("two-interval unions are limited to grids with at most 200 nodes");
    }
    const auto prefix = detail::mass_prefix(grid);
    const double total = prefix[n] - prefix[0];
    const double vmin = *std::min_element(grid.masses().begin(), grid.masses().end());
    const double vmax = grid.measure_mode() == MeasureMode::InfiniteTruncated ? total : 0.5 * total;
    const std::size_t nbins = vmax > vmin ? opts.profile_bins : 0;

    const std::size_t workers = std::min(opts.workers == 0 ? worker_count() : opts.workers, n);
    std::vector<Ranked> bests(workers);
    std::vector<Profile> profiles(workers, Profile(nbins, vmin, std::max(vmax, vmin * 2.0)));
    std::vector<std::size_t> counts(workers, 0);

    // Row i costs n - i; assign rows round-robin in blocks for balance while
    // keeping the assignment a pure function of (n, workers).
    parallel_for(
        workers,
        [&](std::size_t w) {
            auto visit = [&](const CheegerCandidate& c) {
                ++counts[w];
                profiles[w].record(c.measure, c.perimeter);
                const double ratio = c.perimeter / c.measure;
                if (better(ratio, c, bests[w])) bests[w] = {ratio, c, {}, true};
            };
            constexpr std::size_t block = 16;
            for (std::size_t start = w * block; start < n; start += workers * block) {
                detail::visit_rows(grid, prefix, start, std::min(n, start + block), visit);
            }
        },
        workers);

    Ranked best;
    Profile profile(nbins, vmin, std::max(vmax, vmin * 2.0));
    std::size_t count = 0;
    for (std::size_t w = 0; w < workers; ++w) {
        if (bests[w].valid && better(bests[w].ratio, bests[w].cand, best)) best = bests[w];
        profile.merge(profiles[w]);
        count += counts[w];
    }
    if (opts.two_interval_unions) two_interval_search(grid, prefix, best, profile, count);
    if (!best.valid) throw std::runtime_error("no admissible Cheeger candidate");

    CheegerResult out;
    out.h = best.ratio;
    if (!best.union_parts.empty()) {
        DiscreteSet s(best.union_parts);
        out.optimizer = best.cand.complement ? s.complement(n) : s;
    } else {
        out.optimizer = best.cand.to_set(n);
    }
    out.measure = best.cand.measure;
    out.perimeter = best.cand.perimeter;
    for (const auto& b : profile.bins) {
        if (std::isfinite(b.perimeter)) out.profile.push_back(b);
    }
    out.candidates = count;
    return out;
}

}  // namespace cheegerlab
