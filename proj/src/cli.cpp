#include "cheegerlab/cli.hpp"

#include "cheegerlab/kernels.hpp"
#include "cheegerlab/mmspace.hpp"
#include "cheegerlab/parallel.hpp"
#include "cheegerlab/plaplacian.hpp"
#include "cheegerlab/report.hpp"
#include "cheegerlab/verify.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>

namespace cheegerlab {

namespace {

constexpr int kUsageError = 2;

// Thrown for invalid user input detected after CLI11 parsing.
struct UsageError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

double parse_real(std::string_view text) {
    double v = 0.0;
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (ec != std::errc() || ptr != end || !std::isfinite(v)) {
        throw UsageError("not a finite number: '" + std::string(text) + "'");
    }
    return v;
}

std::vector<double> parse_list(const std::string& text) {
    std::vector<double> out;
    std::string_view rest = text;
    while (!rest.empty()) {
        const auto comma = rest.find(',');
        out.push_back(parse_real(rest.substr(0, comma)));
        if (comma == std::string_view::npos) break;
        rest.remove_prefix(comma + 1);
    }
    if (out.empty()) throw UsageError("empty list");
    return out;
}

// "a:b:step" (inclusive of b up to rounding) or a comma list.
std::vector<double> parse_range(const std::string& text) {
    if (text.find(':') == std::string::npos) return parse_list(text);
    std::vector<std::string_view> parts;
    std::string_view rest = text;
    for (auto colon = rest.find(':'); colon != std::string_view::npos; colon = rest.find(':')) {
        parts.push_back(rest.substr(0, colon));
        rest.remove_prefix(colon + 1);
    }
    parts.push_back(rest);
    if (parts.size() != 3) throw UsageError("range must be a:b:step");
    const double a = parse_real(parts[0]);
    const double b = parse_real(parts[1]);
    const double step = parse_real(parts[2]);
    if (!(step > 0.0) || b < a) throw UsageError("range needs step > 0 and b >= a");
    const double count = std::floor((b - a) / step + 1e-9);
    if (count > 1e5) throw UsageError("range has too many points");
    std::vector<double> out;
    for (long k = 0; k <= static_cast<long>(count); ++k) {
        // 12 significant digits, so 0:0.1:0.02 yields 0.06 rather than 0.060000000000000005.
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.12g", a + static_cast<double>(k) * step);
        out.push_back(std::strtod(buf, nullptr));
    }
    return out;
}

struct SpaceFlags {
    std::string space;
    std::optional<double> n;
    std::optional<double> R;
};

ModelDescriptor resolve_space(const SpaceFlags& flags) {
    auto model = ModelDescriptor::parse(flags.space);
    if (flags.n) model = model.with("n", *flags.n);
    if (flags.R) {
        if (!model.has_param("R")) throw UsageError("model " + std::string(model.name()) + " has no R parameter");
        model = model.with("R", *flags.R);
    }
    return model;
}

class Output {
public:
    Output(std::ostream& fallback, const std::string& path) : stream_(&fallback) {
        if (!path.empty()) {
            file_.open(path);
            if (!file_) throw UsageError("cannot open output file '" + path + "'");
            stream_ = &file_;
        }
    }
    std::ostream& operator*() { return *stream_; }

private:
    std::ofstream file_;
    std::ostream* stream_;
};

void write_file(const std::string& path, const std::string& content) {
    std::ofstream f(path);
    if (!f) throw UsageError("cannot open '" + path + "'");
    f << content;
}

int emit(const std::string& command, const std::vector<VerificationReport>& reports, std::ostream& out) {
    out << header_json_line(command, utc_timestamp()) << '\n';
    for (const auto& r : reports) out << to_json_line(r) << '\n';
    return exit_code_for(reports);
}

DiscreteSet lower_half(const WeightedGrid& grid) {
    const double total = grid.total_mass();
    double acc = 0.0;
    std::size_t last = 0;
    for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
        if (acc + grid.masses()[i] > 0.5 * total) break;
        acc += grid.masses()[i];
        last = i;
    }
    return DiscreteSet({{0, last}});
}

std::vector<VerificationReport> default_battery() {
    const auto uniform = build_space(ModelDescriptor::parse("uniform"));
    const auto gaussian = build_space(ModelDescriptor::parse("gaussian"));
    std::vector<VerificationReport> out;
    out.push_back(verify_cheeger(uniform));
    out.push_back(verify_cheeger(gaussian));
    out.push_back(verify_cheeger(build_space(ModelDescriptor::parse("expx2"))));
    out.push_back(verify_buser(gaussian));
    out.push_back(verify_buser(uniform));
    out.push_back(verify_buser(build_space(ModelDescriptor::parse("perturbed_gaussian"))));
    out.push_back(verify_heat_chain(gaussian, lower_half(gaussian), {0.1, 1.0, 10.0}));
    out.push_back(verify_isoperimetry(gaussian));
    out.push_back(verify_isoperimetry(build_space(ModelDescriptor::parse("hyperbolic_radial"))));
    out.push_back(verify_smoothing(gaussian));
    out.push_back(revolution_diagnostics());
    out.push_back(monotonicity_report(uniform, monotonicity_sweep(uniform, {1.0, 1.5, 2.0, 3.0})));
    for (auto& r : rigidity_scan({0.0, 0.02, 0.04, 0.06, 0.08, 0.1})) out.push_back(std::move(r));
    return out;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Cheeger, Buser and heat-flow verification on weighted 1D spaces", "cheegerlab"};
    app.require_subcommand(1);
    app.set_version_flag("--version", CHEEGERLAB_VERSION);

    std::string out_path;
    std::function<int(std::ostream&)> action;

    // space list | info
    auto* space = app.add_subcommand("space", "model catalogue");
    space->require_subcommand(1);
    auto* space_list = space->add_subcommand("list", "list catalogue models with defaults");
    space_list->callback([&] {
        action = [](std::ostream& o) {
            for (const auto& line : model_catalog()) o << line << '\n';
            return 0;
        };
    });
    auto* space_info = space->add_subcommand("info", "grid summary for a descriptor");
    SpaceFlags info_flags;
    std::string info_csv;
    space_info->add_option("descriptor", info_flags.space, "model descriptor, e.g. gaussian:K=1")->required();
    space_info->add_option("--n", info_flags.n, "node count");
    space_info->add_option("--R", info_flags.R, "truncation radius");
    space_info->add_option("--csv", info_csv, "write x,mass,iface_weight to this file");
    space_info->callback([&] {
        const auto model = resolve_space(info_flags);
        action = [model, &info_csv](std::ostream& o) {
            const auto grid = build_space(model);
            nlohmann::ordered_json j;
            j["record"] = "space";
            j["tool_version"] = CHEEGERLAB_VERSION;
            j["space"] = model.to_string();
            j["nodes"] = grid.size();
            j["measure_mode"] = std::string(to_string(grid.measure_mode()));
            j["bc"] = std::string(to_string(grid.bc()));
            j["total_mass"] = grid.total_mass();
            j["k_tag"] = grid.k_tag() ? nlohmann::ordered_json(*grid.k_tag()) : nlohmann::ordered_json();
            j["x_min"] = grid.nodes().front();
            j["x_max"] = grid.nodes().back();
            o << j.dump() << '\n';
            if (!info_csv.empty()) write_file(info_csv, grid.to_csv());
            return 0;
        };
    });

    // verify <check>
    auto* verify = app.add_subcommand("verify", "run one verification check");
    std::string check;
    SpaceFlags vflags;
    double tol = 1e-3;
    std::string ts_text = "0.1,1,10";
    double smooth_t = 1.0;
    std::size_t trials = 100;
    std::string T_text = "10,20,40";
    verify->add_option("check", check, "check name")
        ->required()
        ->check(CLI::IsMember({"cheeger", "buser", "heat-chain", "isoperimetry", "smoothing", "revolution"}));
    verify->add_option("--space", vflags.space, "model descriptor");
    verify->add_option("--n", vflags.n, "node count");
    verify->add_option("--R", vflags.R, "truncation radius")->check(CLI::PositiveNumber);
    verify->add_option("--tol", tol, "tolerance")->check(CLI::NonNegativeNumber);
    verify->add_option("--ts", ts_text, "heat-chain times, comma separated");
    verify->add_option("--t", smooth_t, "smoothing time")->check(CLI::PositiveNumber);
    verify->add_option("--trials", trials, "smoothing trial functions")->check(CLI::Range(1, 100000));
    verify->add_option("--T", T_text, "revolution truncations, comma separated");
    verify->add_option("--out", out_path, "write records to this file");
    verify->callback([&] {
        if (check == "revolution") {
            RevolutionOptions opts;
            opts.T_list = parse_list(T_text);
            if (vflags.n) {
                if (*vflags.n < 3 || *vflags.n != std::floor(*vflags.n)) throw UsageError("--n must be an integer >= 3");
                opts.n = static_cast<std::size_t>(*vflags.n);
            }
            if (!std::is_sorted(opts.T_list.begin(), opts.T_list.end())) throw UsageError("--T must be ascending");
            for (double T : opts.T_list) {
                if (!(T > 1.0)) throw UsageError("--T values must exceed 1");
            }
            action = [opts](std::ostream& o) { return emit("verify revolution", {revolution_diagnostics(opts)}, o); };
            return;
        }
        if (vflags.space.empty()) throw UsageError("--space is required for verify " + check);
        const auto model = resolve_space(vflags);
        const auto ts = parse_list(ts_text);
        for (double t : ts) {
            if (!(t > 0.0)) throw UsageError("--ts values must be positive");
        }
        action = [=](std::ostream& o) {
            const auto grid = build_space(model);
            VerificationReport rep;
            if (check == "cheeger") rep = verify_cheeger(grid, tol);
            else if (check == "buser") rep = verify_buser(grid, tol);
            else if (check == "heat-chain") rep = verify_heat_chain(grid, lower_half(grid), ts, tol);
            else if (check == "isoperimetry") rep = verify_isoperimetry(grid, tol);
            else rep = verify_smoothing(grid, smooth_t, trials);
            return emit("verify " + check, {rep}, o);
        };
    });

    // sweep p-monotonicity | rigidity
    auto* sweep = app.add_subcommand("sweep", "parameter sweeps");
    sweep->require_subcommand(1);
    std::string csv_path;
    auto* pmono = sweep->add_subcommand("p-monotonicity", "p * lambda_{1,p}^{1/p} over p");
    SpaceFlags pflags;
    std::string ps_text = "1,1.5,2,3";
    double margin = 0.0;
    pmono->add_option("--space", pflags.space, "model descriptor")->required();
    pmono->add_option("--n", pflags.n, "node count");
    pmono->add_option("--R", pflags.R, "truncation radius")->check(CLI::PositiveNumber);
    pmono->add_option("--ps", ps_text, "exponents, comma separated, ascending");
    pmono->add_option("--margin", margin, "required increase between successive p")->check(CLI::NonNegativeNumber);
    pmono->add_option("--csv", csv_path, "write p,lambda_1p,p_lambda_pow,restarts_agreeing here");
    pmono->add_option("--out", out_path, "write records to this file");
    pmono->callback([&] {
        const auto model = resolve_space(pflags);
        const auto ps = parse_list(ps_text);
        if (!std::is_sorted(ps.begin(), ps.end())) throw UsageError("--ps must be ascending");
        for (double p : ps) {
            if (p < 1.0 || p > 8.0) throw UsageError("--ps values must lie in [1, 8]");
        }
        action = [=, &csv_path](std::ostream& o) {
            const auto grid = build_space(model);
            const auto rows = monotonicity_sweep(grid, ps);
            if (!csv_path.empty()) write_file(csv_path, sweep_csv(rows));
            return emit("sweep p-monotonicity", {monotonicity_report(grid, rows, margin)}, o);
        };
    });
    auto* rigidity = sweep->add_subcommand("rigidity", "Buser gap over the perturbed Gaussian family");
    std::string eps_text = "0:0.1:0.02";
    double rig_R = 8.0;
    std::size_t rig_n = 4001;
    double rig_tol = 1e-3;
    rigidity->add_option("--eps", eps_text, "a:b:step or comma list, starting at 0");
    rigidity->add_option("--R", rig_R, "truncation radius")->check(CLI::PositiveNumber);
    rigidity->add_option("--n", rig_n, "node count")->check(CLI::Range(3, 5000000));
    rigidity->add_option("--tol", rig_tol, "tolerance")->check(CLI::NonNegativeNumber);
    rigidity->add_option("--csv", csv_path, "write eps,lambda1,h,B,gap here");
    rigidity->add_option("--out", out_path, "write records to this file");
    rigidity->callback([&] {
        const auto eps = parse_range(eps_text);
        if (eps.front() != 0.0) throw UsageError("--eps must start at 0");
        if (!std::is_sorted(eps.begin(), eps.end())) throw UsageError("--eps must be ascending");
        ModelDescriptor::perturbed_gaussian(eps.back(), rig_R, rig_n).validate();
        action = [=, &csv_path](std::ostream& o) {
            const auto reports = rigidity_scan(eps, rig_R, rig_n, rig_tol);
            if (!csv_path.empty()) {
                std::ostringstream csv;
                csv << "eps,lambda1,h,B,gap\n";
                for (std::size_t k = 0; k < eps.size(); ++k) {
                    const auto& r = reports[k];
                    csv << format_number(eps[k]);
                    for (const char* key : {"lambda1", "h", "B", "gap"}) csv << ',' << format_number(r.computed_value(key));
                    csv << '\n';
                }
                write_file(csv_path, csv.str());
            }
            return emit("sweep rigidity", reports, o);
        };
    });

    // buser --lambda1 --K
    auto* buser = app.add_subcommand("buser", "sharp Buser bound sup_t (1 - e^{-lambda1 t}) / J_K(t)");
    double lambda1 = 0.0;
    double K = 0.0;
    std::string samples_csv;
    buser->add_option("--lambda1", lambda1, "spectral gap")->required()->check(CLI::NonNegativeNumber);
    buser->add_option("--K", K, "curvature bound")->required();
    buser->add_option("--csv", samples_csv, "write the sampled t,ratio pairs here");
    buser->add_option("--out", out_path, "write the record to this file");
    buser->callback([&] {
        if (!std::isfinite(K) || !std::isfinite(lambda1)) throw UsageError("--lambda1 and --K must be finite");
        action = [&](std::ostream& o) {
            const auto b = kernels::buser_sharp_bound(lambda1, K);
            nlohmann::ordered_json j;
            j["record"] = "buser";
            j["tool_version"] = CHEEGERLAB_VERSION;
            j["lambda1"] = b.lambda1;
            j["K"] = b.K;
            j["sup_value"] = b.sup_value;
            j["argmax_t"] = b.at_infinity ? nlohmann::ordered_json("AT_INFINITY") : nlohmann::ordered_json(b.argmax_t);
            o << j.dump() << '\n';
            if (!samples_csv.empty()) {
                std::ostringstream csv;
                csv << "t,ratio\n";
                for (const auto& s : b.samples) csv << format_number(s.t) << ',' << format_number(s.ratio) << '\n';
                write_file(samples_csv, csv.str());
            }
            return 0;
        };
    });

    // report: the default battery
    auto* report = app.add_subcommand("report", "run the default verification battery");
    report->add_option("--out", out_path, "write records to this file");
    report->callback([&] { action = [](std::ostream& o) { return emit("report", default_battery(), o); }; });

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::CallForVersion&) {
        out << CHEEGERLAB_VERSION << '\n';
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kUsageError;
    } catch (const std::invalid_argument& e) {
        // Descriptor and flag validation inside callbacks.
        err << "error: " << e.what() << '\n';
        return kUsageError;
    }
    if (!action) {
        err << "error: nothing to do\n";
        return kUsageError;
    }
    try {
        Output sink(out, out_path);
        return action(*sink);
    } catch (const std::invalid_argument& e) {
        // Includes library precondition failures, e.g. a check run on a space
        // that lacks the structure it needs.
        err << "error: " << e.what() << '\n';
        return kUsageError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
}

}  // namespace cheegerlab
