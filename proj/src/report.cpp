#include "cheegerlab/report.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <limits>
#include <stdexcept>

namespace cheegerlab {

namespace {

using ordered_json = nlohmann::ordered_json;

// JSON has no infinities or NaN; those become strings.
ordered_json number(double v) {
    if (std::isfinite(v)) return v;
    if (std::isnan(v)) return "nan";
    return v > 0 ? "inf" : "-inf";
}

ordered_json values(const NamedValues& vals) {
    ordered_json obj = ordered_json::object();
    for (const auto& [k, v] : vals) obj[k] = number(v);
    return obj;
}

}  // namespace

std::string format_number(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc()) throw std::runtime_error("number formatting failed");
    return std::string(buf, ptr);
}

std::string_view to_string(Verdict v) {
    switch (v) {
        case Verdict::Pass: return "PASS";
        case Verdict::Fail: return "FAIL";
        case Verdict::Inconclusive: return "INCONCLUSIVE";
    }
    return "?";
}

double VerificationReport::computed_value(std::string_view key) const {
    for (const auto& [k, v] : computed) {
        if (k == key) return v;
    }
    throw std::out_of_range("report '" + check + "' has no computed value '" + std::string(key) + "'");
}

SubCheck& VerificationReport::require(std::string name, double gap, double tolerance, std::string notes) {
    subchecks.push_back({std::move(name), verdict_for(gap, tolerance), gap, tolerance, false, std::move(notes)});
    return subchecks.back();
}

SubCheck& VerificationReport::inform(std::string name, double gap, double tolerance, std::string notes) {
    subchecks.push_back({std::move(name), verdict_for(gap, tolerance), gap, tolerance, true, std::move(notes)});
    return subchecks.back();
}

void VerificationReport::finalize() {
    double slack = std::numeric_limits<double>::infinity();
    bool any = false;
    bool failed = false;
    for (const auto& s : subchecks) {
        if (s.informational) continue;
        any = true;
        // NaN gaps count as failures.
        const double shifted = std::isnan(s.gap) ? -std::numeric_limits<double>::infinity() : s.gap + s.tolerance;
        slack = std::min(slack, shifted);
        failed = failed || s.verdict == Verdict::Fail || std::isnan(s.gap);
    }
    if (!any) return;
    gap = slack;
    tolerance = 0.0;
    if (failed) {
        verdict = Verdict::Fail;
    } else if (verdict != Verdict::Inconclusive) {
        verdict = Verdict::Pass;
    }
}

std::string to_json_line(const VerificationReport& r) {
    ordered_json j;
    j["tool_version"] = CHEEGERLAB_VERSION;
    j["schema"] = kReportSchemaVersion;
    j["check"] = r.check;
    j["space"] = r.space;
    j["inputs"] = values(r.inputs);
    j["computed"] = values(r.computed);
    j["verdict"] = std::string(to_string(r.verdict));
    j["gap"] = number(r.gap);
    j["tolerance"] = number(r.tolerance);
    j["notes"] = r.notes;
    ordered_json subs = ordered_json::array();
    for (const auto& s : r.subchecks) {
        ordered_json sj;
        sj["name"] = s.name;
        sj["verdict"] = std::string(to_string(s.verdict));
        sj["gap"] = number(s.gap);
        sj["tolerance"] = number(s.tolerance);
        sj["informational"] = s.informational;
        if (!s.notes.empty()) sj["notes"] = s.notes;
        subs.push_back(std::move(sj));
    }
    j["subchecks"] = std::move(subs);
    return j.dump();
}

std::string header_json_line(std::string_view command, std::string_view timestamp) {
    ordered_json j;
    j["record"] = "header";
    j["tool_version"] = CHEEGERLAB_VERSION;
    j["schema"] = kReportSchemaVersion;
    j["command"] = std::string(command);
    j["timestamp"] = std::string(timestamp);
    return j.dump();
}

std::string utc_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

int exit_code_for(const std::vector<VerificationReport>& reports) {
    bool inconclusive = false;
    for (const auto& r : reports) {
        if (r.verdict == Verdict::Fail) return 1;
        inconclusive = inconclusive || r.verdict == Verdict::Inconclusive;
    }
    return inconclusive ? 3 : 0;
}

}  // namespace cheegerlab
