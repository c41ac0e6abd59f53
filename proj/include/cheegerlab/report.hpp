#pragma once

// Verification reports and their newline-delimited JSON form.

#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace cheegerlab {

enum class Verdict { Pass, Fail, Inconclusive };

std::string_view to_string(Verdict v);

/// Verdict of a signed slack against a tolerance.
inline Verdict verdict_for(double gap, double tolerance) {
    return gap >= -tolerance ? Verdict::Pass : Verdict::Fail;
}

struct SubCheck {
    std::string name;
    Verdict verdict = Verdict::Pass;
    double gap = 0.0;
    double tolerance = 0.0;
    /// Informational sub-checks are reported but do not affect the verdict.
    bool informational = false;
    std::string notes;
};

using NamedValues = std::vector<std::pair<std::string, double>>;

struct VerificationReport {
    std::string check;
    std::string space;
    NamedValues inputs;
    NamedValues computed;
    Verdict verdict = Verdict::Pass;
    double gap = 0.0;
    double tolerance = 0.0;
    std::string notes;
    std::vector<SubCheck> subchecks;

    void input(std::string key, double value) { inputs.emplace_back(std::move(key), value); }
    void value(std::string key, double value) { computed.emplace_back(std::move(key), value); }
    /// Looks up a computed value; throws std::out_of_range when absent.
    double computed_value(std::string_view key) const;

    /// Adds a sub-check whose verdict follows from gap and tolerance.
    SubCheck& require(std::string name, double gap, double tolerance, std::string notes = {});
    /// Adds an informational sub-check.
    SubCheck& inform(std::string name, double gap, double tolerance, std::string notes = {});

    /// Sets the overall verdict from the binding sub-checks. The composite
    /// gap is min over them of (gap + tolerance) with tolerance 0, so
    /// PASS <=> gap >= -tolerance still holds. An Inconclusive verdict set
    /// beforehand is kept unless a binding sub-check failed.
    void finalize();
};

inline constexpr int kReportSchemaVersion = 1;

/// One JSON object per report, without trailing newline. Field order is
/// fixed and numbers are printed in shortest round-trip form, so identical
/// reports serialise to identical bytes.
std::string to_json_line(const VerificationReport& report);

/// Header record carrying tool version, schema version and a timestamp.
std::string header_json_line(std::string_view command, std::string_view timestamp);

/// Shortest decimal text that parses back to exactly v; used for CSV cells.
std::string format_number(double v);

/// Current UTC time in ISO 8601.
std::string utc_timestamp();

/// Exit code for a set of reports: 1 if any FAIL, else 3 if any
/// INCONCLUSIVE, else 0.
int exit_code_for(const std::vector<VerificationReport>& reports);

}  // namespace cheegerlab
