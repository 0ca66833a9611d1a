#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "factcause/backdoor.hpp"
#include "factcause/hypothesis.hpp"
#include "factcause/population.hpp"

namespace factcause {

struct HypothesisResult {
    Hypothesis hypothesis = Hypothesis::Utt;
    std::string source_id;
    std::string treatment;
    std::string outcome;
    std::vector<std::string> adjustment;
    std::optional<double> ate;          // percentage
    std::optional<std::string> ate_exact;  // treated minus control as a fraction "p/q"
    std::optional<double> covered_mass;
    std::map<std::string, double> arm_mass;
    std::map<std::string, double> do_probability;
    bool positivity_violation = false;
    std::size_t rows = 0;
    std::size_t pairs = 0;
    DropReport drops;
    std::vector<GroupEffect> cate;  // per relation
    std::string error_code;         // empty on success
    std::string error;

    bool operator==(const HypothesisResult&) const = default;
};

struct SeriesEntry {
    std::size_t index = 0;
    std::string label;
    std::map<std::string, std::optional<double>> ate;  // keyed by hypothesis name
    std::optional<double> accuracy;                     // percentage of queries answered with a KB object
    std::string error;

    bool operator==(const SeriesEntry&) const = default;
};

struct EffectReport {
    std::string model;
    std::vector<HypothesisResult> results;
    std::vector<SeriesEntry> series;

    const HypothesisResult* find(Hypothesis h) const;
    bool has_errors() const;
    bool operator==(const EffectReport&) const = default;
};

enum class ReportFormat { Table, Structured, Delimited };

ReportFormat parse_report_format(std::string_view name);
std::string_view report_format_name(ReportFormat f);

nlohmann::ordered_json report_to_json(const EffectReport& report);
EffectReport report_from_json(const nlohmann::json& j);

void emit_report(std::ostream& out, const EffectReport& report, ReportFormat format);
/// Writes to `path`, or to standard output when the path is empty. Throws
/// IoFailure.
void emit_report(const std::filesystem::path& path, const EffectReport& report, ReportFormat format);
EffectReport load_report(const std::filesystem::path& path);

/// Shortest text that reads back as the same double.
std::string format_double(double v);

} // namespace factcause
