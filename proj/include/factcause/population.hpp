#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "factcause/corpus_index.hpp"
#include "factcause/hypothesis.hpp"
#include "factcause/knowledge_base.hpp"
#include "factcause/observation_table.hpp"
#include "factcause/predictions.hpp"

namespace factcause {

/// One (subject, object, relation, template) unit with its confounders,
/// treatment flag and, once scored, prediction and outcome.
struct PopulationRow {
    std::string subject;
    std::string object;
    std::string relation;
    std::string template_text;
    bool is_anti = false;
    bool kbt = false;
    bool treatment = false;
    Count soc_count = 0;
    Bin soc_bin = Bin::XS;
    Count poc_count = 0;
    bool utt_present = false;
    bool so_hc = false;
    bool po_hc = false;
    std::optional<std::string> prediction;
    std::optional<int> outcome;
    long pair = -1;

    ClozeKey key() const { return {subject, relation, template_text}; }
    bool operator==(const PopulationRow&) const = default;
};

struct MatchPair {
    std::size_t treated;
    std::size_t control;
    bool operator==(const MatchPair&) const = default;
};

struct DropReport {
    std::size_t unmatched_treated = 0;
    std::vector<std::string> unmatched_sample;
    std::size_t below_frequency = 0;  // (template, object) combinations filtered out
    std::size_t no_cooccurrence = 0;  // subjects that co-occur with no candidate
    bool operator==(const DropReport&) const = default;
};

struct MatchedPopulation {
    Hypothesis hypothesis = Hypothesis::Soc;
    std::vector<PopulationRow> rows;  // sorted by (relation, subject, object, template)
    std::vector<MatchPair> pairs;     // ordered by treated row
    DropReport drops;
    bool scored = false;
    bool operator==(const MatchedPopulation&) const = default;
};

struct PopulationConfig {
    Count min_pattern_object_frequency = 5;  // keep (template, object) with more matches than this
    BinEdges bins;
    std::size_t drop_sample = 5;
    unsigned threads = 1;
};

/// Fills [X] with the subject and [Y] with the object, or with `mask` when no
/// object is given. Throws MalformedPattern.
std::string instantiate(std::string_view template_text, std::string_view subject,
                        const std::optional<std::string>& object, std::string_view mask = kDefaultMask);

struct MatchUnit {
    std::vector<std::string> discrete;
    std::vector<double> continuous;
};

struct MatchResult {
    std::vector<std::pair<std::size_t, std::size_t>> pairs;  // (treated index, pool index)
    std::vector<std::size_t> unmatched;
};

/// Greedy nearest-neighbour matching in treated order: identical discrete
/// confounders, minimal Euclidean distance on continuous ones, earliest pool
/// entry on ties. Without `reuse_controls` a pool unit is used at most once.
MatchResult match_controls(std::span<const MatchUnit> treated, std::span<const MatchUnit> pool,
                           bool reuse_controls = false);
MatchResult match_controls(std::span<const PopulationRow> treated, std::span<const PopulationRow> pool,
                           const std::vector<std::string>& discrete, const std::vector<std::string>& continuous,
                           bool reuse_controls = false);

/// Field of a row rendered as it appears in emitted tables. Throws
/// UnknownColumn.
std::string row_field(const PopulationRow& row, std::string_view column);

/// Matched rows for one hypothesis, without predictions.
MatchedPopulation build_population(Hypothesis h, const KnowledgeBase& kb, const CorpusIndex& stats,
                                   const PopulationConfig& config = {});

/// Cloze keys a prediction set must cover to score the population.
std::vector<ClozeKey> required_keys(const MatchedPopulation& pop);

/// Attaches predictions and outcomes. Throws MissingPrediction listing the
/// uncovered keys.
void score_population(MatchedPopulation& pop, const PredictionSet& predictions);

MatchedPopulation build_table(Hypothesis h, const KnowledgeBase& kb, const CorpusIndex& stats,
                              const PredictionSet& predictions, const PopulationConfig& config = {});

/// Graph variables of one hypothesis and the table columns that carry them.
struct AdjustmentSpec {
    std::string treatment_node;
    std::string outcome_node;
    std::vector<std::string> adjustment_nodes;
    std::vector<std::string> adjustment_columns;
};

AdjustmentSpec adjustment_for(Hypothesis h);

inline constexpr const char* kPopulationColumns[] = {
    "pair",        "subject",     "object", "relation", "template", "is_anti",    "kbt",     "treatment",
    "soc_count",   "soc_bin",     "poc_count", "utt_present", "so_hc", "po_hc", "prediction", "outcome"};

/// Delimited table with the header above, one row per line.
void write_population(std::ostream& out, const MatchedPopulation& pop);

/// The emitted table as categorical observations (requires a scored
/// population).
ObservationTable to_observations(const MatchedPopulation& pop);

nlohmann::json population_to_json(const MatchedPopulation& pop);
MatchedPopulation population_from_json(const nlohmann::json& j);

} // namespace factcause
