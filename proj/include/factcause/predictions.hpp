#pragma once

#include <compare>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "factcause/corpus_index.hpp"
#include "factcause/hypothesis.hpp"
#include "factcause/knowledge_base.hpp"

namespace factcause {

/// Identifies one cloze query: the subject placed in a relation template.
struct ClozeKey {
    std::string subject;
    std::string relation;
    std::string template_text;

    auto operator<=>(const ClozeKey& o) const {
        return std::tie(relation, subject, template_text) <=> std::tie(o.relation, o.subject, o.template_text);
    }
    bool operator==(const ClozeKey&) const = default;
};

std::string describe(const ClozeKey& key);

struct PredictionRecord {
    ClozeKey key;
    /// Empty when the predictor abstained; an abstention never matches.
    std::optional<std::string> predicted_object;
    std::string source_id;

    bool operator==(const PredictionRecord&) const = default;
};

/// Top-1 predictions of one model or checkpoint, at most one per cloze.
class PredictionSet {
public:
    explicit PredictionSet(std::string source_id = {});

    /// Throws DuplicateKey, or FormatError when the record's source differs.
    void insert(PredictionRecord record);

    const PredictionRecord* find(const ClozeKey& key) const;
    const std::string& source_id() const { return source_id_; }
    std::size_t size() const { return records_.size(); }
    auto begin() const { return records_.begin(); }
    auto end() const { return records_.end(); }

    bool operator==(const PredictionSet&) const = default;

private:
    std::string source_id_;
    std::map<ClozeKey, PredictionRecord> records_;
};

/// Newline-delimited JSON records {"subject", "relation", "template",
/// "prediction", "source_id"}; "prediction": null records an abstention.
/// Predictions outside the relation's gold objects raise CandidateViolation.
PredictionSet parse_predictions(std::istream& in, const KnowledgeBase& kb, const std::string& source = "<stream>");
PredictionSet load_predictions(const std::filesystem::path& path, const KnowledgeBase& kb);
void write_predictions(std::ostream& out, const PredictionSet& set);

enum class BaselineKind { HeuristicUtt, HeuristicPoc, HeuristicSoc, Perfect, Random };

std::string_view baseline_name(BaselineKind kind);
/// "heuristic-utt", "heuristic-poc", "heuristic-soc", "perfect", "random".
BaselineKind parse_baseline(std::string_view name);
BaselineKind heuristic_for(Hypothesis h);

/// What heuristic-utt predicts for a cloze whose utterance never occurs with
/// any candidate: nothing, or the subject's most co-occurring candidate.
enum class UttFallback { Abstain, Soc };

UttFallback parse_utt_fallback(std::string_view name);
std::string_view utt_fallback_name(UttFallback f);

struct BaselineOptions {
    std::uint64_t seed = 0;
    UttFallback utt_fallback = UttFallback::Abstain;
};

/// Synthetic predictors. Heuristic kinds need `stats` (MissingStats
/// otherwise). Random draws per query from a generator keyed by (seed, query),
/// so the result does not depend on query order or on how work is split.
PredictionSet baseline_predict(BaselineKind kind, const KnowledgeBase& kb, const CorpusIndex* stats,
                               std::span<const ClozeKey> queries, const BaselineOptions& options = {});

/// 1 iff the trimmed prediction equals the trimmed reference object.
/// Throws MissingReference for an empty reference.
int outcome_flag(Hypothesis hypothesis, std::string_view reference, const std::optional<std::string>& prediction);

} // namespace factcause
