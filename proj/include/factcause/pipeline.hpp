#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "factcause/corpus_index.hpp"
#include "factcause/knowledge_base.hpp"
#include "factcause/population.hpp"
#include "factcause/predictions.hpp"
#include "factcause/report.hpp"

namespace factcause {

struct RunConfig {
    std::string corpus;
    std::string index;
    std::string kb;
    std::string patterns;
    std::string predictions;
    std::string baseline;  // a baseline name, or "heuristic" for each hypothesis's own heuristic
    std::uint64_t seed = 0;
    UttFallback utt_fallback = UttFallback::Abstain;
    std::string mask_token{kDefaultMask};
    Count min_pattern_object_frequency = 5;
    BinEdges bin_edges;
    std::string tie_break = "lexicographic";
    ReportFormat format = ReportFormat::Table;
    std::string output;
    std::string cache_dir;
    unsigned threads = 1;

    /// Throws InvalidConfig.
    void validate() const;
};

/// Every key accepted by `set_config_value`.
const std::vector<std::string>& config_keys();

/// Throws InvalidConfig for unknown keys or unparsable values.
void set_config_value(RunConfig& config, std::string_view key, std::string_view value);
std::string get_config_value(const RunConfig& config, std::string_view key);

/// `key = value` lines; blank lines and lines starting with '#' are ignored.
/// Relative paths in a config file are resolved against its directory.
std::vector<std::pair<std::string, std::string>> parse_config_text(std::string_view text,
                                                                   const std::string& source = "<config>");
RunConfig load_config(const std::filesystem::path& path);

/// Checks each hypothesis's adjustment set against the backdoor criterion on
/// the knowledge-probing graph. Throws AdjustmentMismatch.
void verify_adjustment_sets();

/// Knowledge base and corpus statistics shared by every stage.
struct Inputs {
    KnowledgeBase kb;
    CorpusIndex index;
    std::uint64_t kb_hash = 0;
    std::uint64_t index_hash = 0;
};

/// Loads the index file when `index` names an existing file, otherwise
/// builds it from `corpus` (and saves it to `index` when that is set).
Inputs load_inputs(const RunConfig& config);

PopulationConfig population_config(const RunConfig& config);

/// Built populations, reusing the cache directory when configured.
MatchedPopulation population_for(Hypothesis h, const Inputs& inputs, const RunConfig& config);

/// The configured baseline's predictions for the population's queries.
PredictionSet baseline_for(Hypothesis h, const MatchedPopulation& pop, const Inputs& inputs,
                           const RunConfig& config);

/// Cloze queries of a population, one JSON record per line with the mask
/// token in place of the object.
void write_queries(std::ostream& out, const MatchedPopulation& pop, std::string_view mask);

/// ATE, covered mass and per-relation CATE of a scored population.
HypothesisResult estimate_population(const MatchedPopulation& pop);

/// Builds and scores the three populations and estimates each effect.
/// Estimation failures are recorded on their hypothesis; input failures are
/// gathered into one summary, thrown with the first failure's code after
/// every hypothesis ran.
EffectReport run_estimate(const RunConfig& config);
EffectReport run_estimate(const RunConfig& config, const Inputs& inputs);

/// Prediction files of a checkpoint directory in natural filename order.
std::vector<std::filesystem::path> list_checkpoints(const std::filesystem::path& dir);

/// One ATE triple per checkpoint; populations are built once and re-scored.
EffectReport run_dynamics(const RunConfig& config, const std::vector<std::filesystem::path>& checkpoints);
EffectReport run_dynamics(const RunConfig& config, const Inputs& inputs,
                          const std::vector<std::filesystem::path>& checkpoints);

/// Share of the knowledge-base queries in `predictions` answered with a gold
/// object, as a percentage; empty when no query is covered.
std::optional<double> kb_accuracy(const KnowledgeBase& kb, const PredictionSet& predictions);

} // namespace factcause
