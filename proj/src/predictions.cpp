#include "factcause/predictions.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>

#include <json.hpp>

#include "factcause/error.hpp"
#include "factcause/text.hpp"

namespace factcause {

std::string_view hypothesis_name(Hypothesis h) {
    switch (h) {
    case Hypothesis::Utt: return "utt";
    case Hypothesis::Poc: return "poc";
    case Hypothesis::Soc: return "soc";
    }
    return "?";
}

Hypothesis parse_hypothesis(std::string_view name) {
    for (auto h : kAllHypotheses)
        if (hypothesis_name(h) == name) return h;
    throw Error(Errc::InvalidConfig, "unknown hypothesis '" + std::string(name) + "' (utt, poc, soc)");
}

std::string describe(const ClozeKey& key) {
    return "(" + key.subject + ", " + key.relation + ", \"" + key.template_text + "\")";
}

PredictionSet::PredictionSet(std::string source_id) : source_id_(std::move(source_id)) {}

void PredictionSet::insert(PredictionRecord record) {
    if (records_.empty() && source_id_.empty()) source_id_ = record.source_id;
    if (record.source_id != source_id_)
        throw Error(Errc::FormatError, "record from source '" + record.source_id + "' in a set for '" + source_id_ + "'");
    auto key = record.key;
    if (!records_.emplace(key, std::move(record)).second)
        throw Error(Errc::DuplicateKey, "second prediction for " + describe(key));
}

const PredictionRecord* PredictionSet::find(const ClozeKey& key) const {
    auto it = records_.find(key);
    return it == records_.end() ? nullptr : &it->second;
}

namespace {

using nlohmann::json;

std::string string_field(const json& rec, const char* name, const std::string& loc) {
    auto it = rec.find(name);
    if (it == rec.end() || !it->is_string())
        throw Error(Errc::ParseError, loc + ": field '" + std::string(name) + "' missing or not a string");
    return std::string(text::trim(it->get<std::string>()));
}

} // namespace

PredictionSet parse_predictions(std::istream& in, const KnowledgeBase& kb, const std::string& source) {
    PredictionSet set;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (text::trim(line).empty()) continue;
        const std::string loc = source + ":" + std::to_string(lineno);
        json rec;
        try {
            rec = json::parse(line);
        } catch (const json::parse_error& e) {
            throw Error(Errc::ParseError, loc + ": " + e.what());
        }
        if (!rec.is_object()) throw Error(Errc::ParseError, loc + ": record is not an object");
        PredictionRecord r;
        r.key = {string_field(rec, "subject", loc), string_field(rec, "relation", loc), string_field(rec, "template", loc)};
        r.source_id = string_field(rec, "source_id", loc);
        auto pred = rec.find("prediction");
        if (pred == rec.end()) throw Error(Errc::ParseError, loc + ": field 'prediction' missing");
        if (!pred->is_null()) {
            if (!pred->is_string()) throw Error(Errc::ParseError, loc + ": field 'prediction' must be a string or null");
            r.predicted_object = std::string(text::trim(pred->get<std::string>()));
        }
        if (!kb.has_relation(r.key.relation))
            throw Error(Errc::UnknownRelation, loc + ": relation '" + r.key.relation + "' is not in the knowledge base");
        if (r.predicted_object) {
            const auto& cands = kb.candidates(r.key.relation);
            if (!std::binary_search(cands.begin(), cands.end(), *r.predicted_object))
                throw Error(Errc::CandidateViolation, loc + ": prediction '" + *r.predicted_object + "' for " +
                                                          describe(r.key) + " is not a gold object of the relation");
        }
        try {
            set.insert(std::move(r));
        } catch (const Error& e) {
            throw Error(e.code(), loc + ": " + e.what());
        }
    }
    return set;
}

PredictionSet load_predictions(const std::filesystem::path& path, const KnowledgeBase& kb) {
    std::ifstream in(path);
    if (!in) throw Error(Errc::IoFailure, "cannot open " + path.string());
    return parse_predictions(in, kb, path.string());
}

void write_predictions(std::ostream& out, const PredictionSet& set) {
    for (const auto& [key, r] : set) {
        nlohmann::ordered_json rec;
        rec["subject"] = key.subject;
        rec["relation"] = key.relation;
        rec["template"] = key.template_text;
        rec["prediction"] = r.predicted_object ? nlohmann::ordered_json(*r.predicted_object) : nlohmann::ordered_json();
        rec["source_id"] = r.source_id;
        out << rec.dump() << '\n';
    }
}

std::string_view baseline_name(BaselineKind kind) {
    switch (kind) {
    case BaselineKind::HeuristicUtt: return "heuristic-utt";
    case BaselineKind::HeuristicPoc: return "heuristic-poc";
    case BaselineKind::HeuristicSoc: return "heuristic-soc";
    case BaselineKind::Perfect: return "perfect";
    case BaselineKind::Random: return "random";
    }
    return "?";
}

BaselineKind parse_baseline(std::string_view name) {
    for (auto k : {BaselineKind::HeuristicUtt, BaselineKind::HeuristicPoc, BaselineKind::HeuristicSoc,
                   BaselineKind::Perfect, BaselineKind::Random})
        if (baseline_name(k) == name) return k;
    throw Error(Errc::InvalidConfig, "unknown baseline '" + std::string(name) + "'");
}

BaselineKind heuristic_for(Hypothesis h) {
    switch (h) {
    case Hypothesis::Utt: return BaselineKind::HeuristicUtt;
    case Hypothesis::Poc: return BaselineKind::HeuristicPoc;
    case Hypothesis::Soc: return BaselineKind::HeuristicSoc;
    }
    return BaselineKind::HeuristicSoc;
}

UttFallback parse_utt_fallback(std::string_view name) {
    if (name == "abstain") return UttFallback::Abstain;
    if (name == "soc") return UttFallback::Soc;
    throw Error(Errc::InvalidConfig, "unknown utt fallback '" + std::string(name) + "' (abstain, soc)");
}

std::string_view utt_fallback_name(UttFallback f) { return f == UttFallback::Abstain ? "abstain" : "soc"; }

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::size_t draw_index(std::uint64_t seed, const ClozeKey& key, std::size_t n) {
    std::uint64_t h = text::fnv1a(key.subject);
    h = text::fnv1a(std::string_view("\x1f", 1), h);
    h = text::fnv1a(key.relation, h);
    h = text::fnv1a(std::string_view("\x1f", 1), h);
    h = text::fnv1a(key.template_text, h);
    std::uint64_t state = seed ^ h;
    // rejection keeps the draw exactly uniform
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t v = splitmix64(state);
    while (v >= limit) v = splitmix64(state);
    return static_cast<std::size_t>(v % n);
}

} // namespace

PredictionSet baseline_predict(BaselineKind kind, const KnowledgeBase& kb, const CorpusIndex* stats,
                               std::span<const ClozeKey> queries, const BaselineOptions& options) {
    const bool heuristic = kind == BaselineKind::HeuristicUtt || kind == BaselineKind::HeuristicPoc ||
                           kind == BaselineKind::HeuristicSoc;
    if (heuristic && !stats)
        throw Error(Errc::MissingStats, std::string(baseline_name(kind)) + " needs corpus statistics");

    std::string source = "baseline:" + std::string(baseline_name(kind));
    if (kind == BaselineKind::Random) source += "(seed=" + std::to_string(options.seed) + ")";
    if (kind == BaselineKind::HeuristicUtt) source += "(fallback=" + std::string(utt_fallback_name(options.utt_fallback)) + ")";

    PredictionSet out(source);
    for (const auto& key : queries) {
        const auto& cands = kb.candidates(key.relation);
        if (cands.empty()) throw Error(Errc::EmptyCandidateSet, "no candidates for relation '" + key.relation + "'");
        std::optional<std::string> pick;
        switch (kind) {
        case BaselineKind::HeuristicSoc:
            pick = argmax_object(soc_counts(*stats, key.subject, cands));
            break;
        case BaselineKind::HeuristicPoc:
            pick = argmax_object(poc_counts(*stats, Template::parse(key.template_text), cands));
            break;
        case BaselineKind::HeuristicUtt: {
            const auto pattern = Template::parse(key.template_text);
            std::vector<std::string> seen;
            for (const auto& c : cands)
                if (stats->utterance_present(pattern.instantiate(key.subject, c))) seen.push_back(c);
            if (!seen.empty())
                pick = argmax_object(soc_counts(*stats, key.subject, seen));
            else if (options.utt_fallback == UttFallback::Soc)
                pick = argmax_object(soc_counts(*stats, key.subject, cands));
            break;
        }
        case BaselineKind::Perfect: {
            auto objs = kb.objects_for(key.subject, key.relation);
            if (objs.empty())
                throw Error(Errc::MissingReference, "no knowledge-base object for " + describe(key));
            pick = objs.front();
            break;
        }
        case BaselineKind::Random:
            pick = cands[draw_index(options.seed, key, cands.size())];
            break;
        }
        out.insert({key, std::move(pick), source});
    }
    return out;
}

int outcome_flag(Hypothesis hypothesis, std::string_view reference, const std::optional<std::string>& prediction) {
    const auto ref = text::trim(reference);
    if (ref.empty())
        throw Error(Errc::MissingReference, "no reference object for the " + std::string(hypothesis_name(hypothesis)) + " outcome");
    if (!prediction) return 0;
    return text::trim(*prediction) == ref ? 1 : 0;
}

} // namespace factcause
