#include "factcause/population.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>

#include "factcause/causal_graph.hpp"
#include "factcause/error.hpp"

namespace factcause {

std::string instantiate(std::string_view template_text, std::string_view subject,
                        const std::optional<std::string>& object, std::string_view mask) {
    const auto t = Template::parse(template_text);
    return object ? t.instantiate(subject, *object) : t.cloze(subject, mask);
}

MatchResult match_controls(std::span<const MatchUnit> treated, std::span<const MatchUnit> pool, bool reuse_controls) {
    MatchResult out;
    std::vector<bool> used(pool.size(), false);
    for (std::size_t i = 0; i < treated.size(); ++i) {
        std::optional<std::size_t> best;
        double best_distance = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < pool.size(); ++j) {
            if (used[j] && !reuse_controls) continue;
            if (pool[j].discrete != treated[i].discrete) continue;
            if (pool[j].continuous.size() != treated[i].continuous.size())
                throw Error(Errc::FormatError, "treated and pool units have different continuous arity");
            double sq = 0.0;
            for (std::size_t k = 0; k < pool[j].continuous.size(); ++k) {
                const double d = pool[j].continuous[k] - treated[i].continuous[k];
                sq += d * d;
            }
            const double distance = std::sqrt(sq);
            if (!best || distance < best_distance) {
                best = j;
                best_distance = distance;
            }
        }
        if (best) {
            out.pairs.emplace_back(i, *best);
            used[*best] = true;
        } else {
            out.unmatched.push_back(i);
        }
    }
    return out;
}

std::string row_field(const PopulationRow& row, std::string_view column) {
    auto flag = [](bool b) { return std::string(b ? "1" : "0"); };
    if (column == "pair") return std::to_string(row.pair);
    if (column == "subject") return row.subject;
    if (column == "object") return row.object;
    if (column == "relation") return row.relation;
    if (column == "template") return row.template_text;
    if (column == "is_anti") return flag(row.is_anti);
    if (column == "kbt") return flag(row.kbt);
    if (column == "treatment") return flag(row.treatment);
    if (column == "soc_count") return std::to_string(row.soc_count);
    if (column == "soc_bin") return std::string(bin_label(row.soc_bin));
    if (column == "poc_count") return std::to_string(row.poc_count);
    if (column == "utt_present") return flag(row.utt_present);
    if (column == "so_hc") return flag(row.so_hc);
    if (column == "po_hc") return flag(row.po_hc);
    if (column == "prediction") return row.prediction.value_or("");
    if (column == "outcome") return row.outcome ? std::to_string(*row.outcome) : std::string();
    throw Error(Errc::UnknownColumn, "population rows have no column '" + std::string(column) + "'");
}

namespace {

double numeric_field(const PopulationRow& row, std::string_view column) {
    if (column == "soc_count") return static_cast<double>(row.soc_count);
    if (column == "poc_count") return static_cast<double>(row.poc_count);
    throw Error(Errc::UnknownColumn, "'" + std::string(column) + "' is not a continuous column");
}

MatchUnit unit_of(const PopulationRow& row, const std::vector<std::string>& discrete,
                  const std::vector<std::string>& continuous) {
    MatchUnit u;
    for (const auto& c : discrete) u.discrete.push_back(row_field(row, c));
    for (const auto& c : continuous) u.continuous.push_back(numeric_field(row, c));
    return u;
}

} // namespace

MatchResult match_controls(std::span<const PopulationRow> treated, std::span<const PopulationRow> pool,
                           const std::vector<std::string>& discrete, const std::vector<std::string>& continuous,
                           bool reuse_controls) {
    std::vector<MatchUnit> t;
    std::vector<MatchUnit> p;
    for (const auto& r : treated) t.push_back(unit_of(r, discrete, continuous));
    for (const auto& r : pool) p.push_back(unit_of(r, discrete, continuous));
    return match_controls(t, p, reuse_controls);
}

namespace {

// Counts shared by every recipe for one relation.
struct RelationStats {
    std::map<std::string, std::map<std::string, Count>> soc;        // subject -> candidate -> count
    std::map<std::string, std::vector<std::string>> soc_ranked;     // subject -> candidates, most frequent first
    std::map<std::string, std::map<std::string, Count>> poc;        // template -> candidate -> count
    std::map<std::string, std::vector<std::string>> poc_ranked;
};

RelationStats relation_stats(const std::string& relation, const KnowledgeBase& kb, const CorpusIndex& idx) {
    RelationStats rs;
    const auto& cands = kb.candidates(relation);
    for (const auto& s : kb.subjects(relation)) {
        auto counts = soc_counts(idx, s, cands);
        rs.soc_ranked[s] = rank_by_count(counts);
        rs.soc[s] = std::move(counts);
    }
    for (const auto* p : kb.patterns_for(relation, true)) {
        auto counts = poc_counts(idx, p->pattern, cands);
        rs.poc_ranked[p->pattern.text()] = rank_by_count(counts);
        rs.poc[p->pattern.text()] = std::move(counts);
    }
    return rs;
}

struct Partial {
    std::vector<PopulationRow> rows;
    std::vector<MatchPair> pairs;
    DropReport drops;
};

class RelationBuilder {
public:
    RelationBuilder(const std::string& relation, const KnowledgeBase& kb, const CorpusIndex& idx,
                    const PopulationConfig& config)
        : relation_(relation), kb_(kb), idx_(idx), config_(config), stats_(relation_stats(relation, kb, idx)) {}

    Partial build(Hypothesis h) {
        switch (h) {
        case Hypothesis::Utt: build_utt(); break;
        case Hypothesis::Poc: build_poc(); break;
        case Hypothesis::Soc: build_soc(); break;
        }
        return std::move(out_);
    }

private:
    PopulationRow make_row(const std::string& subject, const std::string& object, const PatternSpec& p) const {
        PopulationRow r;
        r.subject = subject;
        r.object = object;
        r.relation = relation_;
        r.template_text = p.pattern.text();
        r.is_anti = p.is_anti;
        r.kbt = !p.is_anti && kb_.holds(Triplet{subject, relation_, object});
        r.soc_count = stats_.soc.at(subject).at(object);
        r.soc_bin = bin_count(r.soc_count, config_.bins);
        r.poc_count = stats_.poc.at(r.template_text).at(object);
        r.utt_present = idx_.utterance_present(p.pattern.instantiate(subject, object));
        r.so_hc = r.soc_count > 0 && stats_.soc_ranked.at(subject).front() == object;
        r.po_hc = r.poc_count > 0 && stats_.poc_ranked.at(r.template_text).front() == object;
        return r;
    }

    void add_matches(std::vector<PopulationRow> treated, std::vector<PopulationRow> pool,
                     const std::vector<std::string>& discrete) {
        for (auto& r : treated) r.treatment = true;
        for (auto& r : pool) r.treatment = false;
        const auto result = match_controls(treated, pool, discrete, {});
        for (auto i : result.unmatched) {
            ++out_.drops.unmatched_treated;
            if (out_.drops.unmatched_sample.size() < config_.drop_sample)
                out_.drops.unmatched_sample.push_back(describe(treated[i].key()) + " -> " + treated[i].object);
        }
        for (auto [ti, pj] : result.pairs) {
            out_.pairs.push_back({out_.rows.size(), out_.rows.size() + 1});
            out_.rows.push_back(treated[ti]);
            out_.rows.push_back(pool[pj]);
        }
    }

    // Each fact under each paraphrase; treated when the filled-in paraphrase
    // occurs verbatim, matched to the same fact under an unseen paraphrase.
    void build_utt() {
        const auto paraphrases = kb_.patterns_for(relation_, false);
        for (const auto& t : kb_.triplets()) {
            if (t.relation != relation_) continue;
            std::vector<PopulationRow> treated;
            std::vector<PopulationRow> pool;
            for (const auto* p : paraphrases) {
                auto row = make_row(t.subject, t.object, *p);
                (row.utt_present ? treated : pool).push_back(std::move(row));
            }
            add_matches(std::move(treated), std::move(pool), {"kbt", "soc_bin"});
        }
    }

    // Per paraphrase, the pattern's most frequent object against the next
    // most frequent one with the same subject; rare (template, object)
    // combinations are removed before matching.
    void build_poc() {
        for (const auto* p : kb_.patterns_for(relation_, false)) {
            const auto& counts = stats_.poc.at(p->pattern.text());
            std::vector<std::string> eligible;
            for (const auto& c : stats_.poc_ranked.at(p->pattern.text())) {
                if (counts.at(c) > config_.min_pattern_object_frequency)
                    eligible.push_back(c);
                else
                    ++out_.drops.below_frequency;
            }
            const auto& top = stats_.poc_ranked.at(p->pattern.text()).front();
            if (eligible.empty() || eligible.front() != top) continue;
            for (const auto& s : kb_.subjects(relation_)) {
                std::vector<PopulationRow> treated{make_row(s, top, *p)};
                std::vector<PopulationRow> pool;
                for (std::size_t k = 1; k < eligible.size(); ++k) pool.push_back(make_row(s, eligible[k], *p));
                add_matches(std::move(treated), std::move(pool), {"utt_present"});
            }
        }
    }

    // Per subject, its most co-occurring candidate against the next most
    // co-occurring one in the same bin, under paraphrases and anti-patterns.
    void build_soc() {
        const auto patterns = kb_.patterns_for(relation_, true);
        for (const auto& s : kb_.subjects(relation_)) {
            const auto& ranked = stats_.soc_ranked.at(s);
            if (stats_.soc.at(s).at(ranked.front()) == 0) {
                ++out_.drops.no_cooccurrence;
                continue;
            }
            for (const auto* p : patterns) {
                std::vector<PopulationRow> treated{make_row(s, ranked.front(), *p)};
                std::vector<PopulationRow> pool;
                for (std::size_t k = 1; k < ranked.size(); ++k) pool.push_back(make_row(s, ranked[k], *p));
                add_matches(std::move(treated), std::move(pool), {"soc_bin"});
            }
        }
    }

    const std::string& relation_;
    const KnowledgeBase& kb_;
    const CorpusIndex& idx_;
    const PopulationConfig& config_;
    RelationStats stats_;
    Partial out_;
};

bool row_order(const PopulationRow& a, const PopulationRow& b) {
    return std::tie(a.relation, a.subject, a.object, a.template_text) <
           std::tie(b.relation, b.subject, b.object, b.template_text);
}

// Sorts rows into emission order and renumbers pairs by treated position.
void canonicalize(MatchedPopulation& pop) {
    std::vector<std::size_t> order(pop.rows.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return row_order(pop.rows[a], pop.rows[b]); });
    std::vector<std::size_t> position(order.size());
    std::vector<PopulationRow> rows;
    rows.reserve(order.size());
    for (std::size_t k = 0; k < order.size(); ++k) {
        position[order[k]] = k;
        rows.push_back(std::move(pop.rows[order[k]]));
    }
    for (auto& p : pop.pairs) p = {position[p.treated], position[p.control]};
    std::sort(pop.pairs.begin(), pop.pairs.end(),
              [](const MatchPair& a, const MatchPair& b) { return a.treated < b.treated; });
    pop.rows = std::move(rows);
    for (std::size_t k = 0; k < pop.pairs.size(); ++k) {
        pop.rows[pop.pairs[k].treated].pair = static_cast<long>(k);
        pop.rows[pop.pairs[k].control].pair = static_cast<long>(k);
    }
}

} // namespace

MatchedPopulation build_population(Hypothesis h, const KnowledgeBase& kb, const CorpusIndex& stats,
                                   const PopulationConfig& config) {
    const auto& relations = kb.relations();
    std::vector<Partial> parts(relations.size());
    const unsigned workers = std::max(1u, std::min<unsigned>(config.threads, static_cast<unsigned>(relations.size())));
    if (workers == 1) {
        for (std::size_t i = 0; i < relations.size(); ++i)
            parts[i] = RelationBuilder(relations[i], kb, stats, config).build(h);
    } else {
        std::vector<std::future<void>> jobs;
        for (unsigned w = 0; w < workers; ++w)
            jobs.push_back(std::async(std::launch::async, [&, w] {
                for (std::size_t i = w; i < relations.size(); i += workers)
                    parts[i] = RelationBuilder(relations[i], kb, stats, config).build(h);
            }));
        for (auto& j : jobs) j.get();
    }

    // merged in relation order
    MatchedPopulation pop;
    pop.hypothesis = h;
    for (auto& part : parts) {
        const std::size_t offset = pop.rows.size();
        for (auto& p : part.pairs) pop.pairs.push_back({p.treated + offset, p.control + offset});
        std::move(part.rows.begin(), part.rows.end(), std::back_inserter(pop.rows));
        pop.drops.unmatched_treated += part.drops.unmatched_treated;
        pop.drops.below_frequency += part.drops.below_frequency;
        pop.drops.no_cooccurrence += part.drops.no_cooccurrence;
        for (auto& s : part.drops.unmatched_sample)
            if (pop.drops.unmatched_sample.size() < config.drop_sample) pop.drops.unmatched_sample.push_back(std::move(s));
    }
    canonicalize(pop);
    return pop;
}

std::vector<ClozeKey> required_keys(const MatchedPopulation& pop) {
    std::vector<ClozeKey> keys;
    for (const auto& r : pop.rows) keys.push_back(r.key());
    std::sort(keys.begin(), keys.end());
    keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
    return keys;
}

void score_population(MatchedPopulation& pop, const PredictionSet& predictions) {
    std::vector<ClozeKey> missing;
    for (auto& r : pop.rows) {
        const auto* rec = predictions.find(r.key());
        if (!rec) {
            missing.push_back(r.key());
            continue;
        }
        r.prediction = rec->predicted_object;
        r.outcome = outcome_flag(pop.hypothesis, r.object, rec->predicted_object);
    }
    if (!missing.empty()) {
        std::sort(missing.begin(), missing.end());
        missing.erase(std::unique(missing.begin(), missing.end()), missing.end());
        std::ostringstream msg;
        msg << missing.size() << " cloze quer" << (missing.size() == 1 ? "y" : "ies") << " of the "
            << hypothesis_name(pop.hypothesis) << " population have no prediction in '" << predictions.source_id()
            << "':";
        for (std::size_t i = 0; i < missing.size() && i < 10; ++i) msg << ' ' << describe(missing[i]);
        if (missing.size() > 10) msg << " ...";
        for (auto& r : pop.rows) {
            r.prediction.reset();
            r.outcome.reset();
        }
        pop.scored = false;
        throw Error(Errc::MissingPrediction, msg.str());
    }
    pop.scored = true;
}

MatchedPopulation build_table(Hypothesis h, const KnowledgeBase& kb, const CorpusIndex& stats,
                              const PredictionSet& predictions, const PopulationConfig& config) {
    auto pop = build_population(h, kb, stats, config);
    if (pop.pairs.empty())
        throw Error(Errc::EmptyPopulation, "no matched pairs for the " + std::string(hypothesis_name(h)) + " hypothesis");
    score_population(pop, predictions);
    return pop;
}

AdjustmentSpec adjustment_for(Hypothesis h) {
    using namespace node;
    switch (h) {
    case Hypothesis::Utt:
        return {kUtterance, kOutcomeUtt, {kPattern, kKbt, kSoc}, {"template", "kbt", "soc_bin"}};
    case Hypothesis::Poc:
        // The pattern opens a second backdoor path (through the cloze) that
        // the utterance alone leaves unblocked.
        return {kPoHc, kOutcomePoc, {kPattern, kUtterance}, {"template", "utt_present"}};
    case Hypothesis::Soc:
        return {kSoHc, kOutcomeSoc, {kSoc}, {"soc_bin"}};
    }
    throw Error(Errc::InvalidConfig, "unknown hypothesis");
}

void write_population(std::ostream& out, const MatchedPopulation& pop) {
    bool first = true;
    for (const char* c : kPopulationColumns) {
        out << (first ? "" : "\t") << c;
        first = false;
    }
    out << '\n';
    for (const auto& r : pop.rows) {
        first = true;
        for (const char* c : kPopulationColumns) {
            out << (first ? "" : "\t") << row_field(r, c);
            first = false;
        }
        out << '\n';
    }
}

ObservationTable to_observations(const MatchedPopulation& pop) {
    if (!pop.scored) throw Error(Errc::MissingPrediction, "population has not been scored");
    std::vector<std::string> columns(std::begin(kPopulationColumns), std::end(kPopulationColumns));
    ObservationTable table(columns);
    std::vector<std::string> values(columns.size());
    for (const auto& r : pop.rows) {
        for (std::size_t c = 0; c < columns.size(); ++c) values[c] = row_field(r, columns[c]);
        table.add_row(values);
    }
    return table;
}

nlohmann::json population_to_json(const MatchedPopulation& pop) {
    using nlohmann::json;
    json rows = json::array();
    for (const auto& r : pop.rows) {
        rows.push_back({{"subject", r.subject},       {"object", r.object},
                        {"relation", r.relation},     {"template", r.template_text},
                        {"is_anti", r.is_anti},       {"kbt", r.kbt},
                        {"treatment", r.treatment},   {"soc_count", r.soc_count},
                        {"poc_count", r.poc_count},   {"utt_present", r.utt_present},
                        {"so_hc", r.so_hc},           {"po_hc", r.po_hc},
                        {"soc_bin", bin_label(r.soc_bin)}});
        if (pop.scored) {
            rows.back()["prediction"] = r.prediction ? json(*r.prediction) : json(nullptr);
            rows.back()["outcome"] = r.outcome.value_or(0);
        }
    }
    json pairs = json::array();
    for (const auto& p : pop.pairs) pairs.push_back({p.treated, p.control});
    return {{"hypothesis", hypothesis_name(pop.hypothesis)},
            {"scored", pop.scored},
            {"rows", rows},
            {"pairs", pairs},
            {"drops",
             {{"unmatched_treated", pop.drops.unmatched_treated},
              {"unmatched_sample", pop.drops.unmatched_sample},
              {"below_frequency", pop.drops.below_frequency},
              {"no_cooccurrence", pop.drops.no_cooccurrence}}}};
}

MatchedPopulation population_from_json(const nlohmann::json& j) {
    try {
        MatchedPopulation pop;
        pop.hypothesis = parse_hypothesis(j.at("hypothesis").get<std::string>());
        pop.scored = j.value("scored", false);
        for (const auto& jr : j.at("rows")) {
            PopulationRow r;
            r.subject = jr.at("subject").get<std::string>();
            r.object = jr.at("object").get<std::string>();
            r.relation = jr.at("relation").get<std::string>();
            r.template_text = jr.at("template").get<std::string>();
            r.is_anti = jr.at("is_anti").get<bool>();
            r.kbt = jr.at("kbt").get<bool>();
            r.treatment = jr.at("treatment").get<bool>();
            r.soc_count = jr.at("soc_count").get<Count>();
            r.poc_count = jr.at("poc_count").get<Count>();
            r.utt_present = jr.at("utt_present").get<bool>();
            r.so_hc = jr.at("so_hc").get<bool>();
            r.po_hc = jr.at("po_hc").get<bool>();
            r.soc_bin = parse_bin(jr.at("soc_bin").get<std::string>());
            if (pop.scored) {
                if (!jr.at("prediction").is_null()) r.prediction = jr.at("prediction").get<std::string>();
                r.outcome = jr.at("outcome").get<int>();
            }
            pop.rows.push_back(std::move(r));
        }
        for (const auto& jp : j.at("pairs")) pop.pairs.push_back({jp.at(0).get<std::size_t>(), jp.at(1).get<std::size_t>()});
        const auto& d = j.at("drops");
        pop.drops.unmatched_treated = d.at("unmatched_treated").get<std::size_t>();
        pop.drops.unmatched_sample = d.at("unmatched_sample").get<std::vector<std::string>>();
        pop.drops.below_frequency = d.at("below_frequency").get<std::size_t>();
        pop.drops.no_cooccurrence = d.at("no_cooccurrence").get<std::size_t>();
        for (std::size_t k = 0; k < pop.pairs.size(); ++k) {
            pop.rows.at(pop.pairs[k].treated).pair = static_cast<long>(k);
            pop.rows.at(pop.pairs[k].control).pair = static_cast<long>(k);
        }
        return pop;
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::FormatError, std::string("malformed cached population: ") + e.what());
    }
}

} // namespace factcause
