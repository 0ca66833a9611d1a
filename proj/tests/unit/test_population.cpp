#include <map>
#include <set>
#include <sstream>

#include <doctest.h>

#include "check_errc.hpp"
#include "factcause/backdoor.hpp"
#include "factcause/population.hpp"
#include "fixture.hpp"

using namespace factcause;

namespace {

const Inputs& fixture_inputs() {
    static const Inputs inputs = load_inputs(fixture_config());
    return inputs;
}

MatchedPopulation fixture_population(Hypothesis h) {
    return build_population(h, fixture_inputs().kb, fixture_inputs().index, population_config(fixture_config()));
}

bool paired_equal(const MatchedPopulation& pop, const std::vector<std::string>& columns) {
    for (const auto& p : pop.pairs)
        for (const auto& c : columns)
            if (row_field(pop.rows[p.treated], c) != row_field(pop.rows[p.control], c)) return false;
    return true;
}

} // namespace

TEST_CASE("instantiation") {
    CHECK(instantiate("[X] is the capital of [Y].", "Paris", std::nullopt) == "Paris is the capital of [MASK].");
    CHECK(instantiate("[X] is the capital of [Y].", "Paris", std::string("France")) == "Paris is the capital of France.");
    CHECK(instantiate("[Y] has [X] as capital.", "Paris", std::nullopt, "<mask>") == "<mask> has Paris as capital.");
    CHECK_ERRC(instantiate("[X] is the capital.", "Paris", std::nullopt), Errc::MalformedPattern);
}

TEST_CASE("control matching") {
    const std::vector<MatchUnit> treated{{{"S"}, {3.0}}};
    const std::vector<MatchUnit> same{{{"S"}, {3.0}}, {{"S"}, {3.0}}};
    auto r = match_controls(treated, same);
    REQUIRE(r.pairs.size() == 1);
    CHECK(r.pairs[0].second == 0);

    const std::vector<MatchUnit> other_bin{{{"M"}, {3.0}}};
    r = match_controls(treated, other_bin);
    CHECK(r.pairs.empty());
    CHECK(r.unmatched == std::vector<std::size_t>{0});

    const std::vector<MatchUnit> near_far{{{"S"}, {5.0}}, {{"S"}, {2.0}}};
    r = match_controls(treated, near_far);
    CHECK(r.pairs[0].second == 1);

    const std::vector<MatchUnit> ties{{{"S"}, {4.0}}, {{"S"}, {2.0}}};
    r = match_controls(treated, ties);
    CHECK(r.pairs[0].second == 0);

    const std::vector<MatchUnit> two_treated{{{"S"}, {3.0}}, {{"S"}, {3.0}}};
    const std::vector<MatchUnit> one{{{"S"}, {3.0}}};
    r = match_controls(two_treated, one);
    CHECK(r.pairs.size() == 1);
    CHECK(r.unmatched == std::vector<std::size_t>{1});
    r = match_controls(two_treated, one, true);
    CHECK(r.pairs.size() == 2);
}

TEST_CASE("row fields") {
    PopulationRow row;
    row.subject = "Daria";
    row.soc_bin = Bin::M;
    row.kbt = true;
    CHECK(row_field(row, "subject") == "Daria");
    CHECK(row_field(row, "soc_bin") == "M");
    CHECK(row_field(row, "kbt") == "1");
    CHECK(row_field(row, "prediction").empty());
    for (const char* c : kPopulationColumns) CHECK_NOTHROW(row_field(row, c));
    CHECK_ERRC(row_field(row, "colour"), Errc::UnknownColumn);
}

TEST_CASE("fixture populations") {
    const auto& kb = fixture_inputs().kb;
    const std::map<Hypothesis, std::pair<std::size_t, std::size_t>> sizes{
        {Hypothesis::Utt, {16, 8}}, {Hypothesis::Poc, {14, 7}}, {Hypothesis::Soc, {42, 21}}};
    for (const auto h : kAllHypotheses) {
        CAPTURE(hypothesis_name(h));
        const auto pop = fixture_population(h);
        CHECK(pop.rows.size() == sizes.at(h).first);
        CHECK(pop.pairs.size() == sizes.at(h).second);
        CHECK(pop.rows.size() == 2 * pop.pairs.size());
        CHECK(pop == fixture_population(h));

        std::set<std::size_t> used;
        for (const auto& row : pop.rows) {
            const auto& cands = kb.candidates(row.relation);
            CHECK(std::binary_search(cands.begin(), cands.end(), row.object));
            CHECK(row.pair >= 0);
        }
        for (const auto& p : pop.pairs) {
            CHECK(pop.rows[p.treated].treatment);
            CHECK_FALSE(pop.rows[p.control].treatment);
            CHECK(used.insert(p.control).second);
        }
        auto discrete = adjustment_for(h).adjustment_columns;
        discrete.erase(std::remove(discrete.begin(), discrete.end(), "template"), discrete.end());
        CHECK(paired_equal(pop, discrete));
    }

    const auto utt = fixture_population(Hypothesis::Utt);
    for (const auto& p : utt.pairs) {
        CHECK(utt.rows[p.treated].utt_present);
        CHECK_FALSE(utt.rows[p.control].utt_present);
    }
    CHECK(utt.drops.unmatched_treated == 2);

    const auto poc = fixture_population(Hypothesis::Poc);
    for (const auto& row : poc.rows) CHECK(row.poc_count > 5);
    for (const auto& p : poc.pairs) {
        CHECK(poc.rows[p.treated].po_hc);
        CHECK(poc.rows[p.treated].template_text == poc.rows[p.control].template_text);
        CHECK(poc.rows[p.treated].poc_count >= poc.rows[p.control].poc_count);
    }
    CHECK(poc.drops.below_frequency == 8);

    const auto soc = fixture_population(Hypothesis::Soc);
    for (const auto& p : soc.pairs) {
        const auto& t = soc.rows[p.treated];
        const auto& c = soc.rows[p.control];
        CHECK(t.so_hc);
        CHECK(t.subject == c.subject);
        CHECK(t.soc_count >= c.soc_count);
    }
    CHECK(soc.drops.no_cooccurrence == 1);
}

TEST_CASE("scoring and serialization") {
    const auto& in = fixture_inputs();
    auto pop = fixture_population(Hypothesis::Soc);
    CHECK_ERRC(to_observations(pop), Errc::MissingPrediction);

    const auto keys = required_keys(pop);
    CHECK(std::is_sorted(keys.begin(), keys.end()));
    const auto perfect = baseline_predict(BaselineKind::Perfect, in.kb, nullptr, keys);
    PredictionSet partial(perfect.source_id());
    for (const auto& [key, rec] : perfect)
        if (key.subject != keys.front().subject) partial.insert(rec);
    CHECK_ERRC(score_population(pop, partial), Errc::MissingPrediction);
    CHECK_FALSE(pop.scored);

    score_population(pop, perfect);
    CHECK(pop.scored);
    for (const auto& row : pop.rows) {
        REQUIRE(row.outcome);
        CHECK(*row.outcome == (row.prediction == row.object ? 1 : 0));
    }
    const auto table = to_observations(pop);
    CHECK(table.num_rows() == pop.rows.size());

    const auto j = population_to_json(pop);
    CHECK(population_from_json(j) == pop);
    CHECK_ERRC(population_from_json(nlohmann::json::parse(R"({"hypothesis": "soc"})")), Errc::FormatError);

    std::ostringstream tsv;
    write_population(tsv, pop);
    std::istringstream back(tsv.str());
    const auto read = read_table(back);
    CHECK(read.num_rows() == pop.rows.size());
    CHECK(read.num_columns() == std::size(kPopulationColumns));

    const auto spec = adjustment_for(Hypothesis::Soc);
    CHECK(ate(table, "treatment", "outcome", spec.adjustment_columns) ==
          doctest::Approx(ate(read, "treatment", "outcome", spec.adjustment_columns)));
}

TEST_CASE("empty populations") {
    std::istringstream ps(R"({"relation": "r", "template": "[X] is near [Y]."})");
    const KnowledgeBase kb({{"A", "r", "B"}, {"C", "r", "D"}}, parse_patterns(ps));
    const auto idx = build_index_from_text("Nothing relevant here.\n");
    const auto keys = std::vector<ClozeKey>{{"A", "r", "[X] is near [Y]."}, {"C", "r", "[X] is near [Y]."}};
    const auto preds = baseline_predict(BaselineKind::Perfect, kb, nullptr, keys);
    for (const auto h : kAllHypotheses) CHECK_ERRC(build_table(h, kb, idx, preds), Errc::EmptyPopulation);
}
