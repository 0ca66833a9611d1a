#include "factcause/knowledge_base.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>

#include <json.hpp>

#include "factcause/error.hpp"
#include "factcause/text.hpp"

namespace factcause {

namespace {

using nlohmann::json;

std::string where(const std::string& source, std::size_t lineno) {
    return source + ":" + std::to_string(lineno);
}

std::string required_field(const json& rec, const char* field, const std::string& loc) {
    auto it = rec.find(field);
    if (it == rec.end() || it->is_null()) throw Error(Errc::ParseError, loc + ": missing field '" + field + "'");
    if (!it->is_string()) throw Error(Errc::ParseError, loc + ": field '" + std::string(field) + "' must be a string");
    auto value = std::string(text::trim(it->get<std::string>()));
    if (value.empty()) throw Error(Errc::ParseError, loc + ": field '" + std::string(field) + "' is empty");
    if (value.find_first_of("\t\n\r") != std::string::npos)
        throw Error(Errc::ParseError, loc + ": field '" + std::string(field) + "' contains a tab or newline");
    if (!text::is_valid_utf8(value)) throw Error(Errc::EncodingError, loc + ": field '" + std::string(field) + "'");
    return value;
}

template <typename Fn>
void for_each_record(std::istream& in, const std::string& source, Fn&& fn) {
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (text::trim(line).empty()) continue;
        json rec;
        try {
            rec = json::parse(line);
        } catch (const json::parse_error& e) {
            throw Error(Errc::ParseError, where(source, lineno) + ": " + e.what());
        }
        if (!rec.is_object()) throw Error(Errc::ParseError, where(source, lineno) + ": record is not an object");
        fn(rec, where(source, lineno));
    }
}

std::ifstream open(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(Errc::IoFailure, "cannot open " + path.string());
    return in;
}

} // namespace

TripletLoad parse_triplets(std::istream& in, const std::string& source) {
    TripletLoad out;
    std::set<Triplet> seen;
    for_each_record(in, source, [&](const json& rec, const std::string& loc) {
        Triplet t{required_field(rec, "subject", loc), required_field(rec, "relation", loc),
                  required_field(rec, "object", loc)};
        ++out.records;
        if (!seen.insert(t).second) ++out.duplicates;
    });
    if (seen.empty()) throw Error(Errc::EmptyKb, source + " holds no triplets");
    out.triplets.assign(seen.begin(), seen.end());
    for (const auto& t : out.triplets) ++out.per_relation[t.relation];
    return out;
}

TripletLoad load_kb(const std::filesystem::path& path) {
    auto in = open(path);
    return parse_triplets(in, path.string());
}

std::vector<PatternSpec> parse_patterns(std::istream& in, const std::string& source) {
    std::vector<PatternSpec> out;
    for_each_record(in, source, [&](const json& rec, const std::string& loc) {
        const auto relation = required_field(rec, "relation", loc);
        const auto raw = required_field(rec, "template", loc);
        bool is_anti = false;
        if (auto it = rec.find("is_anti"); it != rec.end() && !it->is_null()) {
            if (!it->is_boolean()) throw Error(Errc::ParseError, loc + ": field 'is_anti' must be a boolean");
            is_anti = it->get<bool>();
        }
        Template pattern = [&] {
            try {
                return Template::parse(raw);
            } catch (const Error& e) {
                throw Error(Errc::MalformedPattern, loc + ": " + e.what());
            }
        }();
        PatternSpec spec{relation, std::move(pattern), is_anti};
        if (std::find(out.begin(), out.end(), spec) == out.end()) out.push_back(std::move(spec));
    });
    return out;
}

std::vector<PatternSpec> load_patterns(const std::filesystem::path& path) {
    auto in = open(path);
    return parse_patterns(in, path.string());
}

void write_triplets(std::ostream& out, const std::vector<Triplet>& triplets) {
    for (const auto& t : triplets) {
        nlohmann::ordered_json rec;
        rec["subject"] = t.subject;
        rec["relation"] = t.relation;
        rec["object"] = t.object;
        out << rec.dump() << '\n';
    }
}

void write_patterns(std::ostream& out, const std::vector<PatternSpec>& patterns) {
    for (const auto& p : patterns) {
        nlohmann::ordered_json rec;
        rec["relation"] = p.relation;
        rec["template"] = p.pattern.text();
        rec["is_anti"] = p.is_anti;
        out << rec.dump() << '\n';
    }
}

KnowledgeBase::KnowledgeBase(std::vector<Triplet> triplets, std::vector<PatternSpec> patterns)
    : patterns_(std::move(patterns)) {
    triplet_set_.insert(triplets.begin(), triplets.end());
    if (triplet_set_.empty()) throw Error(Errc::EmptyKb, "knowledge base has no triplets");
    triplets_.assign(triplet_set_.begin(), triplet_set_.end());
    for (const auto& t : triplets_) {
        if (t.subject.empty() || t.relation.empty() || t.object.empty())
            throw Error(Errc::InvalidKb, "triplet with an empty field");
        candidates_[t.relation].push_back(t.object);
        subjects_[t.relation].push_back(t.subject);
    }
    auto sort_unique = [](std::vector<std::string>& v) {
        std::sort(v.begin(), v.end());
        v.erase(std::unique(v.begin(), v.end()), v.end());
    };
    for (auto& [rel, objs] : candidates_) {
        sort_unique(objs);
        relations_.push_back(rel);
    }
    for (auto& [rel, subs] : subjects_) sort_unique(subs);

    std::set<std::string> with_paraphrase;
    for (const auto& p : patterns_) {
        if (!candidates_.count(p.relation))
            throw Error(Errc::InvalidKb, "pattern '" + p.pattern.text() + "' names relation '" + p.relation +
                                             "' which has no triplets");
        if (!p.is_anti) with_paraphrase.insert(p.relation);
    }
    for (const auto& rel : relations_)
        if (!with_paraphrase.count(rel)) throw Error(Errc::InvalidKb, "relation '" + rel + "' has no paraphrase pattern");
}

const std::vector<std::string>& KnowledgeBase::candidates(const std::string& relation) const {
    auto it = candidates_.find(relation);
    if (it == candidates_.end()) throw Error(Errc::UnknownRelation, "unknown relation '" + relation + "'");
    return it->second;
}

const std::vector<std::string>& KnowledgeBase::subjects(const std::string& relation) const {
    auto it = subjects_.find(relation);
    if (it == subjects_.end()) throw Error(Errc::UnknownRelation, "unknown relation '" + relation + "'");
    return it->second;
}

std::vector<std::string> KnowledgeBase::objects_for(const std::string& subject, const std::string& relation) const {
    std::vector<std::string> out;
    for (auto it = triplet_set_.lower_bound(Triplet{subject, relation, ""});
         it != triplet_set_.end() && it->relation == relation && it->subject == subject; ++it)
        out.push_back(it->object);
    return out;
}

std::vector<const PatternSpec*> KnowledgeBase::patterns_for(const std::string& relation, bool include_anti) const {
    std::vector<const PatternSpec*> out;
    for (const auto& p : patterns_)
        if (p.relation == relation && (include_anti || !p.is_anti)) out.push_back(&p);
    return out;
}

KnowledgeBase load_knowledge_base(const std::filesystem::path& triplets, const std::filesystem::path& patterns) {
    return KnowledgeBase(load_kb(triplets).triplets, load_patterns(patterns));
}

const std::vector<std::string>& restrict_candidates(const std::string& relation, const KnowledgeBase& kb) {
    return kb.candidates(relation);
}

} // namespace factcause
