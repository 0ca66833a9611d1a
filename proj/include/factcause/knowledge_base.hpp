#pragma once

#include <compare>
#include <tuple>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "factcause/pattern.hpp"

namespace factcause {

struct Triplet {
    std::string subject;
    std::string relation;
    std::string object;

    // relation-major so that sorted triplets group by relation
    auto operator<=>(const Triplet& o) const {
        return std::tie(relation, subject, object) <=> std::tie(o.relation, o.subject, o.object);
    }
    bool operator==(const Triplet&) const = default;
};

struct PatternSpec {
    std::string relation;
    Template pattern;
    bool is_anti = false;

    bool operator==(const PatternSpec&) const = default;
};

struct TripletLoad {
    std::vector<Triplet> triplets;  // sorted, unique
    std::size_t records = 0;
    std::size_t duplicates = 0;
    std::map<std::string, std::size_t> per_relation;
};

/// Newline-delimited JSON records {"subject", "relation", "object"}; blank
/// lines are skipped. Throws ParseError naming the line, EmptyKb, IoFailure.
TripletLoad parse_triplets(std::istream& in, const std::string& source = "<stream>");
TripletLoad load_kb(const std::filesystem::path& path);

/// Newline-delimited JSON records {"relation", "template", "is_anti"};
/// `is_anti` defaults to false. Repeated records collapse to the first.
std::vector<PatternSpec> parse_patterns(std::istream& in, const std::string& source = "<stream>");
std::vector<PatternSpec> load_patterns(const std::filesystem::path& path);

void write_triplets(std::ostream& out, const std::vector<Triplet>& triplets);
void write_patterns(std::ostream& out, const std::vector<PatternSpec>& patterns);

/// Triplets plus the paraphrase and anti-pattern templates of each relation.
class KnowledgeBase {
public:
    /// Throws InvalidKb when a pattern names a relation without triplets or a
    /// relation has no paraphrase (non-anti) pattern; EmptyKb without triplets.
    KnowledgeBase(std::vector<Triplet> triplets, std::vector<PatternSpec> patterns);

    const std::vector<Triplet>& triplets() const { return triplets_; }
    const std::vector<PatternSpec>& patterns() const { return patterns_; }
    const std::vector<std::string>& relations() const { return relations_; }

    /// Gold objects of the relation, sorted. Throws UnknownRelation.
    const std::vector<std::string>& candidates(const std::string& relation) const;
    /// Subjects with at least one triplet in the relation, sorted.
    const std::vector<std::string>& subjects(const std::string& relation) const;
    /// Objects the KB lists for (subject, relation), sorted; empty if none.
    std::vector<std::string> objects_for(const std::string& subject, const std::string& relation) const;

    std::vector<const PatternSpec*> patterns_for(const std::string& relation, bool include_anti) const;

    bool holds(const Triplet& t) const { return triplet_set_.count(t) > 0; }
    bool has_relation(const std::string& relation) const { return candidates_.count(relation) > 0; }

    friend bool operator==(const KnowledgeBase& a, const KnowledgeBase& b) {
        return a.triplets_ == b.triplets_ && a.patterns_ == b.patterns_;
    }

private:
    std::vector<Triplet> triplets_;
    std::vector<PatternSpec> patterns_;
    std::vector<std::string> relations_;
    std::set<Triplet> triplet_set_;
    std::map<std::string, std::vector<std::string>> candidates_;
    std::map<std::string, std::vector<std::string>> subjects_;
};

KnowledgeBase load_knowledge_base(const std::filesystem::path& triplets, const std::filesystem::path& patterns);

/// Objects of the relation's triplets: the type-preserving candidate set.
const std::vector<std::string>& restrict_candidates(const std::string& relation, const KnowledgeBase& kb);

} // namespace factcause
