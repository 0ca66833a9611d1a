#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "factcause/pattern.hpp"

namespace factcause {

using Count = std::int64_t;

/// Splits one line at '.', '!' or '?' followed by whitespace, keeping the
/// terminator with its sentence; each piece is whitespace-normalized and
/// empty pieces are dropped.
std::vector<std::string> segment_line(std::string_view line);

/// Sentence store with token postings. Immutable once built; every query is
/// const and safe to run concurrently.
class CorpusIndex {
public:
    CorpusIndex() = default;

    /// Sentences are normalized on the way in.
    static CorpusIndex from_sentences(std::vector<std::string> sentences);

    /// Concatenates shards in the given order.
    static CorpusIndex merge(std::vector<CorpusIndex> shards);

    std::size_t num_sentences() const { return sentences_.size(); }
    const std::string& sentence(std::size_t id) const { return sentences_[id]; }

    /// Exact match of the whitespace-normalized utterance against a stored
    /// sentence.
    bool utterance_present(std::string_view utterance) const;

    /// Ids of sentences containing `entity` at word boundaries, ascending.
    std::vector<std::uint32_t> sentences_containing(std::string_view entity) const;

    /// Sentences mentioning both surface strings; a sentence counts once.
    Count soc_count(std::string_view subject, std::string_view object) const;

    /// Sentences equal to the template with [Y] set to `object` and [X]
    /// standing for any non-empty span that does not begin or end with
    /// whitespace.
    Count poc_count(const Template& pattern, std::string_view object) const;

    /// Stable digest of the sentence sequence.
    std::uint64_t content_hash() const;

    void save(const std::filesystem::path& path) const;
    static CorpusIndex load(const std::filesystem::path& path);

private:
    void index_sentence(std::uint32_t id);
    std::vector<std::uint32_t> candidates_for(std::string_view entity) const;
    const std::vector<std::uint32_t>* rarest_posting(const std::vector<std::string_view>& tokens) const;

    std::vector<std::string> sentences_;
    std::unordered_map<std::string, std::uint32_t> sentence_counts_;
    std::unordered_map<std::string, std::vector<std::uint32_t>> postings_;
};

/// Reads UTF-8 text (a file, or every regular file under a directory in
/// path order), one or more sentences per line. `shards` > 1 segments line
/// ranges on worker threads; the result is identical to a sequential build.
/// Throws IoFailure or EncodingError.
CorpusIndex build_index(const std::filesystem::path& corpus, unsigned shards = 1);
CorpusIndex build_index_from_text(std::string_view text, unsigned shards = 1);

/// Object with the highest count; ties go to the lexicographically smallest
/// object. Throws EmptyCandidateSet.
std::string argmax_object(const std::map<std::string, Count>& counts);

enum class Bin { XS, S, M, L, XL };

std::string_view bin_label(Bin b);
Bin parse_bin(std::string_view label);

/// Upper-inclusive edges of the first four bins; the last bin is open.
struct BinEdges {
    Count xs = 1;
    Count s = 10;
    Count m = 100;
    Count l = 1000;

    bool strictly_increasing() const { return xs < s && s < m && m < l; }
};

/// [0,1] XS, (1,10] S, (10,100] M, (100,1000] L, above XL.
Bin bin_count(Count n, const BinEdges& edges = {});

} // namespace factcause

namespace factcause {

/// Sentence co-occurrence of `subject` with each candidate.
std::map<std::string, Count> soc_counts(const CorpusIndex& idx, std::string_view subject,
                                        const std::vector<std::string>& candidates);
/// Subject-wildcarded matches of `pattern` with each candidate as object.
std::map<std::string, Count> poc_counts(const CorpusIndex& idx, const Template& pattern,
                                        const std::vector<std::string>& candidates);

/// Candidates ordered by count, highest first, ties lexicographic; the head
/// is argmax_object(counts).
std::vector<std::string> rank_by_count(const std::map<std::string, Count>& counts);

} // namespace factcause
