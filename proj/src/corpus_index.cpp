#include "factcause/corpus_index.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <future>
#include <sstream>
#include <thread>

#include "factcause/error.hpp"
#include "factcause/text.hpp"

namespace factcause {

namespace {

constexpr char kMagic[8] = {'F', 'C', 'C', 'O', 'R', 'P', 'U', 'S'};
constexpr std::uint32_t kFormatVersion = 1;

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\f' || c == '\v'; }

template <typename T>
void put(std::ostream& out, T v) {
    unsigned char buf[sizeof(T)];
    for (std::size_t i = 0; i < sizeof(T); ++i) buf[i] = static_cast<unsigned char>((static_cast<std::uint64_t>(v) >> (8 * i)) & 0xFF);
    out.write(reinterpret_cast<const char*>(buf), sizeof(T));
}

template <typename T>
T get(std::istream& in, const std::filesystem::path& path) {
    unsigned char buf[sizeof(T)];
    if (!in.read(reinterpret_cast<char*>(buf), sizeof(T)))
        throw Error(Errc::FormatError, "truncated index file " + path.string());
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
    return static_cast<T>(v);
}

} // namespace

std::vector<std::string> segment_line(std::string_view line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if ((c == '.' || c == '!' || c == '?') && i + 1 < line.size() && is_space(line[i + 1])) {
            auto s = text::normalize_whitespace(line.substr(start, i + 1 - start));
            if (!s.empty()) out.push_back(std::move(s));
            start = i + 1;
        }
    }
    auto tail = text::normalize_whitespace(line.substr(std::min(start, line.size())));
    if (!tail.empty()) out.push_back(std::move(tail));
    return out;
}

CorpusIndex CorpusIndex::from_sentences(std::vector<std::string> sentences) {
    CorpusIndex idx;
    idx.sentences_.reserve(sentences.size());
    for (auto& s : sentences) {
        auto norm = text::normalize_whitespace(s);
        if (norm.empty()) continue;
        idx.sentences_.push_back(std::move(norm));
    }
    for (std::uint32_t id = 0; id < idx.sentences_.size(); ++id) idx.index_sentence(id);
    return idx;
}

void CorpusIndex::index_sentence(std::uint32_t id) {
    const std::string& s = sentences_[id];
    ++sentence_counts_[s];
    for (auto tok : text::word_tokens(s)) {
        auto& posting = postings_[std::string(tok)];
        if (posting.empty() || posting.back() != id) posting.push_back(id);
    }
}

CorpusIndex CorpusIndex::merge(std::vector<CorpusIndex> shards) {
    CorpusIndex out;
    for (auto& shard : shards) {
        const auto offset = static_cast<std::uint32_t>(out.sentences_.size());
        for (auto& [sentence, n] : shard.sentence_counts_) out.sentence_counts_[sentence] += n;
        for (auto& [tok, posting] : shard.postings_) {
            auto& dst = out.postings_[tok];
            dst.reserve(dst.size() + posting.size());
            for (auto id : posting) dst.push_back(id + offset);
        }
        std::move(shard.sentences_.begin(), shard.sentences_.end(), std::back_inserter(out.sentences_));
    }
    return out;
}

bool CorpusIndex::utterance_present(std::string_view utterance) const {
    return sentence_counts_.count(text::normalize_whitespace(utterance)) > 0;
}

const std::vector<std::uint32_t>* CorpusIndex::rarest_posting(const std::vector<std::string_view>& tokens) const {
    static const std::vector<std::uint32_t> kNone;
    const std::vector<std::uint32_t>* best = nullptr;
    for (auto tok : tokens) {
        auto it = postings_.find(std::string(tok));
        if (it == postings_.end()) return &kNone;
        if (!best || it->second.size() < best->size()) best = &it->second;
    }
    return best;
}

std::vector<std::uint32_t> CorpusIndex::candidates_for(std::string_view entity) const {
    if (const auto* posting = rarest_posting(text::word_tokens(entity))) return *posting;
    std::vector<std::uint32_t> all(sentences_.size());
    for (std::uint32_t i = 0; i < all.size(); ++i) all[i] = i;
    return all;
}

std::vector<std::uint32_t> CorpusIndex::sentences_containing(std::string_view entity) const {
    std::vector<std::uint32_t> out;
    if (entity.empty()) return out;
    for (auto id : candidates_for(entity))
        if (text::contains_at_word_boundary(sentences_[id], entity)) out.push_back(id);
    return out;
}

Count CorpusIndex::soc_count(std::string_view subject, std::string_view object) const {
    if (subject.empty() || object.empty()) return 0;
    const auto a = candidates_for(subject);
    const auto b = candidates_for(object);
    const auto& shorter = a.size() <= b.size() ? a : b;
    Count n = 0;
    for (auto id : shorter) {
        const auto& s = sentences_[id];
        if (text::contains_at_word_boundary(s, subject) && text::contains_at_word_boundary(s, object)) ++n;
    }
    return n;
}

Count CorpusIndex::poc_count(const Template& pattern, std::string_view object) const {
    if (object.empty()) return 0;
    const auto frame = pattern.subject_frame(object);
    const std::string_view before = frame.before;
    const std::string_view after = frame.after;

    // Tokens of the literal parts that stay whole whatever the subject is.
    std::vector<std::string_view> anchors = text::word_tokens(before);
    if (!anchors.empty() && text::is_word_byte(static_cast<unsigned char>(before.back()))) anchors.pop_back();
    auto tail = text::word_tokens(after);
    if (!tail.empty() && text::is_word_byte(static_cast<unsigned char>(after.front()))) tail.erase(tail.begin());
    anchors.insert(anchors.end(), tail.begin(), tail.end());

    std::vector<std::uint32_t> all;
    const std::vector<std::uint32_t>* candidates = rarest_posting(anchors);
    if (!candidates) {
        all.resize(sentences_.size());
        for (std::uint32_t i = 0; i < all.size(); ++i) all[i] = i;
        candidates = &all;
    }
    Count n = 0;
    for (auto id : *candidates) {
        std::string_view s = sentences_[id];
        if (s.size() <= before.size() + after.size()) continue;
        if (s.substr(0, before.size()) != before || s.substr(s.size() - after.size()) != after) continue;
        const auto span = s.substr(before.size(), s.size() - before.size() - after.size());
        if (is_space(span.front()) || is_space(span.back())) continue;
        ++n;
    }
    return n;
}

std::uint64_t CorpusIndex::content_hash() const {
    std::uint64_t h = text::fnv1a("factcause-corpus");
    for (const auto& s : sentences_) {
        const auto len = static_cast<std::uint64_t>(s.size());
        h = text::fnv1a(std::string_view(reinterpret_cast<const char*>(&len), sizeof len), h);
        h = text::fnv1a(s, h);
    }
    return h;
}

void CorpusIndex::save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::IoFailure, "cannot write " + path.string());
    out.write(kMagic, sizeof kMagic);
    put<std::uint32_t>(out, kFormatVersion);
    put<std::uint64_t>(out, sentences_.size());
    for (const auto& s : sentences_) {
        put<std::uint32_t>(out, static_cast<std::uint32_t>(s.size()));
        out.write(s.data(), static_cast<std::streamsize>(s.size()));
    }
    put<std::uint64_t>(out, content_hash());
    if (!out) throw Error(Errc::IoFailure, "failed writing " + path.string());
}

CorpusIndex CorpusIndex::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(Errc::IoFailure, "cannot open " + path.string());
    char magic[sizeof kMagic];
    if (!in.read(magic, sizeof magic) || std::memcmp(magic, kMagic, sizeof kMagic) != 0)
        throw Error(Errc::FormatError, path.string() + " is not a corpus index");
    const auto version = get<std::uint32_t>(in, path);
    if (version != kFormatVersion)
        throw Error(Errc::FormatError, "unsupported index version " + std::to_string(version));
    const auto n = get<std::uint64_t>(in, path);
    std::vector<std::string> sentences;
    sentences.reserve(static_cast<std::size_t>(std::min<std::uint64_t>(n, 1u << 24)));
    for (std::uint64_t i = 0; i < n; ++i) {
        const auto len = get<std::uint32_t>(in, path);
        std::string s(len, '\0');
        if (!in.read(s.data(), len)) throw Error(Errc::FormatError, "truncated index file " + path.string());
        sentences.push_back(std::move(s));
    }
    const auto stored_hash = get<std::uint64_t>(in, path);
    CorpusIndex idx;
    idx.sentences_ = std::move(sentences);
    for (std::uint32_t id = 0; id < idx.sentences_.size(); ++id) idx.index_sentence(id);
    if (idx.content_hash() != stored_hash) throw Error(Errc::FormatError, "checksum mismatch in " + path.string());
    return idx;
}

CorpusIndex build_index_from_text(std::string_view body, unsigned shards) {
    if (!text::is_valid_utf8(body)) throw Error(Errc::EncodingError, "corpus is not valid UTF-8");
    std::vector<std::string_view> lines;
    std::size_t start = 0;
    while (start < body.size()) {
        auto nl = body.find('\n', start);
        if (nl == std::string_view::npos) nl = body.size();
        lines.push_back(body.substr(start, nl - start));
        start = nl + 1;
    }
    auto build_range = [&lines](std::size_t lo, std::size_t hi) {
        std::vector<std::string> sentences;
        for (std::size_t i = lo; i < hi; ++i)
            for (auto& s : segment_line(lines[i])) sentences.push_back(std::move(s));
        return CorpusIndex::from_sentences(std::move(sentences));
    };
    shards = std::max(1u, std::min<unsigned>(shards, static_cast<unsigned>(std::max<std::size_t>(lines.size(), 1))));
    if (shards == 1) return build_range(0, lines.size());

    std::vector<std::future<CorpusIndex>> parts;
    const std::size_t per = (lines.size() + shards - 1) / shards;
    for (std::size_t lo = 0; lo < lines.size(); lo += per)
        parts.push_back(std::async(std::launch::async, build_range, lo, std::min(lines.size(), lo + per)));
    std::vector<CorpusIndex> built;
    for (auto& f : parts) built.push_back(f.get());
    return CorpusIndex::merge(std::move(built));
}

CorpusIndex build_index(const std::filesystem::path& corpus, unsigned shards) {
    std::error_code ec;
    std::vector<std::filesystem::path> files;
    if (std::filesystem::is_directory(corpus, ec)) {
        for (const auto& entry : std::filesystem::recursive_directory_iterator(corpus, ec))
            if (entry.is_regular_file()) files.push_back(entry.path());
        std::sort(files.begin(), files.end());
    } else if (std::filesystem::is_regular_file(corpus, ec)) {
        files.push_back(corpus);
    } else {
        throw Error(Errc::IoFailure, "corpus path " + corpus.string() + " does not exist");
    }
    std::string body;
    for (const auto& f : files) {
        std::ifstream in(f, std::ios::binary);
        if (!in) throw Error(Errc::IoFailure, "cannot read " + f.string());
        std::ostringstream ss;
        ss << in.rdbuf();
        auto chunk = ss.str();
        if (!text::is_valid_utf8(chunk)) throw Error(Errc::EncodingError, f.string() + " is not valid UTF-8");
        body += chunk;
        if (!body.empty() && body.back() != '\n') body.push_back('\n');
    }
    return build_index_from_text(body, shards);
}

std::string argmax_object(const std::map<std::string, Count>& counts) {
    if (counts.empty()) throw Error(Errc::EmptyCandidateSet, "argmax over an empty candidate set");
    // std::map iterates in lexicographic order, so the first maximum wins ties.
    auto best = counts.begin();
    for (auto it = counts.begin(); it != counts.end(); ++it)
        if (it->second > best->second) best = it;
    return best->first;
}

std::string_view bin_label(Bin b) {
    switch (b) {
    case Bin::XS: return "XS";
    case Bin::S: return "S";
    case Bin::M: return "M";
    case Bin::L: return "L";
    case Bin::XL: return "XL";
    }
    return "?";
}

Bin parse_bin(std::string_view label) {
    for (Bin b : {Bin::XS, Bin::S, Bin::M, Bin::L, Bin::XL})
        if (bin_label(b) == label) return b;
    throw Error(Errc::ParseError, "unknown bin label '" + std::string(label) + "'");
}

Bin bin_count(Count n, const BinEdges& edges) {
    if (n <= edges.xs) return Bin::XS;
    if (n <= edges.s) return Bin::S;
    if (n <= edges.m) return Bin::M;
    if (n <= edges.l) return Bin::L;
    return Bin::XL;
}

} // namespace factcause

namespace factcause {

std::map<std::string, Count> soc_counts(const CorpusIndex& idx, std::string_view subject,
                                        const std::vector<std::string>& candidates) {
    std::map<std::string, Count> out;
    for (const auto& c : candidates) out[c] = idx.soc_count(subject, c);
    return out;
}

std::map<std::string, Count> poc_counts(const CorpusIndex& idx, const Template& pattern,
                                        const std::vector<std::string>& candidates) {
    std::map<std::string, Count> out;
    for (const auto& c : candidates) out[c] = idx.poc_count(pattern, c);
    return out;
}

std::vector<std::string> rank_by_count(const std::map<std::string, Count>& counts) {
    std::vector<std::pair<std::string, Count>> items(counts.begin(), counts.end());
    std::stable_sort(items.begin(), items.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
    std::vector<std::string> out;
    out.reserve(items.size());
    for (auto& [name, n] : items) out.push_back(std::move(name));
    return out;
}

} // namespace factcause
