#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace factcause::text {

std::string_view trim(std::string_view s);

/// Trims and collapses every whitespace run to a single space.
std::string normalize_whitespace(std::string_view s);

bool is_valid_utf8(std::string_view s);

/// Word bytes are ASCII alphanumerics, '_' and every non-ASCII byte, so a
/// multi-byte UTF-8 letter never splits a word.
inline bool is_word_byte(unsigned char c) {
    return c >= 0x80 || (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
           c == '_';
}

/// Maximal runs of word bytes, in order of appearance.
std::vector<std::string_view> word_tokens(std::string_view s);

/// True if `needle` occurs in `hay` without extending a word on either side.
bool contains_at_word_boundary(std::string_view hay, std::string_view needle);

std::vector<std::string> split(std::string_view s, char delim);

/// 64-bit FNV-1a, stable across platforms; used for content keys, not security.
std::uint64_t fnv1a(std::string_view data, std::uint64_t seed = 0xcbf29ce484222325ULL);

std::string hex64(std::uint64_t v);

/// Ordering that compares embedded digit runs numerically ("ckpt2" < "ckpt10").
bool natural_less(std::string_view a, std::string_view b);

} // namespace factcause::text
