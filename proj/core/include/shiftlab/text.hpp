#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace shiftlab::text {

// Bytes >= 0x80 are treated as word characters so UTF-8 sequences are never
// split. Only ASCII letters are case-folded, which keeps byte offsets stable.

inline bool is_word_byte(unsigned char c) {
    return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c >= 0x80;
}

inline char fold(char c) {
    return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
}

std::string case_fold(std::string_view s);

/// Byte offsets of every occurrence of `needle` in `haystack` (case-folded)
/// that starts and ends on a word boundary. Occurrences do not overlap.
std::vector<std::size_t> find_word_occurrences(std::string_view haystack, std::string_view needle);

bool contains_word_sequence(std::string_view haystack, std::string_view needle);

/// Number of Unicode code points, counting every non-continuation byte.
std::size_t codepoint_length(std::string_view s);

/// Byte offset of the code point at index `cp`; `cp == codepoint_length(s)`
/// maps to s.size(). Returns nullopt when out of range.
std::optional<std::size_t> byte_offset(std::string_view s, std::size_t cp);

std::size_t codepoint_index(std::string_view s, std::size_t byte);

bool is_blank(std::string_view s);

} // namespace shiftlab::text
