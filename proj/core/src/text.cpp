#include "shiftlab/text.hpp"

namespace shiftlab::text {

std::string case_fold(std::string_view s) {
    std::string out(s);
    for (char& c : out) {
        c = fold(c);
    }
    return out;
}

std::vector<std::size_t> find_word_occurrences(std::string_view haystack, std::string_view needle) {
    std::vector<std::size_t> hits;
    if (needle.empty() || needle.size() > haystack.size()) {
        return hits;
    }
    const std::string hay = case_fold(haystack);
    const std::string pat = case_fold(needle);
    const auto word_at = [&](std::size_t i) { return is_word_byte(static_cast<unsigned char>(hay[i])); };
    const bool pat_starts_word = is_word_byte(static_cast<unsigned char>(pat.front()));
    const bool pat_ends_word = is_word_byte(static_cast<unsigned char>(pat.back()));

    std::size_t pos = hay.find(pat);
    while (pos != std::string::npos) {
        const std::size_t end = pos + pat.size();
        const bool left_ok = pos == 0 || !pat_starts_word || !word_at(pos - 1);
        const bool right_ok = end == hay.size() || !pat_ends_word || !word_at(end);
        if (left_ok && right_ok) {
            hits.push_back(pos);
            pos = hay.find(pat, end);
        } else {
            pos = hay.find(pat, pos + 1);
        }
    }
    return hits;
}

bool contains_word_sequence(std::string_view haystack, std::string_view needle) {
    return !find_word_occurrences(haystack, needle).empty();
}

std::size_t codepoint_length(std::string_view s) {
    std::size_t n = 0;
    for (unsigned char c : s) {
        if ((c & 0xC0) != 0x80) {
            ++n;
        }
    }
    return n;
}

std::optional<std::size_t> byte_offset(std::string_view s, std::size_t cp) {
    std::size_t seen = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if ((static_cast<unsigned char>(s[i]) & 0xC0) != 0x80) {
            if (seen == cp) {
                return i;
            }
            ++seen;
        }
    }
    if (seen == cp) {
        return s.size();
    }
    return std::nullopt;
}

std::size_t codepoint_index(std::string_view s, std::size_t byte) {
    return codepoint_length(s.substr(0, byte));
}

bool is_blank(std::string_view s) {
    for (char c : s) {
        if (c != ' ' && c != '\t' && c != '\r' && c != '\n') {
            return false;
        }
    }
    return true;
}

} // namespace shiftlab::text
