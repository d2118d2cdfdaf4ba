#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace chatdrift::uni {

// Minimal UTF-8 + case-folding support, locale independent. Coverage is
// deliberately pragmatic: ASCII, Latin-1 Supplement, Latin Extended-A (enough
// for Slovene and its neighbours), plus coarse Greek/Cyrillic ranges. Code
// points outside those ranges are treated as non-word and fold to themselves.

inline constexpr char32_t replacement = 0xFFFD;

// Decodes the code point starting at s[i] and advances i. Malformed bytes
// yield U+FFFD and advance by one so decoding always terminates.
inline char32_t decode(std::string_view s, std::size_t& i) {
    const auto b0 = static_cast<unsigned char>(s[i]);
    if (b0 < 0x80) {
        ++i;
        return b0;
    }
    int len = 0;
    char32_t cp = 0;
    if ((b0 & 0xE0) == 0xC0) {
        len = 2;
        cp = b0 & 0x1F;
    } else if ((b0 & 0xF0) == 0xE0) {
        len = 3;
        cp = b0 & 0x0F;
    } else if ((b0 & 0xF8) == 0xF0) {
        len = 4;
        cp = b0 & 0x07;
    } else {
        ++i;
        return replacement;
    }
    if (i + static_cast<std::size_t>(len) > s.size()) {
        ++i;
        return replacement;
    }
    for (int k = 1; k < len; ++k) {
        const auto b = static_cast<unsigned char>(s[i + static_cast<std::size_t>(k)]);
        if ((b & 0xC0) != 0x80) {
            ++i;
            return replacement;
        }
        cp = (cp << 6) | (b & 0x3F);
    }
    // Reject overlong encodings and surrogates.
    if ((len == 2 && cp < 0x80) || (len == 3 && cp < 0x800) || (len == 4 && cp < 0x10000) ||
        (cp >= 0xD800 && cp <= 0xDFFF) || cp > 0x10FFFF) {
        ++i;
        return replacement;
    }
    i += static_cast<std::size_t>(len);
    return cp;
}

inline void encode(char32_t cp, std::string& out) {
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
}

// Word characters for tokenization: letters and ASCII digits.
inline bool is_word(char32_t cp) {
    if ((cp >= '0' && cp <= '9') || (cp >= 'a' && cp <= 'z') || (cp >= 'A' && cp <= 'Z')) return true;
    if (cp >= 0x00C0 && cp <= 0x024F) return cp != 0x00D7 && cp != 0x00F7; // Latin-1 Sup + Ext-A/B letters
    if (cp >= 0x0370 && cp <= 0x03FF) return cp != 0x037E;                 // Greek, minus the question mark
    if (cp >= 0x0400 && cp <= 0x04FF) return true;                         // Cyrillic
    return false;
}

inline bool is_space(char32_t cp) {
    switch (cp) {
        case ' ': case '\t': case '\n': case '\r': case '\v': case '\f':
        case 0x00A0: case 0x2028: case 0x2029: case 0x3000:
            return true;
        default:
            return cp >= 0x2000 && cp <= 0x200A;
    }
}

// Simple (one-to-one) lowercase fold over the ranges is_word covers.
inline char32_t fold(char32_t cp) {
    if (cp >= 'A' && cp <= 'Z') return cp + 0x20;
    if (cp >= 0x00C0 && cp <= 0x00DE && cp != 0x00D7) return cp + 0x20;
    if (cp == 0x0178) return 0x00FF; // Y with diaeresis
    if (cp == 0x017F) return 0x0073; // long s -> s
    // Latin Extended-A pairs alternate upper/lower.
    if ((cp >= 0x0100 && cp <= 0x0137) || (cp >= 0x014A && cp <= 0x0177)) {
        return (cp % 2 == 0) ? cp + 1 : cp;
    }
    if ((cp >= 0x0139 && cp <= 0x0148) || (cp >= 0x0179 && cp <= 0x017E)) {
        return (cp % 2 == 1) ? cp + 1 : cp;
    }
    if (cp >= 0x0391 && cp <= 0x03AB && cp != 0x03A2) return cp + 0x20; // Greek capitals
    if (cp >= 0x0410 && cp <= 0x042F) return cp + 0x20;                 // Cyrillic capitals
    if (cp >= 0x0400 && cp <= 0x040F) return cp + 0x50;
    return cp;
}

// Number of code points in a valid-or-salvaged UTF-8 string.
inline std::size_t length(std::string_view s) {
    std::size_t i = 0, n = 0;
    while (i < s.size()) {
        decode(s, i);
        ++n;
    }
    return n;
}

inline std::vector<char32_t> decode_all(std::string_view s) {
    std::vector<char32_t> cps;
    cps.reserve(s.size());
    std::size_t i = 0;
    while (i < s.size()) cps.push_back(decode(s, i));
    return cps;
}

} // namespace chatdrift::uni
