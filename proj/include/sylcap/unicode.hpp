#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>

#include "sylcap/errors.hpp"

// Minimal Unicode support: strict UTF-8 codecs plus canonical composition
// (NFC) for the Bengali block. Texts in other scripts pass through unchanged,
// which keeps the dependency surface at zero; the toolkit only ever compares
// Bengali-script strings for equality.

namespace sylcap::uni {

inline constexpr bool is_space(char32_t c) {
    switch (c) {
    case U'\t': case U'\n': case U'\v': case U'\f': case U'\r': case U' ':
    case 0x0085: case 0x00A0: case 0x1680:
    case 0x2028: case 0x2029: case 0x202F: case 0x205F: case 0x3000:
        return true;
    default:
        return c >= 0x2000 && c <= 0x200A;
    }
}

inline std::u32string decode_utf8(std::string_view s) {
    std::u32string out;
    out.reserve(s.size());
    std::size_t i = 0;
    auto fail = [&](const char* why) -> char32_t {
        throw EncodingError("invalid UTF-8 at byte offset " + std::to_string(i) + ": " + why);
    };
    while (i < s.size()) {
        unsigned char b0 = static_cast<unsigned char>(s[i]);
        char32_t cp;
        int len;
        if (b0 < 0x80) {
            cp = b0;
            len = 1;
        } else if ((b0 & 0xE0) == 0xC0) {
            cp = b0 & 0x1F;
            len = 2;
        } else if ((b0 & 0xF0) == 0xE0) {
            cp = b0 & 0x0F;
            len = 3;
        } else if ((b0 & 0xF8) == 0xF0) {
            cp = b0 & 0x07;
            len = 4;
        } else {
            cp = fail("bad leading byte");
            len = 1;
        }
        if (i + static_cast<std::size_t>(len) > s.size()) cp = fail("truncated sequence");
        for (int k = 1; k < len; ++k) {
            unsigned char b = static_cast<unsigned char>(s[i + static_cast<std::size_t>(k)]);
            if ((b & 0xC0) != 0x80) cp = fail("bad continuation byte");
            cp = (cp << 6) | (b & 0x3F);
        }
        static constexpr char32_t kMin[5] = {0, 0, 0x80, 0x800, 0x10000};
        if (len > 1 && cp < kMin[len]) cp = fail("overlong encoding");
        if (cp >= 0xD800 && cp <= 0xDFFF) cp = fail("surrogate code point");
        if (cp > 0x10FFFF) cp = fail("code point out of range");
        out.push_back(cp);
        i += static_cast<std::size_t>(len);
    }
    return out;
}

inline void append_utf8(std::string& out, char32_t c) {
    if (c < 0x80) {
        out.push_back(static_cast<char>(c));
    } else if (c < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (c >> 6)));
        out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
    } else if (c < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (c >> 12)));
        out.push_back(static_cast<char>(0x80 | ((c >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xF0 | (c >> 18)));
        out.push_back(static_cast<char>(0x80 | ((c >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((c >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
    }
}

inline std::string encode_utf8(const std::u32string& s) {
    std::string out;
    out.reserve(s.size() * 3);
    for (char32_t c : s) append_utf8(out, c);
    return out;
}

// Canonical combining classes for the Bengali block; everything else is 0.
inline constexpr int combining_class(char32_t c) {
    switch (c) {
    case 0x09BC: return 7;   // nukta
    case 0x09CD: return 9;   // virama
    case 0x09FE: return 230; // sandhi mark
    default: return 0;
    }
}

// Canonical decompositions within the Bengali block. U+09DC/DD/DF are
// composition-excluded, so NFC leaves them decomposed.
inline constexpr bool bengali_decompose(char32_t c, char32_t& a, char32_t& b) {
    switch (c) {
    case 0x09CB: a = 0x09C7; b = 0x09BE; return true; // O
    case 0x09CC: a = 0x09C7; b = 0x09D7; return true; // AU
    case 0x09DC: a = 0x09A1; b = 0x09BC; return true; // RRA (excluded)
    case 0x09DD: a = 0x09A2; b = 0x09BC; return true; // RHA (excluded)
    case 0x09DF: a = 0x09AF; b = 0x09BC; return true; // YYA (excluded)
    default: return false;
    }
}

inline constexpr char32_t bengali_compose(char32_t a, char32_t b) {
    if (a == 0x09C7 && b == 0x09BE) return 0x09CB;
    if (a == 0x09C7 && b == 0x09D7) return 0x09CC;
    return 0;
}

/// NFC restricted to the Bengali block: decompose, reorder combining marks
/// canonically, recompose the two non-excluded vowel-sign pairs.
inline std::u32string nfc_bengali(const std::u32string& in) {
    std::u32string s;
    s.reserve(in.size());
    for (char32_t c : in) {
        char32_t a, b;
        if (bengali_decompose(c, a, b)) {
            s.push_back(a);
            s.push_back(b);
        } else {
            s.push_back(c);
        }
    }
    // Canonical ordering: bubble adjacent marks with descending nonzero classes.
    for (std::size_t i = 1; i < s.size(); ++i) {
        int cc = combining_class(s[i]);
        if (cc == 0) continue;
        std::size_t j = i;
        while (j > 0) {
            int prev = combining_class(s[j - 1]);
            if (prev <= cc) break;
            std::swap(s[j - 1], s[j]);
            --j;
        }
    }
    // Recomposition: both composing second characters have combining class 0,
    // so any intervening character blocks them; only adjacent pairs compose.
    std::u32string out;
    out.reserve(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (!out.empty() && combining_class(s[i]) == 0) {
            if (char32_t comp = bengali_compose(out.back(), s[i]); comp != 0) {
                out.back() = comp;
                continue;
            }
        }
        out.push_back(s[i]);
    }
    return out;
}

} // namespace sylcap::uni
