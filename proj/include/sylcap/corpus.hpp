#pragma once

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include <nlohmann/json.hpp>

#include "sylcap/csv.hpp"
#include "sylcap/errors.hpp"
#include "sylcap/unicode.hpp"

namespace sylcap {

enum class Split { train, test };

struct SentencePair {
    std::string id;
    std::string bangla;
    std::string sylheti;
    std::string source_name;
    Split split = Split::test;

    bool operator==(const SentencePair&) const = default;
};

using TokenSequence = std::vector<std::string>;

/// Canonical composition (Bengali block) plus whitespace cleanup: runs of
/// whitespace collapse to single spaces, leading/trailing whitespace is
/// dropped. Throws EncodingError on invalid UTF-8.
inline std::string normalize(std::string_view text) {
    std::u32string s = uni::nfc_bengali(uni::decode_utf8(text));
    std::u32string out;
    out.reserve(s.size());
    bool pending_space = false;
    for (char32_t c : s) {
        if (uni::is_space(c)) {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) {
            out.push_back(U' ');
            pending_space = false;
        }
        out.push_back(c);
    }
    return uni::encode_utf8(out);
}

namespace detail {
inline constexpr bool is_edge_punct(char32_t c) {
    switch (c) {
    case 0x0964: // danda
    case U'?': case U'!': case U',': case U'.': case U';': case U':':
    case U'"': case U'\'': case U'-':
    case 0x201C: case 0x201D: case 0x2018: case 0x2019: // curly quotes
    case 0x00AB: case 0x00BB:                           // guillemets
        return true;
    default:
        return false;
    }
}
} // namespace detail

/// Whitespace split with sentence punctuation stripped from token edges.
/// Tokens emptied by stripping are dropped; the danda is never a token.
inline TokenSequence tokenize(std::string_view text) {
    std::u32string s = uni::decode_utf8(text);
    TokenSequence tokens;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && uni::is_space(s[i])) ++i;
        std::size_t begin = i;
        while (i < s.size() && !uni::is_space(s[i])) ++i;
        if (begin == i) continue;
        std::size_t lo = begin, hi = i;
        while (lo < hi && detail::is_edge_punct(s[lo])) ++lo;
        while (hi > lo && detail::is_edge_punct(s[hi - 1])) --hi;
        if (lo < hi) tokens.push_back(uni::encode_utf8(s.substr(lo, hi - lo)));
    }
    return tokens;
}

enum class CorpusFormat { csv, tsv, jsonl };

inline std::optional<CorpusFormat> detect_format(const std::filesystem::path& path) {
    std::string ext = path.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (ext == ".csv") return CorpusFormat::csv;
    if (ext == ".tsv") return CorpusFormat::tsv;
    if (ext == ".jsonl" || ext == ".ndjson") return CorpusFormat::jsonl;
    return std::nullopt;
}

namespace detail {

inline Split parse_split(const std::string& value, const std::string& where) {
    if (value == "train") return Split::train;
    if (value == "test" || value.empty()) return Split::test;
    throw DataError(where + ": unknown split value \"" + value + "\" (expected train or test)");
}

inline std::vector<SentencePair> load_delimited(const std::filesystem::path& path, char delim) {
    auto rows = csvio::read_file(path, delim);
    if (rows.empty()) throw DataError(path.string() + ": missing header row");
    const auto& header = rows.front().fields;
    auto column = [&](std::string_view name) -> std::optional<std::size_t> {
        for (std::size_t c = 0; c < header.size(); ++c)
            if (header[c] == name) return c;
        return std::nullopt;
    };
    auto bangla_col = column("bangla");
    auto sylheti_col = column("sylheti");
    if (!bangla_col) throw DataError(path.string() + ": missing column \"bangla\"");
    if (!sylheti_col) throw DataError(path.string() + ": missing column \"sylheti\"");
    auto id_col = column("id");
    auto split_col = column("split");

    std::string stem = path.stem().string();
    std::vector<SentencePair> pairs;
    pairs.reserve(rows.size() - 1);
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        const std::string where = path.string() + ":" + std::to_string(row.line);
        std::size_t need = std::max(*bangla_col, *sylheti_col);
        if (id_col) need = std::max(need, *id_col);
        if (split_col) need = std::max(need, *split_col);
        if (row.fields.size() <= need)
            throw DataError(where + ": row has " + std::to_string(row.fields.size()) +
                            " fields, expected at least " + std::to_string(need + 1));
        SentencePair p;
        try {
            p.bangla = normalize(row.fields[*bangla_col]);
            p.sylheti = normalize(row.fields[*sylheti_col]);
        } catch (const EncodingError& e) {
            throw DataError(where + ": " + e.what());
        }
        if (p.bangla.empty()) throw DataError(where + ": empty bangla text");
        if (p.sylheti.empty()) throw DataError(where + ": empty sylheti text");
        p.id = id_col && !row.fields[*id_col].empty() ? row.fields[*id_col]
                                                      : stem + "-" + std::to_string(r);
        p.split = split_col ? parse_split(row.fields[*split_col], where) : Split::test;
        p.source_name = path.filename().string();
        pairs.push_back(std::move(p));
    }
    return pairs;
}

inline std::vector<SentencePair> load_jsonl(const std::filesystem::path& path) {
    std::string text = csvio::read_text_file(path);
    std::vector<SentencePair> pairs;
    std::string stem = path.stem().string();
    std::size_t line_no = 0;
    std::size_t data_row = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t end = text.find('\n', pos);
        std::string_view line(text.data() + pos,
                              (end == std::string::npos ? text.size() : end) - pos);
        pos = end == std::string::npos ? text.size() + 1 : end + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.empty()) continue;
        const std::string where = path.string() + ":" + std::to_string(line_no);
        nlohmann::json obj;
        try {
            obj = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw DataError(where + ": " + e.what());
        }
        if (!obj.is_object()) throw DataError(where + ": expected a JSON object");
        if (!obj.contains("bangla")) throw DataError(where + ": missing key \"bangla\"");
        if (!obj.contains("sylheti")) throw DataError(where + ": missing key \"sylheti\"");
        ++data_row;
        SentencePair p;
        try {
            p.bangla = normalize(obj.at("bangla").get<std::string>());
            p.sylheti = normalize(obj.at("sylheti").get<std::string>());
        } catch (const nlohmann::json::exception& e) {
            throw DataError(where + ": " + e.what());
        }
        if (p.bangla.empty()) throw DataError(where + ": empty bangla text");
        if (p.sylheti.empty()) throw DataError(where + ": empty sylheti text");
        p.id = obj.contains("id") && obj.at("id").is_string() && !obj.at("id").get<std::string>().empty()
                   ? obj.at("id").get<std::string>()
                   : stem + "-" + std::to_string(data_row);
        p.split = obj.contains("split") ? parse_split(obj.at("split").get<std::string>(), where)
                                        : Split::test;
        p.source_name = path.filename().string();
        pairs.push_back(std::move(p));
    }
    return pairs;
}

} // namespace detail

/// Loads a parallel corpus. Every data row yields exactly one pair (or the
/// whole load fails); both sides are normalized; ids must be unique.
inline std::vector<SentencePair> load_corpus(const std::filesystem::path& path, CorpusFormat format) {
    std::vector<SentencePair> pairs;
    switch (format) {
    case CorpusFormat::csv: pairs = detail::load_delimited(path, ','); break;
    case CorpusFormat::tsv: pairs = detail::load_delimited(path, '\t'); break;
    case CorpusFormat::jsonl: pairs = detail::load_jsonl(path); break;
    }
    std::unordered_set<std::string> seen;
    for (const auto& p : pairs)
        if (!seen.insert(p.id).second)
            throw DataError(path.string() + ": duplicate pair id \"" + p.id + "\"");
    return pairs;
}

inline std::vector<SentencePair> load_corpus(const std::filesystem::path& path) {
    auto format = detect_format(path);
    if (!format)
        throw DataError(path.string() + ": cannot infer corpus format from extension "
                        "(expected .csv, .tsv, or .jsonl)");
    return load_corpus(path, *format);
}

} // namespace sylcap
