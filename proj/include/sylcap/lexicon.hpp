#pragma once

#include <algorithm>
#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sylcap/corpus.hpp"
#include "sylcap/csv.hpp"
#include "sylcap/errors.hpp"

namespace sylcap {

enum class Direction { bangla_to_sylheti, sylheti_to_bangla };

inline constexpr std::string_view to_string(Direction d) {
    return d == Direction::bangla_to_sylheti ? "bangla_to_sylheti" : "sylheti_to_bangla";
}

inline Direction direction_from_string(std::string_view s) {
    if (s == "bangla_to_sylheti" || s == "b2s") return Direction::bangla_to_sylheti;
    if (s == "sylheti_to_bangla" || s == "s2b") return Direction::sylheti_to_bangla;
    throw DataError("unknown direction \"" + std::string(s) + "\"");
}

inline constexpr std::string_view source_language(Direction d) {
    return d == Direction::bangla_to_sylheti ? "Bangla" : "Sylheti";
}

inline constexpr std::string_view target_language(Direction d) {
    return d == Direction::bangla_to_sylheti ? "Sylheti" : "Bangla";
}

enum class EntryKind { core, idiom };

struct LexiconEntry {
    std::string source;
    std::string target;
    EntryKind kind = EntryKind::core;
    long frequency = 1;

    bool operator==(const LexiconEntry&) const = default;
};

/// One entry per source; core entries are single tokens, idiom entries may be
/// multi-token phrases on either side. Immutable after construction.
struct Lexicon {
    Direction direction = Direction::bangla_to_sylheti;
    std::map<std::string, LexiconEntry> entries;

    bool operator==(const Lexicon&) const = default;
};

/// Positional alignment over equal-token-count pairs: each differing aligned
/// token pair is counted, and each source maps to its most frequent differing
/// target (ties broken toward the lexicographically smallest target).
inline Lexicon extract_dictionary(const std::vector<SentencePair>& pairs, Direction direction) {
    std::map<std::string, std::map<std::string, long>> counts;
    for (const auto& pair : pairs) {
        TokenSequence bangla = tokenize(pair.bangla);
        TokenSequence sylheti = tokenize(pair.sylheti);
        if (bangla.size() != sylheti.size()) continue;
        const TokenSequence& src = direction == Direction::bangla_to_sylheti ? bangla : sylheti;
        const TokenSequence& tgt = direction == Direction::bangla_to_sylheti ? sylheti : bangla;
        for (std::size_t i = 0; i < src.size(); ++i)
            if (src[i] != tgt[i]) ++counts[src[i]][tgt[i]];
    }
    Lexicon lex;
    lex.direction = direction;
    for (const auto& [source, targets] : counts) {
        const std::string* best_target = nullptr;
        long best_count = 0;
        for (const auto& [target, count] : targets) {
            // std::map iterates targets in ascending order, so on a tie the
            // first (lexicographically smallest) target stands.
            if (count > best_count) {
                best_count = count;
                best_target = &target;
            }
        }
        lex.entries.emplace(source, LexiconEntry{source, *best_target, EntryKind::core, best_count});
    }
    return lex;
}

/// Dictionary CSV layout: header `bangla,sylheti[,kind][,frequency]`. The
/// direction chooses which column is the lookup side.
inline Lexicon load_dictionary(const std::filesystem::path& path,
                               Direction direction = Direction::bangla_to_sylheti) {
    auto rows = csvio::read_file(path, ',');
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
    auto kind_col = column("kind");
    auto freq_col = column("frequency");

    Lexicon lex;
    lex.direction = direction;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        const std::string where = path.string() + ":" + std::to_string(row.line);
        if (row.fields.size() <= std::max(*bangla_col, *sylheti_col))
            throw DataError(where + ": row has too few fields");
        std::string bangla, sylheti;
        try {
            bangla = normalize(row.fields[*bangla_col]);
            sylheti = normalize(row.fields[*sylheti_col]);
        } catch (const EncodingError& e) {
            throw DataError(where + ": " + e.what());
        }
        if (bangla.empty() || sylheti.empty())
            throw DataError(where + ": empty dictionary cell");
        LexiconEntry entry;
        entry.source = direction == Direction::bangla_to_sylheti ? bangla : sylheti;
        entry.target = direction == Direction::bangla_to_sylheti ? sylheti : bangla;
        entry.kind = EntryKind::core;
        if (kind_col && row.fields.size() > *kind_col && !row.fields[*kind_col].empty()) {
            const std::string& kind = row.fields[*kind_col];
            if (kind == "idiom") entry.kind = EntryKind::idiom;
            else if (kind != "core")
                throw DataError(where + ": unknown kind \"" + kind + "\" (expected core or idiom)");
        }
        if (entry.kind == EntryKind::core) {
            if (entry.source == entry.target)
                throw DataError(where + ": core entry maps \"" + entry.source + "\" to itself");
            if (entry.source.find(' ') != std::string::npos ||
                entry.target.find(' ') != std::string::npos)
                throw DataError(where + ": core entry contains spaces; mark it kind=idiom");
        }
        if (freq_col && row.fields.size() > *freq_col && !row.fields[*freq_col].empty()) {
            try {
                entry.frequency = std::stol(row.fields[*freq_col]);
            } catch (const std::exception&) {
                throw DataError(where + ": bad frequency \"" + row.fields[*freq_col] + "\"");
            }
            if (entry.frequency < 0) throw DataError(where + ": negative frequency");
        }
        if (!lex.entries.emplace(entry.source, entry).second)
            throw DataError(where + ": duplicate source \"" + entry.source + "\"");
    }
    return lex;
}

inline void save_dictionary(const Lexicon& lex, const std::filesystem::path& path) {
    std::string out = "bangla,sylheti,kind,frequency\n";
    for (const auto& [source, entry] : lex.entries) {
        const std::string& bangla =
            lex.direction == Direction::bangla_to_sylheti ? entry.source : entry.target;
        const std::string& sylheti =
            lex.direction == Direction::bangla_to_sylheti ? entry.target : entry.source;
        out += csvio::escape(bangla, ',');
        out.push_back(',');
        out += csvio::escape(sylheti, ',');
        out.push_back(',');
        out += entry.kind == EntryKind::idiom ? "idiom" : "core";
        out.push_back(',');
        out += std::to_string(entry.frequency);
        out.push_back('\n');
    }
    csvio::write_text_file(path, out);
}

/// Core entries only; idiom sources and absent words return nothing.
inline std::optional<std::string> lookup(const Lexicon& lex, std::string_view word) {
    if (word.empty()) return std::nullopt;
    auto it = lex.entries.find(std::string(word));
    if (it == lex.entries.end() || it->second.kind != EntryKind::core) return std::nullopt;
    return it->second.target;
}

struct IdiomMatch {
    std::size_t begin = 0; // token index, inclusive
    std::size_t end = 0;   // token index, exclusive
    std::string target;

    bool operator==(const IdiomMatch&) const = default;
};

/// Left-to-right, longest-match-first idiom spans; spans never overlap.
inline std::vector<IdiomMatch> match_idioms(const Lexicon& lex, const TokenSequence& tokens) {
    std::vector<std::pair<TokenSequence, const LexiconEntry*>> idioms;
    std::size_t longest = 0;
    for (const auto& [source, entry] : lex.entries) {
        if (entry.kind != EntryKind::idiom) continue;
        TokenSequence words = tokenize(source);
        if (words.empty()) continue;
        longest = std::max(longest, words.size());
        idioms.emplace_back(std::move(words), &entry);
    }
    std::vector<IdiomMatch> matches;
    if (idioms.empty()) return matches;
    std::size_t i = 0;
    while (i < tokens.size()) {
        std::size_t max_len = std::min(longest, tokens.size() - i);
        bool matched = false;
        for (std::size_t len = max_len; len >= 1 && !matched; --len) {
            for (const auto& [words, entry] : idioms) {
                if (words.size() != len) continue;
                if (std::equal(words.begin(), words.end(), tokens.begin() + static_cast<std::ptrdiff_t>(i))) {
                    matches.push_back({i, i + len, entry->target});
                    i += len;
                    matched = true;
                    break;
                }
            }
        }
        if (!matched) ++i;
    }
    return matches;
}

/// Swaps source and target sides. Collisions (two sources sharing a target)
/// resolve toward the higher frequency, then the smaller source string.
inline Lexicon invert(const Lexicon& lex) {
    Lexicon out;
    out.direction = lex.direction == Direction::bangla_to_sylheti
                        ? Direction::sylheti_to_bangla
                        : Direction::bangla_to_sylheti;
    for (const auto& [source, entry] : lex.entries) {
        if (entry.kind == EntryKind::core && entry.target.find(' ') != std::string::npos)
            continue; // a multi-token target cannot become a core source
        LexiconEntry flipped{entry.target, entry.source, entry.kind, entry.frequency};
        auto [it, inserted] = out.entries.emplace(flipped.source, flipped);
        if (!inserted) {
            LexiconEntry& kept = it->second;
            if (flipped.frequency > kept.frequency ||
                (flipped.frequency == kept.frequency && flipped.target < kept.target))
                kept = flipped;
        }
    }
    return out;
}

} // namespace sylcap
