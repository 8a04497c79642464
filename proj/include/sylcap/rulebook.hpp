#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sylcap/csv.hpp"
#include "sylcap/errors.hpp"
#include "sylcap/lexicon.hpp"

namespace sylcap {

enum class RuleCategory {
    pronoun,
    possessive,
    copula,
    verb_tense,
    negation,
    imperative,
    interrogative,
    classifier,
    passive,
    phonological,
};

inline constexpr std::array<std::string_view, 10> kRuleCategoryNames = {
    "pronoun",   "possessive",    "copula",     "verb_tense", "negation",
    "imperative", "interrogative", "classifier", "passive",    "phonological",
};

inline constexpr std::string_view to_string(RuleCategory c) {
    return kRuleCategoryNames[static_cast<std::size_t>(c)];
}

inline RuleCategory rule_category_from_string(std::string_view s) {
    for (std::size_t i = 0; i < kRuleCategoryNames.size(); ++i)
        if (kRuleCategoryNames[i] == s) return static_cast<RuleCategory>(i);
    throw DataError("unknown rule category \"" + std::string(s) + "\"");
}

/// match is an exact token, a token suffix when prefixed with '*', or (for
/// phonological rules only) an in-token character substring. replacement may
/// list alternatives separated by '/'; the transducer uses the first one and
/// prompt rendering shows the field verbatim. display overrides the rendered
/// form of the rule in prompts: empty means the automatic "match → replacement"
/// arrow form, "-" hides the rule from prompts.
struct Rule {
    RuleCategory category = RuleCategory::pronoun;
    std::string match;
    std::string replacement;
    int priority = 1;
    std::string display;

    bool operator==(const Rule&) const = default;
};

struct Rulebook {
    std::vector<Rule> rules;
    std::string name;
    std::string version;

    bool operator==(const Rulebook&) const = default;
};

/// First '/'-separated alternative of a replacement, whitespace-trimmed.
inline std::string first_alternative(std::string_view replacement) {
    std::size_t slash = replacement.find('/');
    std::string_view head = slash == std::string_view::npos ? replacement : replacement.substr(0, slash);
    std::size_t b = head.find_first_not_of(" \t");
    std::size_t e = head.find_last_not_of(" \t");
    if (b == std::string_view::npos) return "";
    return std::string(head.substr(b, e - b + 1));
}

inline std::string display_string(const Rule& rule) {
    if (!rule.display.empty()) return rule.display;
    return rule.match + " → " + rule.replacement;
}

inline void validate(const Rulebook& rb) {
    for (const auto& rule : rb.rules)
        if (rule.match.empty())
            throw DataError("rulebook \"" + rb.name + "\": rule with empty match pattern");
    for (std::size_t i = 0; i < rb.rules.size(); ++i)
        for (std::size_t j = i + 1; j < rb.rules.size(); ++j)
            if (rb.rules[i].category == rb.rules[j].category &&
                rb.rules[i].priority == rb.rules[j].priority)
                throw DataError("rulebook \"" + rb.name + "\": duplicate priority " +
                                std::to_string(rb.rules[i].priority) + " in category " +
                                std::string(to_string(rb.rules[i].category)));
}

inline std::vector<const Rule*> rules_in_category(const Rulebook& rb, RuleCategory category) {
    std::vector<const Rule*> out;
    for (const auto& rule : rb.rules)
        if (rule.category == category) out.push_back(&rule);
    std::sort(out.begin(), out.end(),
              [](const Rule* a, const Rule* b) { return a->priority < b->priority; });
    return out;
}

/// Inverts an exact-token rule for reverse-direction prompts. Suffix and
/// phonological patterns are not invertible and yield nothing.
inline std::optional<Rule> invert_exact_rule(const Rule& rule) {
    if (rule.category == RuleCategory::phonological) return std::nullopt;
    if (rule.match.starts_with('*')) return std::nullopt;
    std::string inverted_match = first_alternative(rule.replacement);
    if (inverted_match.empty()) return std::nullopt;
    Rule out;
    out.category = rule.category;
    out.match = inverted_match;
    out.replacement = rule.match;
    out.priority = rule.priority;
    return out;
}

inline Rulebook default_rulebook() {
    using C = RuleCategory;
    Rulebook rb;
    rb.name = "sylheti-cap-default";
    rb.version = "1.0";
    rb.rules = {
        {C::pronoun, "আমি", "মুই", 1, ""},
        {C::pronoun, "তুমি", "তুমি/তুই", 2, ""},
        {C::pronoun, "আপনি", "আফনে", 3, ""},
        {C::pronoun, "আমরা", "আমরার", 4, ""},
        {C::pronoun, "তারা", "তারার", 5, ""},
        {C::pronoun, "সে", "হে/তাই", 6, ""},
        {C::possessive, "আমার", "মোর", 1, ""},
        {C::possessive, "তোমার", "তুমার", 2, ""},
        {C::possessive, "আমাদের", "আমরার", 3, ""},
        {C::possessive, "আপনাদের", "আফনারার", 4, ""},
        {C::interrogative, "কী", "কিতা", 1, ""},
        {C::interrogative, "কোথায়", "কুনান/কুনানো", 2, ""},
        {C::interrogative, "কেমন", "কিনা", 3, ""},
        {C::interrogative, "কেন", "কিয়েন", 4, ""},
        {C::interrogative, "কত", "কিত্তা", 5, ""},
        {C::phonological, "খ", "ক", 1, ""},
        {C::phonological, "ঘুম", "গুম", 2, ""},
        {C::verb_tense, "করি", "খরি", 1, "আমি করি → মুই খরি"},
        {C::verb_tense, "করো", "খরো", 2, "তুমি করো → তুমি খরো"},
        {C::verb_tense, "করে", "খরে", 3, "সে করে → হে খরে"},
        {C::verb_tense, "করেছিলাম", "খরসিলাম", 4, ""},
        {C::verb_tense, "করবো", "খরমু", 5, ""},
        {C::negation, "না", "নি / নায়", 1, ""},
        {C::copula, "আছে", "রইছে", 1, "আছে / আছি / আছো → রইছে / আছি / আসো"},
        {C::copula, "আছি", "আছি", 2, "-"},
        {C::copula, "আছো", "আসো", 3, "-"},
        {C::imperative, "খাও", "খা / খাইওকা", 1, "খাও → খা / খাইওকা (polite)"},
        {C::imperative, "বসো", "বইবা", 2, ""},
        {C::imperative, "যাও", "যা", 3, ""},
        {C::passive, "ভেঙেছে", "বাঙ্গা অইসে", 1,
         "জানালা ছেলেটা ভেঙেছে → জানালা ফুয়া ডি বাঙ্গা অইসে"},
        {C::classifier, "একটা", "এখটা", 1, ""},
        {C::classifier, "পাঁচটা", "ফাসটা", 2, ""},
    };
    return rb;
}

/// Rulebook file: tab-separated `category match replacement priority [display]`
/// records, '#' comment lines, plus optional `#name:` / `#version:` directives.
inline Rulebook load_rulebook(const std::filesystem::path& path) {
    std::string text = csvio::read_text_file(path);
    Rulebook rb;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t end = text.find('\n', pos);
        std::string_view line(text.data() + pos,
                              (end == std::string::npos ? text.size() : end) - pos);
        pos = end == std::string::npos ? text.size() : end + 1;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.starts_with("#name:")) {
            rb.name = std::string(line.substr(6));
            rb.name.erase(0, rb.name.find_first_not_of(' '));
        } else if (line.starts_with("#version:")) {
            rb.version = std::string(line.substr(9));
            rb.version.erase(0, rb.version.find_first_not_of(' '));
        }
    }
    auto rows = csvio::parse(text, '\t');
    for (const auto& row : rows) {
        const std::string where = path.string() + ":" + std::to_string(row.line);
        if (row.fields.size() < 4 || row.fields.size() > 5)
            throw DataError(where + ": expected 4 or 5 tab-separated fields, got " +
                            std::to_string(row.fields.size()));
        Rule rule;
        try {
            rule.category = rule_category_from_string(row.fields[0]);
        } catch (const DataError& e) {
            throw DataError(where + ": " + e.what());
        }
        try {
            rule.match = normalize(row.fields[1]);
            rule.replacement = normalize(row.fields[2]);
        } catch (const EncodingError& e) {
            throw DataError(where + ": " + e.what());
        }
        try {
            rule.priority = std::stoi(row.fields[3]);
        } catch (const std::exception&) {
            throw DataError(where + ": bad priority \"" + row.fields[3] + "\"");
        }
        if (row.fields.size() == 5) rule.display = row.fields[4];
        if (rule.match.empty()) throw DataError(where + ": empty match pattern");
        rb.rules.push_back(std::move(rule));
    }
    validate(rb);
    return rb;
}

inline void save_rulebook(const Rulebook& rb, const std::filesystem::path& path) {
    std::string out;
    out += "#name: " + rb.name + "\n";
    out += "#version: " + rb.version + "\n";
    out += "# category\tmatch\treplacement\tpriority\tdisplay\n";
    for (const auto& rule : rb.rules) {
        out += std::string(to_string(rule.category));
        out.push_back('\t');
        out += rule.match;
        out.push_back('\t');
        out += rule.replacement;
        out.push_back('\t');
        out += std::to_string(rule.priority);
        out.push_back('\t');
        out += rule.display;
        out.push_back('\n');
    }
    csvio::write_text_file(path, out);
}

namespace detail {

struct TokenParts {
    std::string prefix; // leading edge punctuation
    std::string core;
    std::string suffix; // trailing edge punctuation
};

inline TokenParts split_edges(const std::string& token) {
    std::u32string s = uni::decode_utf8(token);
    std::size_t lo = 0, hi = s.size();
    while (lo < hi && is_edge_punct(s[lo])) ++lo;
    while (hi > lo && is_edge_punct(s[hi - 1])) --hi;
    return {uni::encode_utf8(s.substr(0, lo)), uni::encode_utf8(s.substr(lo, hi - lo)),
            uni::encode_utf8(s.substr(hi))};
}

inline bool suffix_matches(const std::string& core, std::string_view suffix) {
    return core.size() > suffix.size() && core.ends_with(suffix);
}

inline std::string replace_all(std::string text, std::string_view from, std::string_view to) {
    std::size_t pos = 0;
    while ((pos = text.find(from, pos)) != std::string::npos) {
        text.replace(pos, from.size(), to);
        pos += to.size();
    }
    return text;
}

} // namespace detail

/// Deterministic Bangla→Sylheti transducer. Stages, first match wins per
/// token: idiom spans, core lexicon lookup, category rules in priority order,
/// then phonological substring rules on tokens no earlier stage touched.
/// Token-edge punctuation is preserved around rewritten cores.
inline std::string apply(const Rulebook& rb, const Lexicon& lex, std::string_view sentence) {
    std::string text = normalize(sentence);
    if (text.empty()) return text;

    // Whitespace units with their punctuation edges detached.
    std::vector<detail::TokenParts> units;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t space = text.find(' ', pos);
        std::string token = text.substr(pos, space == std::string::npos ? std::string::npos
                                                                        : space - pos);
        units.push_back(detail::split_edges(token));
        if (space == std::string::npos) break;
        pos = space + 1;
    }

    std::vector<bool> touched(units.size(), false);
    std::vector<bool> consumed(units.size(), false);

    // Stage 1: idioms, longest match first over core tokens.
    TokenSequence cores;
    cores.reserve(units.size());
    for (const auto& u : units) cores.push_back(u.core);
    for (const auto& match : match_idioms(lex, cores)) {
        units[match.begin].core = match.target;
        units[match.begin].suffix = units[match.end - 1].suffix;
        touched[match.begin] = true;
        for (std::size_t k = match.begin + 1; k < match.end; ++k) consumed[k] = true;
    }

    // Stage 2: core lexicon.
    for (std::size_t i = 0; i < units.size(); ++i) {
        if (touched[i] || consumed[i] || units[i].core.empty()) continue;
        if (auto target = lookup(lex, units[i].core)) {
            units[i].core = *target;
            touched[i] = true;
        }
    }

    // Stage 3: category rules ordered by (priority, category, match).
    std::vector<const Rule*> category_rules;
    for (const auto& rule : rb.rules)
        if (rule.category != RuleCategory::phonological) category_rules.push_back(&rule);
    std::sort(category_rules.begin(), category_rules.end(), [](const Rule* a, const Rule* b) {
        if (a->priority != b->priority) return a->priority < b->priority;
        if (a->category != b->category) return a->category < b->category;
        return a->match < b->match;
    });
    for (std::size_t i = 0; i < units.size(); ++i) {
        if (touched[i] || consumed[i] || units[i].core.empty()) continue;
        for (const Rule* rule : category_rules) {
            if (rule->match.starts_with('*')) {
                std::string_view suffix = std::string_view(rule->match).substr(1);
                if (!detail::suffix_matches(units[i].core, suffix)) continue;
                units[i].core.replace(units[i].core.size() - suffix.size(), suffix.size(),
                                      first_alternative(rule->replacement));
            } else {
                if (units[i].core != rule->match) continue;
                units[i].core = first_alternative(rule->replacement);
            }
            touched[i] = true;
            break;
        }
    }

    // Stage 4: phonological substring rules on untouched tokens.
    auto phono = rules_in_category(rb, RuleCategory::phonological);
    for (std::size_t i = 0; i < units.size(); ++i) {
        if (touched[i] || consumed[i] || units[i].core.empty()) continue;
        for (const Rule* rule : phono)
            units[i].core = detail::replace_all(std::move(units[i].core), rule->match,
                                                first_alternative(rule->replacement));
    }

    std::string out;
    for (std::size_t i = 0; i < units.size(); ++i) {
        if (consumed[i]) continue;
        std::string piece = units[i].prefix + units[i].core + units[i].suffix;
        if (piece.empty()) continue;
        if (!out.empty()) out.push_back(' ');
        out += piece;
    }
    return out;
}

} // namespace sylcap
