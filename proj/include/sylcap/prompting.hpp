#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <limits>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "sylcap/corpus.hpp"
#include "sylcap/csv.hpp"
#include "sylcap/errors.hpp"
#include "sylcap/lexicon.hpp"
#include "sylcap/quality.hpp"
#include "sylcap/rulebook.hpp"

namespace sylcap::prompting {

enum class Strategy { zero_shot, few_shot, cot, sylheti_cap };

inline constexpr std::array<std::string_view, 4> kStrategyNames = {
    "zero_shot", "few_shot", "cot", "sylheti_cap"};

inline constexpr std::string_view to_string(Strategy s) {
    return kStrategyNames[static_cast<std::size_t>(s)];
}

inline Strategy strategy_from_string(std::string_view s) {
    for (std::size_t i = 0; i < kStrategyNames.size(); ++i)
        if (kStrategyNames[i] == s) return static_cast<Strategy>(i);
    throw DataError("unknown strategy \"" + std::string(s) + "\"");
}

inline constexpr std::array<Strategy, 4> kAllStrategies = {
    Strategy::zero_shot, Strategy::few_shot, Strategy::cot, Strategy::sylheti_cap};

struct Exemplar {
    std::string bangla;
    std::string sylheti;

    bool operator==(const Exemplar&) const = default;
};

struct RenderedPrompt {
    Strategy strategy = Strategy::zero_shot;
    Direction direction = Direction::bangla_to_sylheti;
    std::string text;
    std::string input_sentence; // normalized sentence as substituted
    std::size_t lexicon_excerpt_size = 0; // word mappings listed (context-aware prompt only)
};

namespace detail {

inline std::size_t count_occurrences(std::string_view text, std::string_view needle) {
    std::size_t count = 0;
    for (std::size_t pos = text.find(needle); pos != std::string_view::npos;
         pos = text.find(needle, pos + needle.size()))
        ++count;
    return count;
}

/// Expands {{key}} placeholders left to right in one pass; substituted values
/// are inserted verbatim and never re-scanned for placeholders.
inline std::string
substitute(std::string_view tmpl,
           const std::function<std::optional<std::string>(std::string_view)>& lookup) {
    std::string out;
    out.reserve(tmpl.size());
    std::size_t pos = 0;
    while (pos < tmpl.size()) {
        std::size_t open = tmpl.find("{{", pos);
        if (open == std::string_view::npos) break;
        std::size_t close = tmpl.find("}}", open + 2);
        if (close == std::string_view::npos) break;
        out.append(tmpl.substr(pos, open - pos));
        std::string_view key = tmpl.substr(open + 2, close - open - 2);
        std::optional<std::string> value = lookup(key);
        if (!value)
            throw DataError("template references unknown placeholder {{" + std::string(key) +
                            "}}");
        out += *value;
        pos = close + 2;
    }
    out.append(tmpl.substr(pos));
    return out;
}

inline void require_placeholder(const std::string& text, std::string_view name,
                                std::string_view placeholder, std::size_t exactly) {
    std::size_t n = count_occurrences(text, placeholder);
    if (exactly > 0 && n != exactly)
        throw DataError(std::string(name) + ": expected " + placeholder.data() +
                        " exactly " + std::to_string(exactly) + " time(s), found " +
                        std::to_string(n));
    if (exactly == 0 && n == 0)
        throw DataError(std::string(name) + ": missing " + std::string(placeholder));
}

} // namespace detail

/// Prompt templates are plain UTF-8 files; a single trailing newline is
/// stripped at load time so files may end with one without affecting output.
struct TemplateSet {
    std::string zero_shot;
    std::string few_shot;
    std::string cot;
    std::string cap;
    std::string cap_sections;
    std::string cap_sections_reverse;
    std::string judge;
    std::vector<std::pair<std::string, std::string>> cap_static_mappings;

    static TemplateSet load(const std::filesystem::path& dir);
};

inline TemplateSet TemplateSet::load(const std::filesystem::path& dir) {
    auto read = [&](const char* file) {
        std::string text = csvio::read_text_file(dir / file);
        if (!text.empty() && text.back() == '\n') text.pop_back();
        if (!text.empty() && text.back() == '\r') text.pop_back();
        return text;
    };
    TemplateSet ts;
    ts.zero_shot = read("zero_shot.tmpl");
    ts.few_shot = read("few_shot.tmpl");
    ts.cot = read("cot.tmpl");
    ts.cap = read("cap.tmpl");
    ts.cap_sections = read("cap_sections.tmpl");
    ts.cap_sections_reverse = read("cap_sections_reverse.tmpl");
    ts.judge = read("judge.tmpl");

    using detail::require_placeholder;
    require_placeholder(ts.zero_shot, "zero_shot.tmpl", "{{input_sentence}}", 1);
    require_placeholder(ts.few_shot, "few_shot.tmpl", "{{input_sentence}}", 1);
    require_placeholder(ts.few_shot, "few_shot.tmpl", "{{examples}}", 1);
    require_placeholder(ts.cot, "cot.tmpl", "{{input_sentence}}", 1);
    require_placeholder(ts.cap, "cap.tmpl", "{{input_sentence}}", 1);
    require_placeholder(ts.cap, "cap.tmpl", "{{rule_sections}}", 1);
    require_placeholder(ts.cap, "cap.tmpl", "{{word_mappings}}", 1);
    for (auto [text, name] : {std::pair<const std::string*, const char*>
                                  {&ts.cap_sections, "cap_sections.tmpl"},
                              {&ts.cap_sections_reverse, "cap_sections_reverse.tmpl"}}) {
        if (detail::count_occurrences(*text, "{{rules:") == 0)
            throw DataError(std::string(name) + ": missing {{rules:...}} placeholders");
        if (detail::count_occurrences(*text, "{{input_sentence}}") != 0)
            throw DataError(std::string(name) + ": {{input_sentence}} belongs to the outer "
                            "prompt template");
    }
    require_placeholder(ts.judge, "judge.tmpl", "{{source_sentence}}", 0);
    require_placeholder(ts.judge, "judge.tmpl", "{{reference_translation}}", 0);
    require_placeholder(ts.judge, "judge.tmpl", "{{candidate_translation}}", 0);

    auto rows = csvio::read_file(dir / "cap_mappings.tsv", '\t');
    if (rows.empty()) throw DataError((dir / "cap_mappings.tsv").string() + ": empty file");
    if (rows[0].fields != std::vector<std::string>{"bangla", "sylheti"})
        throw DataError((dir / "cap_mappings.tsv").string() +
                        ": expected header bangla<TAB>sylheti");
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto& r = rows[i];
        if (r.fields.size() != 2)
            throw DataError((dir / "cap_mappings.tsv").string() + ":" +
                            std::to_string(r.line) + ": expected 2 fields");
        if (r.fields[0].empty() || r.fields[1].empty())
            throw DataError((dir / "cap_mappings.tsv").string() + ":" +
                            std::to_string(r.line) + ": empty mapping side");
        ts.cap_static_mappings.emplace_back(r.fields[0], r.fields[1]);
    }
    return ts;
}

inline std::vector<Exemplar> default_exemplars() {
    return {
        {"কেমন আছো ?", "ভাল আছনি?"},
        {"আজকে আমার মন ভালো নেই", "আইজকু আমার মন ভালো নায়"},
        {"তুমি কি করো ?", "তুমি কিতা খরো?"},
        {"এই গরমে আমার কিছু ভালো লাগে না", "অউ গরমো আমার কুনতা ভালো লাগের না"},
        {"ছেলেটি সাদা রঙয়ের একটি শার্ট পরে এসেছিল", "ফুয়াটায় এখটা সাদা রংগর শার্ট পিন্দিয়া আইছিল"},
    };
}

inline std::vector<Exemplar> load_exemplars(const std::filesystem::path& path) {
    auto rows = csvio::read_file(path, ',');
    if (rows.empty()) throw DataError(path.string() + ": empty file");
    if (rows[0].fields != std::vector<std::string>{"bangla", "sylheti"})
        throw DataError(path.string() + ": expected header bangla,sylheti");
    std::vector<Exemplar> out;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto& r = rows[i];
        if (r.fields.size() != 2)
            throw DataError(path.string() + ":" + std::to_string(r.line) +
                            ": expected 2 fields");
        Exemplar e{normalize(r.fields[0]), normalize(r.fields[1])};
        if (e.bangla.empty() || e.sylheti.empty())
            throw DataError(path.string() + ":" + std::to_string(r.line) +
                            ": empty example side");
        out.push_back(std::move(e));
    }
    if (out.empty()) throw DataError(path.string() + ": no examples");
    return out;
}

namespace detail {

inline constexpr std::array<std::string_view, 8> kBengaliOrdinals = {
    "১", "২", "৩", "৪", "৫", "৬", "৭", "৮"};

inline std::optional<std::string> language_value(std::string_view key, Direction direction) {
    if (key == "source_language") return std::string(source_language(direction));
    if (key == "target_language") return std::string(target_language(direction));
    return std::nullopt;
}

} // namespace detail

inline RenderedPrompt render_zero_shot(const TemplateSet& ts, std::string_view input_sentence,
                                       Direction direction = Direction::bangla_to_sylheti) {
    RenderedPrompt out;
    out.strategy = Strategy::zero_shot;
    out.direction = direction;
    out.input_sentence = normalize(input_sentence);
    out.text = detail::substitute(ts.zero_shot, [&](std::string_view key) {
        if (key == "input_sentence") return std::optional<std::string>(out.input_sentence);
        return detail::language_value(key, direction);
    });
    return out;
}

/// Accepts one to eight examples; items are numbered with Bengali ordinals and
/// separated by single spaces to stay inside the template's inline list.
inline RenderedPrompt render_few_shot(const TemplateSet& ts,
                                      const std::vector<Exemplar>& exemplars,
                                      std::string_view input_sentence,
                                      Direction direction = Direction::bangla_to_sylheti) {
    if (exemplars.empty() || exemplars.size() > detail::kBengaliOrdinals.size())
        throw std::invalid_argument("render_few_shot: between 1 and 8 examples required");
    RenderedPrompt out;
    out.strategy = Strategy::few_shot;
    out.direction = direction;
    out.input_sentence = normalize(input_sentence);
    std::string examples;
    for (std::size_t i = 0; i < exemplars.size(); ++i) {
        const auto& e = exemplars[i];
        const std::string& src =
            direction == Direction::bangla_to_sylheti ? e.bangla : e.sylheti;
        const std::string& tgt =
            direction == Direction::bangla_to_sylheti ? e.sylheti : e.bangla;
        if (i > 0) examples += ' ';
        examples += detail::kBengaliOrdinals[i];
        examples += ". ";
        examples += src;
        examples += " → ";
        examples += tgt;
    }
    out.text = detail::substitute(ts.few_shot, [&](std::string_view key) {
        if (key == "input_sentence") return std::optional<std::string>(out.input_sentence);
        if (key == "examples") return std::optional<std::string>(examples);
        return detail::language_value(key, direction);
    });
    return out;
}

inline RenderedPrompt render_cot(const TemplateSet& ts, std::string_view input_sentence,
                                 Direction direction = Direction::bangla_to_sylheti) {
    RenderedPrompt out;
    out.strategy = Strategy::cot;
    out.direction = direction;
    out.input_sentence = normalize(input_sentence);
    out.text = detail::substitute(ts.cot, [&](std::string_view key) {
        if (key == "input_sentence") return std::optional<std::string>(out.input_sentence);
        return detail::language_value(key, direction);
    });
    return out;
}

namespace detail {

/// {{rules:<category>}} or {{rules:<category>:<lo>-<hi>}} (inclusive priority
/// range). Hidden rules are omitted; the remainder joins with ", ".
inline std::optional<std::string> rules_value(std::string_view key, const Rulebook& rb) {
    if (!key.starts_with("rules:")) return std::nullopt;
    std::string_view spec = key.substr(6);
    std::string_view range;
    if (std::size_t colon = spec.find(':'); colon != std::string_view::npos) {
        range = spec.substr(colon + 1);
        spec = spec.substr(0, colon);
    }
    RuleCategory category = rule_category_from_string(spec);
    int lo = std::numeric_limits<int>::min();
    int hi = std::numeric_limits<int>::max();
    if (!range.empty()) {
        std::size_t dash = range.find('-');
        if (dash == std::string_view::npos)
            throw DataError("bad priority range in placeholder {{" + std::string(key) + "}}");
        try {
            lo = std::stoi(std::string(range.substr(0, dash)));
            hi = std::stoi(std::string(range.substr(dash + 1)));
        } catch (const std::exception&) {
            throw DataError("bad priority range in placeholder {{" + std::string(key) + "}}");
        }
    }
    std::string joined;
    for (const Rule* rule : rules_in_category(rb, category)) {
        if (rule->priority < lo || rule->priority > hi) continue;
        if (rule->display == "-") continue;
        if (!joined.empty()) joined += ", ";
        joined += display_string(*rule);
    }
    return joined;
}

} // namespace detail

/// Context-aware prompt: linguistic rule sections plus a word-mapping excerpt.
/// The excerpt always lists the template's static mappings and then appends
/// dictionary entries matched against the input sentence (token order, core
/// words first, then idioms); `max_excerpt` caps only the appended part.
/// Reverse direction inverts the rulebook and lexicon and uses the
/// hand-inverted section skeleton.
inline RenderedPrompt render_cap(const TemplateSet& ts, const Rulebook& rulebook,
                                 const Lexicon& lexicon, std::string_view input_sentence,
                                 Direction direction = Direction::bangla_to_sylheti,
                                 std::size_t max_excerpt = 50) {
    RenderedPrompt out;
    out.strategy = Strategy::sylheti_cap;
    out.direction = direction;
    out.input_sentence = normalize(input_sentence);

    bool reverse = direction == Direction::sylheti_to_bangla;
    Rulebook working_rules;
    if (reverse) {
        for (const auto& rule : rulebook.rules)
            if (auto inv = invert_exact_rule(rule)) working_rules.rules.push_back(*inv);
    } else {
        working_rules = rulebook;
    }
    const Lexicon* working_lexicon = &lexicon;
    Lexicon inverted;
    if (lexicon.direction != direction) {
        inverted = invert(lexicon);
        working_lexicon = &inverted;
    }

    const std::string& skeleton = reverse ? ts.cap_sections_reverse : ts.cap_sections;
    std::string sections = detail::substitute(skeleton, [&](std::string_view key) {
        return detail::rules_value(key, working_rules);
    });

    std::vector<std::pair<std::string, std::string>> mappings;
    std::set<std::string> seen;
    for (const auto& [bangla, sylheti] : ts.cap_static_mappings) {
        const std::string& src = reverse ? sylheti : bangla;
        const std::string& tgt = reverse ? bangla : sylheti;
        if (seen.insert(src).second) mappings.emplace_back(src, tgt);
    }
    TokenSequence tokens = tokenize(out.input_sentence);
    std::size_t dynamic = 0;
    auto push_dynamic = [&](const std::string& src, const std::string& tgt) {
        if (dynamic >= max_excerpt) return;
        if (!seen.insert(src).second) return;
        mappings.emplace_back(src, tgt);
        ++dynamic;
    };
    for (const auto& token : tokens)
        if (auto target = lookup(*working_lexicon, token)) push_dynamic(token, *target);
    for (const auto& match : match_idioms(*working_lexicon, tokens)) {
        std::string phrase;
        for (std::size_t i = match.begin; i < match.end; ++i) {
            if (!phrase.empty()) phrase += ' ';
            phrase += tokens[i];
        }
        push_dynamic(phrase, match.target);
    }
    std::string word_mappings;
    for (const auto& [src, tgt] : mappings) {
        if (!word_mappings.empty()) word_mappings += ", ";
        word_mappings += src;
        word_mappings += " → ";
        word_mappings += tgt;
    }
    word_mappings += '.';
    out.lexicon_excerpt_size = mappings.size();

    out.text = detail::substitute(ts.cap, [&](std::string_view key) {
        if (key == "input_sentence") return std::optional<std::string>(out.input_sentence);
        if (key == "rule_sections") return std::optional<std::string>(sections);
        if (key == "word_mappings") return std::optional<std::string>(word_mappings);
        return detail::language_value(key, direction);
    });
    return out;
}

inline std::string render_judge(const TemplateSet& ts, std::string_view source,
                                std::string_view reference, std::string_view candidate,
                                Direction direction = Direction::bangla_to_sylheti) {
    std::string src_lang =
        direction == Direction::bangla_to_sylheti ? "Standard Bangla" : "Sylheti";
    std::string tgt_lang =
        direction == Direction::bangla_to_sylheti ? "Sylheti" : "Standard Bangla";
    return detail::substitute(ts.judge, [&](std::string_view key) -> std::optional<std::string> {
        if (key == "source_sentence") return normalize(source);
        if (key == "reference_translation") return normalize(reference);
        if (key == "candidate_translation") return normalize(candidate);
        if (key == "source_language") return src_lang;
        if (key == "target_language") return tgt_lang;
        return std::nullopt;
    });
}

struct ParsedTranslation {
    std::string text;
    /// Set when no answer label was found and the last non-empty line was
    /// taken as a fallback.
    bool low_confidence = false;

    bool operator==(const ParsedTranslation&) const = default;
};

namespace detail {

inline std::string_view trim_view(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r' ||
                          s.front() == '\n'))
        s.remove_prefix(1);
    while (!s.empty() &&
           (s.back() == ' ' || s.back() == '\t' || s.back() == '\r' || s.back() == '\n'))
        s.remove_suffix(1);
    return s;
}

inline std::string_view strip_quotes(std::string_view s) {
    static constexpr std::array<std::pair<std::string_view, std::string_view>, 3> kPairs = {
        std::pair<std::string_view, std::string_view>{"\"", "\""},
        {"“", "”"},
        {"«", "»"},
    };
    for (auto [open, close] : kPairs) {
        if (s.size() > open.size() + close.size() && s.starts_with(open) &&
            s.ends_with(close)) {
            s.remove_prefix(open.size());
            s.remove_suffix(close.size());
            return trim_view(s);
        }
    }
    return s;
}

inline std::string last_nonempty_line(std::string_view raw) {
    while (!raw.empty()) {
        std::size_t nl = raw.find_last_of('\n');
        std::string_view line =
            nl == std::string_view::npos ? raw : raw.substr(nl + 1);
        line = trim_view(line);
        if (!line.empty()) return std::string(line);
        if (nl == std::string_view::npos) break;
        raw = raw.substr(0, nl);
    }
    return {};
}

} // namespace detail

/// Pulls the translated sentence out of a raw completion. Looks for the last
/// occurrence of the strategy's answer label ("Best Translation:" for the
/// chain-of-thought strategy, otherwise "<TargetLanguage>:"), strips one layer
/// of surrounding quotes, and normalizes. Without a usable label the last
/// non-empty line is taken and the result is marked low confidence.
inline ParsedTranslation parse_translation(std::string_view raw, Strategy strategy,
                                           Direction direction = Direction::bangla_to_sylheti) {
    std::string label = strategy == Strategy::cot
                            ? "Best Translation:"
                            : std::string(target_language(direction)) + ":";
    std::size_t pos = raw.rfind(label);
    if (pos != std::string_view::npos) {
        std::string_view after = raw.substr(pos + label.size());
        if (std::size_t nl = after.find('\n');
            nl != std::string_view::npos && !detail::trim_view(after.substr(0, nl)).empty())
            after = after.substr(0, nl);
        std::string candidate =
            normalize(detail::strip_quotes(detail::trim_view(after)));
        if (!candidate.empty()) return {candidate, false};
    }
    std::string fallback =
        normalize(detail::strip_quotes(detail::trim_view(detail::last_nonempty_line(raw))));
    return {fallback, true};
}

/// Extracts the first JSON object with adequacy/fluency/overall fields from a
/// raw judge completion; all three must be numbers in [0, 100].
inline quality::JudgeVerdict parse_judge(std::string_view raw) {
    for (std::size_t start = raw.find('{'); start != std::string_view::npos;
         start = raw.find('{', start + 1)) {
        int depth = 0;
        bool in_string = false;
        for (std::size_t i = start; i < raw.size(); ++i) {
            char c = raw[i];
            if (in_string) {
                if (c == '\\') ++i;
                else if (c == '"') in_string = false;
                continue;
            }
            if (c == '"') in_string = true;
            else if (c == '{') ++depth;
            else if (c == '}' && --depth == 0) {
                nlohmann::json obj =
                    nlohmann::json::parse(raw.substr(start, i - start + 1), nullptr, false);
                if (obj.is_discarded()) break;
                quality::JudgeVerdict v;
                for (auto [name, slot] : {std::pair<const char*, double*>{"adequacy", &v.adequacy},
                                          {"fluency", &v.fluency},
                                          {"overall", &v.overall}}) {
                    if (!obj.contains(name) || !obj.at(name).is_number())
                        throw DataError("judge reply missing numeric \"" + std::string(name) +
                                        "\"");
                    *slot = obj.at(name).get<double>();
                    if (*slot < 0.0 || *slot > 100.0)
                        throw DataError("judge reply field \"" + std::string(name) +
                                        "\" out of range [0,100]");
                }
                return v;
            }
        }
    }
    throw DataError("judge reply contains no JSON object");
}

} // namespace sylcap::prompting
