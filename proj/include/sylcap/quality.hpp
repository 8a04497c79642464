#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "sylcap/csv.hpp"
#include "sylcap/errors.hpp"

namespace sylcap::quality {

enum class MqmCategory { mistranslation, omission, untranslated, awkward, other };

inline constexpr std::array<std::string_view, 5> kMqmCategoryNames = {
    "mistranslation", "omission", "untranslated", "awkward", "other",
};

inline constexpr std::string_view to_string(MqmCategory c) {
    return kMqmCategoryNames[static_cast<std::size_t>(c)];
}

inline MqmCategory mqm_category_from_string(std::string_view s) {
    for (std::size_t i = 0; i < kMqmCategoryNames.size(); ++i)
        if (kMqmCategoryNames[i] == s) return static_cast<MqmCategory>(i);
    throw DataError("unknown MQM category \"" + std::string(s) + "\"");
}

enum class MqmSeverity { minor, major, critical };

inline MqmSeverity mqm_severity_from_string(std::string_view s) {
    if (s == "minor") return MqmSeverity::minor;
    if (s == "major") return MqmSeverity::major;
    if (s == "critical") return MqmSeverity::critical;
    throw DataError("unknown MQM severity \"" + std::string(s) + "\"");
}

struct MqmWeights {
    double minor = 1.0;
    double major = 5.0;
    double critical = 10.0;

    double of(MqmSeverity s) const {
        switch (s) {
        case MqmSeverity::minor: return minor;
        case MqmSeverity::major: return major;
        case MqmSeverity::critical: return critical;
        }
        return 0.0;
    }
};

struct MqmAnnotation {
    std::string segment_id;
    MqmCategory category = MqmCategory::other;
    MqmSeverity severity = MqmSeverity::minor;
    std::string note;
};

/// Severity-weighted penalty total divided by the segment count; lower is
/// better, zero means no recorded errors.
inline double mqm_score(const std::vector<MqmAnnotation>& annotations, std::size_t segment_count,
                        MqmWeights weights = {}) {
    if (segment_count == 0) throw std::invalid_argument("mqm_score: segment_count must be >= 1");
    double total = 0.0;
    for (const auto& a : annotations) total += weights.of(a.severity);
    return total / static_cast<double>(segment_count);
}

/// Undivided weighted penalty per error category; the totals partition the
/// numerator of mqm_score exactly.
inline std::map<MqmCategory, double> mqm_breakdown(const std::vector<MqmAnnotation>& annotations,
                                                   MqmWeights weights = {}) {
    std::map<MqmCategory, double> totals;
    for (std::size_t i = 0; i < kMqmCategoryNames.size(); ++i)
        totals[static_cast<MqmCategory>(i)] = 0.0;
    for (const auto& a : annotations) totals[a.category] += weights.of(a.severity);
    return totals;
}

struct JudgeVerdict {
    double adequacy = 0;
    double fluency = 0;
    double overall = 0;

    bool operator==(const JudgeVerdict&) const = default;
};

inline JudgeVerdict aggregate_judge(const std::vector<JudgeVerdict>& verdicts) {
    if (verdicts.empty()) throw std::invalid_argument("aggregate_judge: empty verdict list");
    JudgeVerdict mean;
    for (const auto& v : verdicts) {
        mean.adequacy += v.adequacy;
        mean.fluency += v.fluency;
        mean.overall += v.overall;
    }
    auto n = static_cast<double>(verdicts.size());
    mean.adequacy /= n;
    mean.fluency /= n;
    mean.overall /= n;
    return mean;
}

enum class Rating { good, fair, poor };

inline Rating rating_from_string(std::string_view s) {
    if (s == "good") return Rating::good;
    if (s == "fair") return Rating::fair;
    if (s == "poor") return Rating::poor;
    throw DataError("unknown rating \"" + std::string(s) + "\"");
}

struct PreferenceRating {
    std::string segment_id;
    Rating rating = Rating::fair;
    std::string annotator_id;
};

struct HallucinationFlag {
    std::string segment_id;
    bool flagged = false;
    std::string annotator_id;
};

/// Segment ids follow `pair_id::strategy::model`.
struct SegmentKey {
    std::string pair_id;
    std::string strategy;
    std::string model;

    bool operator==(const SegmentKey&) const = default;
};

inline std::string make_segment_id(const SegmentKey& key) {
    return key.pair_id + "::" + key.strategy + "::" + key.model;
}

inline SegmentKey parse_segment_id(std::string_view id) {
    std::size_t a = id.find("::");
    std::size_t b = a == std::string_view::npos ? std::string_view::npos : id.find("::", a + 2);
    if (a == std::string_view::npos || b == std::string_view::npos)
        throw DataError("segment id \"" + std::string(id) +
                        "\" does not follow pair_id::strategy::model");
    return {std::string(id.substr(0, a)), std::string(id.substr(a + 2, b - a - 2)),
            std::string(id.substr(b + 2))};
}

// (strategy, model)
using GroupKey = std::pair<std::string, std::string>;

struct Proportions {
    double good = 0;
    double fair = 0;
    double poor = 0;

    bool operator==(const Proportions&) const = default;
};

namespace detail {

/// Majority vote across annotators; ties resolve toward the worse rating.
inline Rating majority_rating(const std::array<std::size_t, 3>& counts) {
    std::size_t best = std::max({counts[0], counts[1], counts[2]});
    if (counts[static_cast<std::size_t>(Rating::poor)] == best) return Rating::poor;
    if (counts[static_cast<std::size_t>(Rating::fair)] == best) return Rating::fair;
    return Rating::good;
}

} // namespace detail

/// Per-(strategy, model) proportions of good/fair/poor after a per-segment
/// majority vote across annotators. Each group's proportions sum to 1.
inline std::map<GroupKey, Proportions>
preference_distribution(const std::vector<PreferenceRating>& ratings) {
    std::map<std::string, std::array<std::size_t, 3>> per_segment;
    for (const auto& r : ratings)
        ++per_segment[r.segment_id][static_cast<std::size_t>(r.rating)];
    std::map<GroupKey, std::array<std::size_t, 3>> group_counts;
    for (const auto& [segment_id, counts] : per_segment) {
        SegmentKey key = parse_segment_id(segment_id);
        ++group_counts[{key.strategy, key.model}]
                      [static_cast<std::size_t>(detail::majority_rating(counts))];
    }
    std::map<GroupKey, Proportions> out;
    for (const auto& [group, counts] : group_counts) {
        auto total = static_cast<double>(counts[0] + counts[1] + counts[2]);
        out[group] = {static_cast<double>(counts[static_cast<std::size_t>(Rating::good)]) / total,
                      static_cast<double>(counts[static_cast<std::size_t>(Rating::fair)]) / total,
                      static_cast<double>(counts[static_cast<std::size_t>(Rating::poor)]) / total};
    }
    return out;
}

namespace detail {

inline std::map<std::string, bool>
segment_flags(const std::vector<HallucinationFlag>& flags) {
    std::map<std::string, std::pair<std::size_t, std::size_t>> votes; // flagged, clean
    for (const auto& f : flags) {
        auto& v = votes[f.segment_id];
        if (f.flagged) ++v.first;
        else ++v.second;
    }
    std::map<std::string, bool> out;
    for (const auto& [segment_id, v] : votes)
        out[segment_id] = v.first >= v.second; // ties resolve toward flagged
    return out;
}

} // namespace detail

/// Majority-flagged segments over all segments appearing in the flag list.
inline double hallucination_ratio(const std::vector<HallucinationFlag>& flags) {
    auto per_segment = detail::segment_flags(flags);
    if (per_segment.empty()) return 0.0;
    std::size_t flagged = 0;
    for (const auto& [id, is_flagged] : per_segment)
        if (is_flagged) ++flagged;
    return static_cast<double>(flagged) / static_cast<double>(per_segment.size());
}

inline std::map<GroupKey, double>
hallucination_by_group(const std::vector<HallucinationFlag>& flags) {
    auto per_segment = detail::segment_flags(flags);
    std::map<GroupKey, std::pair<std::size_t, std::size_t>> groups; // flagged, total
    for (const auto& [segment_id, is_flagged] : per_segment) {
        SegmentKey key = parse_segment_id(segment_id);
        auto& g = groups[{key.strategy, key.model}];
        if (is_flagged) ++g.first;
        ++g.second;
    }
    std::map<GroupKey, double> out;
    for (const auto& [group, g] : groups)
        out[group] = static_cast<double>(g.first) / static_cast<double>(g.second);
    return out;
}

// ---------------------------------------------------------------------------
// JSONL annotation files. One object per line; a leading header object of the
// form {"weights": {"minor": 1, "major": 5, "critical": 10}} may override the
// MQM severity weights. Objects may spell the segment either as "segment_id"
// or as separate "pair_id"/"strategy"/"model" keys.

namespace detail {

inline std::vector<nlohmann::json> read_jsonl(const std::filesystem::path& path,
                                              std::vector<std::size_t>* lines = nullptr) {
    std::string text = csvio::read_text_file(path);
    std::vector<nlohmann::json> objects;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t end = text.find('\n', pos);
        std::string_view line(text.data() + pos,
                              (end == std::string::npos ? text.size() : end) - pos);
        pos = end == std::string::npos ? text.size() + 1 : end + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.empty()) continue;
        try {
            objects.push_back(nlohmann::json::parse(line));
        } catch (const nlohmann::json::exception& e) {
            throw DataError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
        }
        if (lines) lines->push_back(line_no);
    }
    return objects;
}

inline std::string segment_id_of(const nlohmann::json& obj, const std::string& where) {
    if (obj.contains("segment_id")) return obj.at("segment_id").get<std::string>();
    if (obj.contains("pair_id") && obj.contains("strategy") && obj.contains("model"))
        return make_segment_id({obj.at("pair_id").get<std::string>(),
                                obj.at("strategy").get<std::string>(),
                                obj.at("model").get<std::string>()});
    throw DataError(where + ": missing segment_id (or pair_id/strategy/model)");
}

} // namespace detail

struct MqmFile {
    std::vector<MqmAnnotation> annotations;
    MqmWeights weights;
};

inline MqmFile load_mqm(const std::filesystem::path& path) {
    std::vector<std::size_t> lines;
    auto objects = detail::read_jsonl(path, &lines);
    MqmFile out;
    for (std::size_t i = 0; i < objects.size(); ++i) {
        const auto& obj = objects[i];
        const std::string where = path.string() + ":" + std::to_string(lines[i]);
        try {
            if (obj.contains("weights")) {
                const auto& w = obj.at("weights");
                if (w.contains("minor")) out.weights.minor = w.at("minor").get<double>();
                if (w.contains("major")) out.weights.major = w.at("major").get<double>();
                if (w.contains("critical")) out.weights.critical = w.at("critical").get<double>();
                continue;
            }
            MqmAnnotation a;
            a.segment_id = detail::segment_id_of(obj, where);
            a.category = mqm_category_from_string(obj.at("category").get<std::string>());
            a.severity = mqm_severity_from_string(obj.at("severity").get<std::string>());
            if (obj.contains("note")) a.note = obj.at("note").get<std::string>();
            out.annotations.push_back(std::move(a));
        } catch (const nlohmann::json::exception& e) {
            throw DataError(where + ": " + e.what());
        }
    }
    return out;
}

inline std::vector<std::pair<SegmentKey, JudgeVerdict>>
load_judge_verdicts(const std::filesystem::path& path) {
    std::vector<std::size_t> lines;
    auto objects = detail::read_jsonl(path, &lines);
    std::vector<std::pair<SegmentKey, JudgeVerdict>> out;
    for (std::size_t i = 0; i < objects.size(); ++i) {
        const auto& obj = objects[i];
        const std::string where = path.string() + ":" + std::to_string(lines[i]);
        if (obj.contains("error")) continue; // failed judgments carry no verdict
        try {
            SegmentKey key = parse_segment_id(detail::segment_id_of(obj, where));
            JudgeVerdict v{obj.at("adequacy").get<double>(), obj.at("fluency").get<double>(),
                           obj.at("overall").get<double>()};
            for (auto [name, value] : {std::pair<const char*, double>{"adequacy", v.adequacy},
                                       {"fluency", v.fluency},
                                       {"overall", v.overall}})
                if (value < 0.0 || value > 100.0)
                    throw DataError(where + ": " + name + " out of range [0,100]");
            out.emplace_back(std::move(key), v);
        } catch (const nlohmann::json::exception& e) {
            throw DataError(where + ": " + e.what());
        }
    }
    return out;
}

inline std::vector<PreferenceRating> load_preferences(const std::filesystem::path& path) {
    std::vector<std::size_t> lines;
    auto objects = detail::read_jsonl(path, &lines);
    std::vector<PreferenceRating> out;
    for (std::size_t i = 0; i < objects.size(); ++i) {
        const auto& obj = objects[i];
        const std::string where = path.string() + ":" + std::to_string(lines[i]);
        try {
            PreferenceRating r;
            r.segment_id = detail::segment_id_of(obj, where);
            r.rating = rating_from_string(obj.at("rating").get<std::string>());
            r.annotator_id = obj.value("annotator_id", "");
            out.push_back(std::move(r));
        } catch (const nlohmann::json::exception& e) {
            throw DataError(where + ": " + e.what());
        }
    }
    return out;
}

inline std::vector<HallucinationFlag> load_hallucinations(const std::filesystem::path& path) {
    std::vector<std::size_t> lines;
    auto objects = detail::read_jsonl(path, &lines);
    std::vector<HallucinationFlag> out;
    for (std::size_t i = 0; i < objects.size(); ++i) {
        const auto& obj = objects[i];
        const std::string where = path.string() + ":" + std::to_string(lines[i]);
        try {
            HallucinationFlag f;
            f.segment_id = detail::segment_id_of(obj, where);
            f.flagged = obj.at("flagged").get<bool>();
            f.annotator_id = obj.value("annotator_id", "");
            out.push_back(std::move(f));
        } catch (const nlohmann::json::exception& e) {
            throw DataError(where + ": " + e.what());
        }
    }
    return out;
}

} // namespace sylcap::quality
