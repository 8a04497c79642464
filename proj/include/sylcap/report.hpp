#pragma once

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "sylcap/errors.hpp"
#include "sylcap/evaluation.hpp"
#include "sylcap/metrics.hpp"
#include "sylcap/quality.hpp"

namespace sylcap::eval {

inline constexpr std::string_view kReportFormat = "sylcap-report/1";

struct ReportCell {
    std::string strategy;
    std::string model;
    std::size_t total = 0;
    std::size_t succeeded = 0;
    std::size_t failed = 0;
    metrics::MetricScores means; // over succeeded requests
    double corpus_bleu4 = 0.0;
    std::optional<quality::JudgeVerdict> judge; // means over judged segments
    std::size_t judge_count = 0;
    std::optional<double> mqm;
    std::optional<quality::Proportions> preference;
    std::optional<double> hallucination_rate;
};

struct QualityInputs {
    std::optional<quality::MqmFile> mqm;
    std::vector<std::pair<quality::SegmentKey, quality::JudgeVerdict>> judge;
    std::vector<quality::PreferenceRating> preferences;
    std::vector<quality::HallucinationFlag> hallucinations;
};

struct EvalReport {
    std::string direction;
    std::size_t pair_count = 0;
    std::size_t record_count = 0;
    std::size_t succeeded = 0;
    std::size_t failed = 0;
    std::vector<std::string> strategies; // column order
    std::vector<std::string> models;     // row order
    std::map<quality::GroupKey, ReportCell> cells;
    std::map<std::string, std::vector<quality::GroupKey>> best; // ties all listed
    std::vector<std::string> notes;
};

namespace detail {

inline void note_once(std::vector<std::string>& notes, std::string text) {
    if (std::find(notes.begin(), notes.end(), text) == notes.end())
        notes.push_back(std::move(text));
}

} // namespace detail

/// Aggregates translation records (plus optional human and judge annotation
/// inputs) into per-(strategy, model) cells. Annotations referencing a
/// (strategy, model) group with no records are data errors rather than being
/// dropped silently.
inline EvalReport build_report(const std::vector<TranslationRecord>& records,
                               const QualityInputs& inputs = {}) {
    if (records.empty()) throw DataError("no translation records to report on");

    EvalReport report;
    report.record_count = records.size();
    report.direction = std::string(to_string(records.front().direction));
    std::set<std::string> pair_ids;
    std::set<std::string> models;
    std::set<std::string> strategies_seen;
    std::map<quality::GroupKey, std::vector<const TranslationRecord*>> groups;
    for (const auto& record : records) {
        pair_ids.insert(record.pair_id);
        models.insert(record.model_name);
        strategies_seen.insert(std::string(prompting::to_string(record.strategy)));
        groups[{std::string(prompting::to_string(record.strategy)), record.model_name}]
            .push_back(&record);
        if (std::string_view(to_string(record.direction)) != report.direction)
            detail::note_once(report.notes,
                              "records mix translation directions; headline direction is the "
                              "first record's");
    }
    report.pair_count = pair_ids.size();
    for (auto strategy : prompting::kAllStrategies)
        if (strategies_seen.contains(std::string(prompting::to_string(strategy))))
            report.strategies.emplace_back(prompting::to_string(strategy));
    report.models.assign(models.begin(), models.end());

    for (const auto& [key, group_records] : groups) {
        ReportCell cell;
        cell.strategy = key.first;
        cell.model = key.second;
        cell.total = group_records.size();
        std::vector<metrics::MetricScores> scores;
        std::vector<std::pair<TokenSequence, TokenSequence>> token_pairs;
        for (const TranslationRecord* record : group_records) {
            if (record->error || !record->scores) {
                ++cell.failed;
                continue;
            }
            ++cell.succeeded;
            scores.push_back(*record->scores);
            token_pairs.emplace_back(tokenize(record->hypothesis),
                                     tokenize(record->reference));
        }
        if (!scores.empty()) {
            cell.means = metrics::aggregate(scores);
            cell.corpus_bleu4 = metrics::corpus_bleu(token_pairs, 4);
        } else {
            report.notes.push_back(key.first + "/" + key.second + ": all " +
                                   std::to_string(cell.total) + " requests failed");
        }
        report.succeeded += cell.succeeded;
        report.failed += cell.failed;
        report.cells.emplace(key, std::move(cell));
    }
    if (report.succeeded == 0) throw DataError("every request failed; nothing to report");

    auto resolve_cell = [&](const quality::GroupKey& key,
                            const char* what) -> ReportCell& {
        auto it = report.cells.find(key);
        if (it == report.cells.end())
            throw DataError(std::string(what) + " references " + key.first + "/" + key.second +
                            " but no translation records exist for that group");
        return it->second;
    };

    if (inputs.mqm) {
        std::map<quality::GroupKey, std::vector<quality::MqmAnnotation>> per_group;
        for (const auto& annotation : inputs.mqm->annotations) {
            quality::SegmentKey seg = quality::parse_segment_id(annotation.segment_id);
            per_group[{seg.strategy, seg.model}].push_back(annotation);
        }
        for (const auto& [key, annotations] : per_group) {
            ReportCell& cell = resolve_cell(key, "MQM annotation");
            if (cell.succeeded == 0)
                throw DataError("MQM annotations reference " + key.first + "/" + key.second +
                                " but that group has no successful translations");
            cell.mqm = quality::mqm_score(annotations, cell.succeeded, inputs.mqm->weights);
        }
        detail::note_once(report.notes, "MQM is shown only for strategy/model groups with at "
                                        "least one annotation");
    }

    if (!inputs.judge.empty()) {
        std::map<quality::GroupKey, std::vector<quality::JudgeVerdict>> per_group;
        for (const auto& [seg, verdict] : inputs.judge)
            per_group[{seg.strategy, seg.model}].push_back(verdict);
        for (const auto& [key, verdicts] : per_group) {
            ReportCell& cell = resolve_cell(key, "judge verdict");
            cell.judge = quality::aggregate_judge(verdicts);
            cell.judge_count = verdicts.size();
        }
    }

    if (!inputs.preferences.empty())
        for (const auto& [key, proportions] : quality::preference_distribution(inputs.preferences))
            resolve_cell(key, "preference rating").preference = proportions;

    if (!inputs.hallucinations.empty())
        for (const auto& [key, rate] : quality::hallucination_by_group(inputs.hallucinations))
            resolve_cell(key, "hallucination flag").hallucination_rate = rate;

    auto mark_best = [&](const std::string& metric, auto value_of, bool higher_is_better) {
        std::optional<double> best_value;
        std::vector<quality::GroupKey> winners;
        for (const auto& [key, cell] : report.cells) {
            std::optional<double> v = value_of(cell);
            if (!v) continue;
            if (!best_value || (higher_is_better ? *v > *best_value : *v < *best_value)) {
                best_value = *v;
                winners = {key};
            } else if (*v == *best_value) {
                winners.push_back(key);
            }
        }
        if (best_value) report.best[metric] = std::move(winners);
    };
    auto scored = [](const ReportCell& cell, double v) {
        return cell.succeeded > 0 ? std::optional<double>(v) : std::nullopt;
    };
    mark_best("bleu1", [&](const ReportCell& c) { return scored(c, c.means.bleu1); }, true);
    mark_best("bleu4", [&](const ReportCell& c) { return scored(c, c.means.bleu4); }, true);
    mark_best("meteor", [&](const ReportCell& c) { return scored(c, c.means.meteor); }, true);
    mark_best("chrf", [&](const ReportCell& c) { return scored(c, c.means.chrf); }, true);
    mark_best("corpus_bleu4",
              [&](const ReportCell& c) { return scored(c, c.corpus_bleu4); }, true);
    mark_best("judge_overall",
              [](const ReportCell& c) {
                  return c.judge ? std::optional<double>(c.judge->overall) : std::nullopt;
              },
              true);
    mark_best("mqm", [](const ReportCell& c) { return c.mqm; }, false);
    mark_best("hallucination_rate",
              [](const ReportCell& c) { return c.hallucination_rate; }, false);

    detail::note_once(report.notes,
                      "METEOR is the exact-match variant: no stemming or synonym matching");
    detail::note_once(report.notes,
                      "a sentence with no matching n-gram at any BLEU order scores 0; corpus "
                      "BLEU-4 pools counts over the group before the geometric mean");
    return report;
}

namespace detail {

inline std::string format_fixed(double value, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, value);
    return buf;
}

inline std::string format_shortest(double value) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
    return std::string(buf, ptr);
}

inline bool is_best(const EvalReport& report, const std::string& metric,
                    const quality::GroupKey& key) {
    auto it = report.best.find(metric);
    if (it == report.best.end()) return false;
    return std::find(it->second.begin(), it->second.end(), key) != it->second.end();
}

inline const ReportCell* cell_of(const EvalReport& report, const std::string& strategy,
                                 const std::string& model) {
    auto it = report.cells.find({strategy, model});
    return it == report.cells.end() ? nullptr : &it->second;
}

inline std::string md_cell(std::string text, bool bold) {
    return bold ? "**" + text + "**" : text;
}

} // namespace detail

inline std::string render_report_markdown(const EvalReport& report) {
    using detail::cell_of;
    using detail::format_fixed;
    using detail::is_best;
    using detail::md_cell;

    std::string md;
    md += "# Translation Evaluation Report\n\n";
    md += "- Format: " + std::string(kReportFormat) + "\n";
    md += "- Direction: " + report.direction + "\n";
    md += "- Sentence pairs: " + std::to_string(report.pair_count) + "\n";
    md += "- Requests: " + std::to_string(report.record_count) + " total, " +
          std::to_string(report.succeeded) + " succeeded, " + std::to_string(report.failed) +
          " failed\n";

    auto table = [&](const std::string& heading,
                     const std::vector<std::pair<std::string, std::string>>& columns,
                     auto cell_text) {
        // columns: (strategy, column label suffix)
        md += "\n## " + heading + "\n\n";
        md += "| Model |";
        for (const auto& [strategy, label] : columns) md += " " + strategy + " " + label + " |";
        md += "\n|---|";
        for (std::size_t i = 0; i < columns.size(); ++i) md += "---|";
        md += "\n";
        for (const auto& model : report.models) {
            md += "| " + model + " |";
            for (const auto& [strategy, label] : columns)
                md += " " + cell_text(strategy, label, model) + " |";
            md += "\n";
        }
    };

    {
        std::vector<std::pair<std::string, std::string>> columns;
        for (const auto& strategy : report.strategies) {
            columns.emplace_back(strategy, "BLEU-1");
            columns.emplace_back(strategy, "METEOR");
            columns.emplace_back(strategy, "chrF");
        }
        table("Sentence-level means", columns,
              [&](const std::string& strategy, const std::string& label,
                  const std::string& model) -> std::string {
                  const ReportCell* cell = cell_of(report, strategy, model);
                  if (!cell || cell->succeeded == 0) return "—";
                  quality::GroupKey key{strategy, model};
                  if (label == "BLEU-1")
                      return md_cell(format_fixed(cell->means.bleu1, 4),
                                     is_best(report, "bleu1", key));
                  if (label == "METEOR")
                      return md_cell(format_fixed(cell->means.meteor, 4),
                                     is_best(report, "meteor", key));
                  return md_cell(format_fixed(cell->means.chrf, 2),
                                 is_best(report, "chrf", key));
              });
    }
    {
        std::vector<std::pair<std::string, std::string>> columns;
        for (const auto& strategy : report.strategies) {
            columns.emplace_back(strategy, "BLEU-4");
            columns.emplace_back(strategy, "corpus BLEU-4");
        }
        table("BLEU-4", columns,
              [&](const std::string& strategy, const std::string& label,
                  const std::string& model) -> std::string {
                  const ReportCell* cell = cell_of(report, strategy, model);
                  if (!cell || cell->succeeded == 0) return "—";
                  quality::GroupKey key{strategy, model};
                  if (label == "BLEU-4")
                      return md_cell(format_fixed(cell->means.bleu4, 4),
                                     is_best(report, "bleu4", key));
                  return md_cell(format_fixed(cell->corpus_bleu4, 4),
                                 is_best(report, "corpus_bleu4", key));
              });
    }
    {
        std::vector<std::pair<std::string, std::string>> columns;
        for (const auto& strategy : report.strategies) columns.emplace_back(strategy, "ok/total");
        table("Requests", columns,
              [&](const std::string& strategy, const std::string&,
                  const std::string& model) -> std::string {
                  const ReportCell* cell = cell_of(report, strategy, model);
                  if (!cell) return "—";
                  return std::to_string(cell->succeeded) + "/" + std::to_string(cell->total);
              });
    }

    bool any_judge = false, any_mqm = false, any_pref = false, any_halluc = false;
    for (const auto& [key, cell] : report.cells) {
        any_judge |= cell.judge.has_value();
        any_mqm |= cell.mqm.has_value();
        any_pref |= cell.preference.has_value();
        any_halluc |= cell.hallucination_rate.has_value();
    }

    if (any_judge) {
        std::vector<std::pair<std::string, std::string>> columns;
        for (const auto& strategy : report.strategies)
            columns.emplace_back(strategy, "adequacy / fluency / overall");
        table("Judge means", columns,
              [&](const std::string& strategy, const std::string&,
                  const std::string& model) -> std::string {
                  const ReportCell* cell = cell_of(report, strategy, model);
                  if (!cell || !cell->judge) return "—";
                  std::string text = format_fixed(cell->judge->adequacy, 2) + " / " +
                                     format_fixed(cell->judge->fluency, 2) + " / " +
                                     format_fixed(cell->judge->overall, 2);
                  return md_cell(text, is_best(report, "judge_overall", {strategy, model}));
              });
    }
    if (any_mqm) {
        std::vector<std::pair<std::string, std::string>> columns;
        for (const auto& strategy : report.strategies) columns.emplace_back(strategy, "MQM");
        table("MQM (lower is better)", columns,
              [&](const std::string& strategy, const std::string&,
                  const std::string& model) -> std::string {
                  const ReportCell* cell = cell_of(report, strategy, model);
                  if (!cell || !cell->mqm) return "—";
                  return md_cell(format_fixed(*cell->mqm, 2),
                                 is_best(report, "mqm", {strategy, model}));
              });
    }
    if (any_pref) {
        std::vector<std::pair<std::string, std::string>> columns;
        for (const auto& strategy : report.strategies)
            columns.emplace_back(strategy, "good / fair / poor");
        table("Preference distribution", columns,
              [&](const std::string& strategy, const std::string&,
                  const std::string& model) -> std::string {
                  const ReportCell* cell = cell_of(report, strategy, model);
                  if (!cell || !cell->preference) return "—";
                  return format_fixed(cell->preference->good, 2) + " / " +
                         format_fixed(cell->preference->fair, 2) + " / " +
                         format_fixed(cell->preference->poor, 2);
              });
    }
    if (any_halluc) {
        std::vector<std::pair<std::string, std::string>> columns;
        for (const auto& strategy : report.strategies)
            columns.emplace_back(strategy, "hallucination rate");
        table("Hallucinations (lower is better)", columns,
              [&](const std::string& strategy, const std::string&,
                  const std::string& model) -> std::string {
                  const ReportCell* cell = cell_of(report, strategy, model);
                  if (!cell || !cell->hallucination_rate) return "—";
                  return md_cell(format_fixed(*cell->hallucination_rate, 2),
                                 is_best(report, "hallucination_rate", {strategy, model}));
              });
    }

    md += "\n## Notes\n\n";
    md += "- Best value per column is bold; ties share the marking.\n";
    for (const auto& note : report.notes) md += "- " + note + ".\n";
    return md;
}

inline std::string render_report_csv(const EvalReport& report) {
    using detail::format_shortest;
    std::string csv;
    csv += "# format: " + std::string(kReportFormat) + "\n";
    csv += "# direction: " + report.direction + "\n";
    csv += "# pairs: " + std::to_string(report.pair_count) + "\n";
    csv += "# requests: total=" + std::to_string(report.record_count) +
           " succeeded=" + std::to_string(report.succeeded) +
           " failed=" + std::to_string(report.failed) + "\n";
    for (const auto& note : report.notes) csv += "# note: " + note + "\n";
    csv += "model,strategy,metric,value\n";
    auto row = [&](const std::string& model, const std::string& strategy,
                   const std::string& metric, const std::string& value) {
        csv += csvio::escape(model, ',') + "," + csvio::escape(strategy, ',') + "," + metric +
               "," + value + "\n";
    };
    for (const auto& strategy : report.strategies)
        for (const auto& model : report.models) {
            const ReportCell* cell = detail::cell_of(report, strategy, model);
            if (!cell) continue;
            row(model, strategy, "total", std::to_string(cell->total));
            row(model, strategy, "succeeded", std::to_string(cell->succeeded));
            row(model, strategy, "failed", std::to_string(cell->failed));
            if (cell->succeeded > 0) {
                row(model, strategy, "bleu1", format_shortest(cell->means.bleu1));
                row(model, strategy, "bleu4", format_shortest(cell->means.bleu4));
                row(model, strategy, "meteor", format_shortest(cell->means.meteor));
                row(model, strategy, "chrf", format_shortest(cell->means.chrf));
                row(model, strategy, "corpus_bleu4", format_shortest(cell->corpus_bleu4));
            }
            if (cell->judge) {
                row(model, strategy, "judge_adequacy", format_shortest(cell->judge->adequacy));
                row(model, strategy, "judge_fluency", format_shortest(cell->judge->fluency));
                row(model, strategy, "judge_overall", format_shortest(cell->judge->overall));
                row(model, strategy, "judge_count", std::to_string(cell->judge_count));
            }
            if (cell->mqm) row(model, strategy, "mqm", format_shortest(*cell->mqm));
            if (cell->preference) {
                row(model, strategy, "preference_good", format_shortest(cell->preference->good));
                row(model, strategy, "preference_fair", format_shortest(cell->preference->fair));
                row(model, strategy, "preference_poor", format_shortest(cell->preference->poor));
            }
            if (cell->hallucination_rate)
                row(model, strategy, "hallucination_rate",
                    format_shortest(*cell->hallucination_rate));
        }
    return csv;
}

inline std::string render_report_json(const EvalReport& report) {
    nlohmann::json j;
    j["format"] = std::string(kReportFormat);
    j["direction"] = report.direction;
    j["pairs"] = report.pair_count;
    j["requests"] = {{"total", report.record_count},
                     {"succeeded", report.succeeded},
                     {"failed", report.failed}};
    j["strategies"] = report.strategies;
    j["models"] = report.models;
    j["cells"] = nlohmann::json::array();
    for (const auto& strategy : report.strategies)
        for (const auto& model : report.models) {
            const ReportCell* cell = detail::cell_of(report, strategy, model);
            if (!cell) continue;
            nlohmann::json c{{"strategy", strategy},
                             {"model", model},
                             {"total", cell->total},
                             {"succeeded", cell->succeeded},
                             {"failed", cell->failed}};
            if (cell->succeeded > 0) {
                c["bleu1"] = cell->means.bleu1;
                c["bleu4"] = cell->means.bleu4;
                c["meteor"] = cell->means.meteor;
                c["chrf"] = cell->means.chrf;
                c["corpus_bleu4"] = cell->corpus_bleu4;
            }
            if (cell->judge)
                c["judge"] = {{"adequacy", cell->judge->adequacy},
                              {"fluency", cell->judge->fluency},
                              {"overall", cell->judge->overall},
                              {"count", cell->judge_count}};
            if (cell->mqm) c["mqm"] = *cell->mqm;
            if (cell->preference)
                c["preference"] = {{"good", cell->preference->good},
                                   {"fair", cell->preference->fair},
                                   {"poor", cell->preference->poor}};
            if (cell->hallucination_rate) c["hallucination_rate"] = *cell->hallucination_rate;
            j["cells"].push_back(std::move(c));
        }
    j["best"] = nlohmann::json::object();
    for (const auto& [metric, winners] : report.best) {
        nlohmann::json list = nlohmann::json::array();
        for (const auto& [strategy, model] : winners)
            list.push_back(nlohmann::json::array({strategy, model}));
        j["best"][metric] = std::move(list);
    }
    j["notes"] = report.notes;
    return j.dump(2) + "\n";
}

} // namespace sylcap::eval
