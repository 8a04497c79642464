#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <thread>
#include <tuple>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "sylcap/corpus.hpp"
#include "sylcap/errors.hpp"
#include "sylcap/lexicon.hpp"
#include "sylcap/llm.hpp"
#include "sylcap/metrics.hpp"
#include "sylcap/prompting.hpp"
#include "sylcap/quality.hpp"
#include "sylcap/rulebook.hpp"

namespace sylcap::eval {

/// One model call on one sentence pair under one strategy. Failed calls keep
/// their slot with `error` set and no scores, so a run is always accountable
/// request by request.
struct TranslationRecord {
    std::string pair_id;
    Direction direction = Direction::bangla_to_sylheti;
    prompting::Strategy strategy = prompting::Strategy::zero_shot;
    std::string model_name;
    std::string source;
    std::string reference;
    std::string prompt_text;
    std::string raw_completion;
    std::string hypothesis;
    std::optional<metrics::MetricScores> scores;
    long latency_ms = 0;
    std::optional<std::string> error;

    bool operator==(const TranslationRecord&) const = default;
};

inline nlohmann::json to_json(const TranslationRecord& record) {
    nlohmann::json j{
        {"pair_id", record.pair_id},
        {"direction", to_string(record.direction)},
        {"strategy", prompting::to_string(record.strategy)},
        {"model_name", record.model_name},
        {"source", record.source},
        {"reference", record.reference},
        {"prompt_text", record.prompt_text},
        {"raw_completion", record.raw_completion},
        {"hypothesis", record.hypothesis},
        {"latency_ms", record.latency_ms},
    };
    if (record.scores)
        j["scores"] = {{"bleu1", record.scores->bleu1},
                       {"bleu4", record.scores->bleu4},
                       {"meteor", record.scores->meteor},
                       {"chrf", record.scores->chrf}};
    if (record.error) j["error"] = *record.error;
    return j;
}

inline TranslationRecord record_from_json(const nlohmann::json& j) {
    TranslationRecord record;
    record.pair_id = j.at("pair_id").get<std::string>();
    record.direction = direction_from_string(j.at("direction").get<std::string>());
    record.strategy = prompting::strategy_from_string(j.at("strategy").get<std::string>());
    record.model_name = j.at("model_name").get<std::string>();
    record.source = j.value("source", "");
    record.reference = j.value("reference", "");
    record.prompt_text = j.value("prompt_text", "");
    record.raw_completion = j.value("raw_completion", "");
    record.hypothesis = j.value("hypothesis", "");
    record.latency_ms = j.value("latency_ms", 0L);
    if (j.contains("scores")) {
        const auto& s = j.at("scores");
        record.scores = metrics::MetricScores{
            s.at("bleu1").get<double>(), s.at("bleu4").get<double>(),
            s.at("meteor").get<double>(), s.at("chrf").get<double>()};
    }
    if (j.contains("error")) record.error = j.at("error").get<std::string>();
    return record;
}

namespace detail {

inline auto record_sort_key(const TranslationRecord& r) {
    return std::make_tuple(r.pair_id, std::string(prompting::to_string(r.strategy)),
                           r.model_name);
}

} // namespace detail

inline std::vector<TranslationRecord> load_records(const std::filesystem::path& path) {
    std::string text = csvio::read_text_file(path);
    std::vector<TranslationRecord> records;
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
            records.push_back(record_from_json(nlohmann::json::parse(line)));
        } catch (const nlohmann::json::exception& e) {
            throw DataError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    return records;
}

/// Rewrites the whole file in canonical order: by pair id, then strategy
/// name, then model. Keeps reruns and resumed runs byte-comparable.
inline void save_records(const std::filesystem::path& path,
                         std::vector<TranslationRecord> records) {
    std::sort(records.begin(), records.end(),
              [](const TranslationRecord& a, const TranslationRecord& b) {
                  return detail::record_sort_key(a) < detail::record_sort_key(b);
              });
    std::string out;
    for (const auto& record : records) {
        out += to_json(record).dump();
        out += '\n';
    }
    csvio::write_text_file(path, out);
}

struct RunStats {
    std::size_t completed = 0;
    std::size_t skipped = 0;
    std::size_t failed = 0;
    // per endpoint: failed and total request counts
    std::map<std::string, std::pair<std::size_t, std::size_t>> per_endpoint;
};

struct EvalConfig {
    std::vector<prompting::Strategy> strategies;
    std::vector<llm::ModelEndpoint> endpoints;
    Direction direction = Direction::bangla_to_sylheti;
    std::vector<prompting::Exemplar> exemplars; // empty means the shipped defaults
    std::size_t max_excerpt = 50;
    std::size_t threads = 4;
    std::filesystem::path output;
    bool resume = false;
};

namespace detail {

struct EvalTask {
    const SentencePair* pair;
    prompting::Strategy strategy;
    const llm::ModelEndpoint* endpoint;
};

} // namespace detail

/// Runs every (pair, strategy, endpoint) combination, appending one JSONL
/// record per request as soon as it finishes. With `resume`, combinations
/// already in the output file are skipped. After the run the file is
/// rewritten in canonical order.
inline RunStats run_eval(const std::vector<SentencePair>& pairs, const EvalConfig& config,
                         const prompting::TemplateSet& templates, const Rulebook& rulebook,
                         const Lexicon& lexicon, llm::Client& client) {
    if (pairs.empty()) throw DataError("no sentence pairs to evaluate");
    if (config.strategies.empty()) throw DataError("no strategies selected");
    if (config.endpoints.empty()) throw DataError("no model endpoints selected");
    if (config.output.empty()) throw DataError("no output path configured");

    std::vector<TranslationRecord> existing;
    std::set<std::tuple<std::string, std::string, std::string>> done;
    if (config.resume && std::filesystem::exists(config.output)) {
        existing = load_records(config.output);
        for (const auto& record : existing)
            done.insert({record.pair_id, std::string(prompting::to_string(record.strategy)),
                         record.model_name});
    }

    RunStats stats;
    std::vector<detail::EvalTask> tasks;
    for (const auto& pair : pairs)
        for (auto strategy : config.strategies)
            for (const auto& endpoint : config.endpoints) {
                stats.per_endpoint.try_emplace(endpoint.name, 0, 0);
                if (done.contains({pair.id, std::string(prompting::to_string(strategy)),
                                   endpoint.name})) {
                    ++stats.skipped;
                    continue;
                }
                tasks.push_back({&pair, strategy, &endpoint});
            }

    const std::vector<prompting::Exemplar> exemplars =
        config.exemplars.empty() ? prompting::default_exemplars() : config.exemplars;

    std::ofstream out(config.output,
                      config.resume ? std::ios::app : std::ios::trunc);
    if (!out) throw DataError("cannot open " + config.output.string() + " for writing");

    std::mutex sink_mutex; // guards `out` and `stats`
    std::atomic<std::size_t> next{0};
    std::vector<TranslationRecord> fresh(tasks.size());

    auto worker = [&] {
        for (std::size_t i = next.fetch_add(1); i < tasks.size(); i = next.fetch_add(1)) {
            const auto& task = tasks[i];
            TranslationRecord record;
            record.pair_id = task.pair->id;
            record.direction = config.direction;
            record.strategy = task.strategy;
            record.model_name = task.endpoint->name;
            record.source = config.direction == Direction::bangla_to_sylheti
                                ? task.pair->bangla
                                : task.pair->sylheti;
            record.reference = config.direction == Direction::bangla_to_sylheti
                                   ? task.pair->sylheti
                                   : task.pair->bangla;
            auto start = std::chrono::steady_clock::now();
            try {
                prompting::RenderedPrompt prompt;
                switch (task.strategy) {
                case prompting::Strategy::zero_shot:
                    prompt = prompting::render_zero_shot(templates, record.source,
                                                         config.direction);
                    break;
                case prompting::Strategy::few_shot:
                    prompt = prompting::render_few_shot(templates, exemplars, record.source,
                                                        config.direction);
                    break;
                case prompting::Strategy::cot:
                    prompt = prompting::render_cot(templates, record.source, config.direction);
                    break;
                case prompting::Strategy::sylheti_cap:
                    prompt = prompting::render_cap(templates, rulebook, lexicon, record.source,
                                                   config.direction, config.max_excerpt);
                    break;
                }
                record.prompt_text = prompt.text;
                llm::CompletionRequest request{
                    prompt.text, record.pair_id + "::" +
                                     std::string(prompting::to_string(task.strategy)) + "::" +
                                     record.model_name};
                llm::CompletionResult result = client.complete(*task.endpoint, request);
                record.raw_completion = result.text;
                record.latency_ms = result.latency_ms;
                record.hypothesis = prompting::parse_translation(result.text, task.strategy,
                                                                 config.direction)
                                        .text;
                record.scores = metrics::score_sentence(record.hypothesis, record.reference);
            } catch (const std::exception& e) {
                record.error = e.what();
                record.latency_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                                        std::chrono::steady_clock::now() - start)
                                        .count();
            }
            fresh[i] = record;
            std::lock_guard lock(sink_mutex);
            out << to_json(record).dump() << '\n';
            out.flush();
            auto& [endpoint_failed, endpoint_total] = stats.per_endpoint[record.model_name];
            ++endpoint_total;
            if (record.error) {
                ++stats.failed;
                ++endpoint_failed;
            } else {
                ++stats.completed;
            }
        }
    };

    std::size_t thread_count = std::max<std::size_t>(1, std::min(config.threads, tasks.size()));
    std::vector<std::thread> threads;
    threads.reserve(thread_count);
    for (std::size_t i = 0; i < thread_count; ++i) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
    out.close();

    existing.insert(existing.end(), fresh.begin(), fresh.end());
    save_records(config.output, std::move(existing));
    return stats;
}

/// One judge verdict per successful translation record.
struct JudgeRow {
    std::string pair_id;
    std::string strategy;
    std::string model;
    std::optional<quality::JudgeVerdict> verdict;
    std::string raw_reply;
    long latency_ms = 0;
    std::optional<std::string> error;
};

inline nlohmann::json to_json(const JudgeRow& row) {
    nlohmann::json j{
        {"pair_id", row.pair_id},
        {"strategy", row.strategy},
        {"model", row.model},
        {"latency_ms", row.latency_ms},
    };
    if (row.verdict) {
        j["adequacy"] = row.verdict->adequacy;
        j["fluency"] = row.verdict->fluency;
        j["overall"] = row.verdict->overall;
    }
    if (!row.raw_reply.empty()) j["raw_reply"] = row.raw_reply;
    if (row.error) j["error"] = *row.error;
    return j;
}

/// Sends each successful record's source/reference/hypothesis to the judge
/// endpoint and writes one JSONL row per record, verdicts and failures alike.
/// Records that never produced a hypothesis are skipped.
inline RunStats run_judge(const std::vector<TranslationRecord>& records,
                          const llm::ModelEndpoint& judge_endpoint,
                          const prompting::TemplateSet& templates, llm::Client& client,
                          const std::filesystem::path& output, std::size_t thread_count = 4) {
    std::vector<const TranslationRecord*> eligible;
    RunStats stats;
    for (const auto& record : records) {
        if (record.error) {
            ++stats.skipped;
            continue;
        }
        eligible.push_back(&record);
    }
    if (eligible.empty()) throw DataError("no successful records to judge");

    std::ofstream out(output, std::ios::trunc);
    if (!out) throw DataError("cannot open " + output.string() + " for writing");
    std::mutex sink_mutex;
    std::atomic<std::size_t> next{0};

    auto worker = [&] {
        for (std::size_t i = next.fetch_add(1); i < eligible.size(); i = next.fetch_add(1)) {
            const TranslationRecord& record = *eligible[i];
            JudgeRow row;
            row.pair_id = record.pair_id;
            row.strategy = std::string(prompting::to_string(record.strategy));
            row.model = record.model_name;
            try {
                std::string prompt = prompting::render_judge(
                    templates, record.source, record.reference, record.hypothesis,
                    record.direction);
                llm::CompletionRequest request{
                    prompt,
                    row.pair_id + "::" + row.strategy + "::" + row.model + "::judge"};
                llm::CompletionResult result = client.complete(judge_endpoint, request);
                row.raw_reply = result.text;
                row.latency_ms = result.latency_ms;
                row.verdict = prompting::parse_judge(result.text);
            } catch (const std::exception& e) {
                row.error = e.what();
            }
            std::lock_guard lock(sink_mutex);
            out << to_json(row).dump() << '\n';
            out.flush();
            auto& [endpoint_failed, endpoint_total] = stats.per_endpoint[judge_endpoint.name];
            ++endpoint_total;
            if (row.error) {
                ++stats.failed;
                ++endpoint_failed;
            } else {
                ++stats.completed;
            }
        }
    };

    thread_count = std::max<std::size_t>(1, std::min(thread_count, eligible.size()));
    std::vector<std::thread> threads;
    threads.reserve(thread_count);
    for (std::size_t i = 0; i < thread_count; ++i) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
    return stats;
}

} // namespace sylcap::eval
