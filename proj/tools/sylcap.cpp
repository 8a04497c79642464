// Command-line frontend for the dialect translation toolkit.
//
// Exit codes: 0 success, 1 usage error, 2 data error, 3 provider error.
// Human-readable notes go to stderr; data goes to stdout or --out.

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <sylcap/sylcap.hpp>

#ifndef SYLCAP_DATA_DIR
#define SYLCAP_DATA_DIR "data"
#endif

namespace {

namespace fs = std::filesystem;
using namespace sylcap;

void emit(const std::string& text, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << text;
        if (!text.empty() && text.back() != '\n') std::cout << '\n';
    } else {
        csvio::write_text_file(out_path, text);
        std::cerr << "wrote " << out_path << "\n";
    }
}

std::vector<prompting::Strategy> parse_strategies(const std::string& csv) {
    std::vector<prompting::Strategy> out;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item == "all") {
            out.assign(prompting::kAllStrategies.begin(), prompting::kAllStrategies.end());
            continue;
        }
        if (!item.empty()) out.push_back(prompting::strategy_from_string(item));
    }
    if (out.empty()) throw DataError("no strategies given");
    return out;
}

std::vector<llm::ModelEndpoint> parse_models(const std::string& csv) {
    std::vector<llm::ModelEndpoint> out;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        if (item == "all") {
            out = llm::endpoint_presets();
            continue;
        }
        auto preset = llm::find_preset(item);
        if (!preset) throw DataError("unknown model preset \"" + item + "\"; known presets: "
                                     "openai, gemini, meta, xai, deepseek");
        out.push_back(*preset);
    }
    if (out.empty()) throw DataError("no models given");
    return out;
}

// Reverse translation inverts both the dictionary and the exact rules.
std::pair<Rulebook, Lexicon> load_transducer(const std::string& rules_path,
                                             const std::string& dict_path,
                                             Direction direction) {
    Rulebook rulebook = load_rulebook(rules_path);
    Lexicon lexicon = load_dictionary(dict_path);
    if (direction == Direction::sylheti_to_bangla) {
        Rulebook reversed;
        reversed.name = rulebook.name + "-reversed";
        reversed.version = rulebook.version;
        for (const auto& rule : rulebook.rules)
            if (auto inv = invert_exact_rule(rule)) reversed.rules.push_back(*inv);
        rulebook = std::move(reversed);
        lexicon = invert(lexicon);
    }
    return {std::move(rulebook), std::move(lexicon)};
}

std::vector<prompting::Exemplar> load_exemplars_or_default(const std::string& path) {
    if (fs::exists(path)) return prompting::load_exemplars(path);
    return prompting::default_exemplars();
}

std::vector<SentencePair> filter_split(std::vector<SentencePair> pairs,
                                       const std::string& split) {
    if (split == "all") return pairs;
    Split wanted;
    if (split == "train") wanted = Split::train;
    else if (split == "test") wanted = Split::test;
    else throw DataError("unknown split \"" + split + "\" (train, test or all)");
    std::erase_if(pairs, [&](const SentencePair& p) { return p.split != wanted; });
    if (pairs.empty()) throw DataError("no sentence pairs in split \"" + split + "\"");
    return pairs;
}

int exit_code_for_endpoint_failures(const eval::RunStats& stats) {
    for (const auto& [name, counts] : stats.per_endpoint) {
        auto [failed, total] = counts;
        if (total > 0 && failed == total) {
            std::cerr << "every request to endpoint \"" << name << "\" failed\n";
            return 3;
        }
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    const std::string data_dir = SYLCAP_DATA_DIR;
    const std::string default_rules = data_dir + "/rulebook.tsv";
    const std::string default_dict = data_dir + "/core_dictionary.csv";
    const std::string default_templates = data_dir + "/templates";
    const std::string default_exemplars_path = data_dir + "/exemplars.csv";

    CLI::App app{"Sylheti-Bangla dialect translation toolkit"};
    app.require_subcommand(1);

    std::string direction_name = "b2s";

    // dict-extract
    auto* dict_extract = app.add_subcommand(
        "dict-extract", "Build a word dictionary from a parallel corpus");
    std::string de_corpus, de_out;
    dict_extract->add_option("--corpus", de_corpus, "Parallel corpus file")->required();
    dict_extract->add_option("--out", de_out, "Dictionary CSV to write")->required();
    dict_extract->add_option("--direction", direction_name, "b2s or s2b");

    // dict-lookup
    auto* dict_lookup =
        app.add_subcommand("dict-lookup", "Look up one word in the dictionary");
    std::string dl_dict = default_dict, dl_word;
    dict_lookup->add_option("--dict", dl_dict, "Dictionary CSV");
    dict_lookup->add_option("--direction", direction_name, "b2s or s2b");
    dict_lookup->add_option("word", dl_word, "Word to look up")->required();

    // translate
    auto* translate = app.add_subcommand(
        "translate", "Rule-and-dictionary transduction of one or more sentences");
    std::string tr_rules = default_rules, tr_dict = default_dict, tr_sentence, tr_in, tr_out;
    translate->add_option("--rules", tr_rules, "Rulebook TSV");
    translate->add_option("--dict", tr_dict, "Dictionary CSV");
    translate->add_option("--direction", direction_name, "b2s or s2b");
    translate->add_option("--in", tr_in, "File with one sentence per line");
    translate->add_option("--out", tr_out, "Write output here instead of stdout");
    translate->add_option("sentence", tr_sentence, "Sentence to translate");

    // prompt-render
    auto* prompt_render =
        app.add_subcommand("prompt-render", "Render a translation prompt for a sentence");
    std::string pr_strategy, pr_templates = default_templates, pr_rules = default_rules;
    std::string pr_dict = default_dict, pr_exemplars = default_exemplars_path;
    std::string pr_sentence, pr_out;
    std::size_t pr_max_excerpt = 50;
    prompt_render->add_option("--strategy", pr_strategy,
                              "zero_shot, few_shot, cot or sylheti_cap")
        ->required();
    prompt_render->add_option("--templates", pr_templates, "Template directory");
    prompt_render->add_option("--rules", pr_rules, "Rulebook TSV");
    prompt_render->add_option("--dict", pr_dict, "Dictionary CSV");
    prompt_render->add_option("--exemplars", pr_exemplars, "Few-shot examples CSV");
    prompt_render->add_option("--direction", direction_name, "b2s or s2b");
    prompt_render->add_option("--max-excerpt", pr_max_excerpt,
                              "Cap on sentence-matched dictionary lines");
    prompt_render->add_option("--out", pr_out, "Write output here instead of stdout");
    prompt_render->add_option("sentence", pr_sentence, "Sentence to render for")->required();

    // eval-run
    auto* eval_run = app.add_subcommand(
        "eval-run", "Run strategies x models over a corpus and record completions");
    std::string er_corpus, er_out, er_strategies = "all", er_models, er_split = "all";
    std::string er_templates = default_templates, er_rules = default_rules,
                er_dict = default_dict, er_exemplars = default_exemplars_path;
    std::size_t er_threads = 4, er_concurrency = 4, er_max_excerpt = 50;
    bool er_mock = false, er_resume = false;
    eval_run->add_option("--corpus", er_corpus, "Parallel corpus file")->required();
    eval_run->add_option("--out", er_out, "JSONL record file to write")->required();
    eval_run->add_option("--strategies", er_strategies, "Comma list or \"all\"");
    eval_run->add_option("--models", er_models, "Comma list of presets or \"all\"");
    eval_run->add_flag("--mock", er_mock, "Use an offline mock that echoes references");
    eval_run->add_flag("--resume", er_resume, "Skip requests already in --out");
    eval_run->add_option("--split", er_split, "train, test or all");
    eval_run->add_option("--direction", direction_name, "b2s or s2b");
    eval_run->add_option("--threads", er_threads, "Worker threads");
    eval_run->add_option("--concurrency", er_concurrency, "Per-endpoint request ceiling");
    eval_run->add_option("--max-excerpt", er_max_excerpt,
                         "Cap on sentence-matched dictionary lines");
    eval_run->add_option("--templates", er_templates, "Template directory");
    eval_run->add_option("--rules", er_rules, "Rulebook TSV");
    eval_run->add_option("--dict", er_dict, "Dictionary CSV");
    eval_run->add_option("--exemplars", er_exemplars, "Few-shot examples CSV");

    // judge-run
    auto* judge_run = app.add_subcommand(
        "judge-run", "Grade recorded translations with a judge model");
    std::string jr_records, jr_out, jr_model, jr_mock_completion;
    std::string jr_templates = default_templates;
    std::size_t jr_threads = 4, jr_concurrency = 4;
    judge_run->add_option("--records", jr_records, "JSONL records from eval-run")->required();
    judge_run->add_option("--out", jr_out, "JSONL verdict file to write")->required();
    judge_run->add_option("--judge-model", jr_model, "Model preset acting as judge");
    judge_run->add_option("--mock-completion", jr_mock_completion,
                          "Offline judge: every call returns this completion text");
    judge_run->add_option("--templates", jr_templates, "Template directory");
    judge_run->add_option("--threads", jr_threads, "Worker threads");
    judge_run->add_option("--concurrency", jr_concurrency, "Per-endpoint request ceiling");

    // report / score
    auto add_report_options = [&](CLI::App* cmd, std::string& records, std::string& mqm,
                                  std::string& judge, std::string& prefs, std::string& halluc,
                                  std::string& format, std::string& out) {
        cmd->add_option("--records", records, "JSONL records from eval-run");
        cmd->add_option("--mqm", mqm, "MQM annotation JSONL");
        cmd->add_option("--judge", judge, "Judge verdict JSONL");
        cmd->add_option("--preferences", prefs, "Preference rating JSONL");
        cmd->add_option("--hallucinations", halluc, "Hallucination flag JSONL");
        cmd->add_option("--format", format, "md, csv or json")
            ->check(CLI::IsMember({"md", "csv", "json"}));
        cmd->add_option("--out", out, "Write output here instead of stdout");
    };
    auto* report_cmd =
        app.add_subcommand("report", "Aggregate records and annotations into a report");
    std::string rp_records, rp_mqm, rp_judge, rp_prefs, rp_halluc, rp_format = "md", rp_out;
    add_report_options(report_cmd, rp_records, rp_mqm, rp_judge, rp_prefs, rp_halluc, rp_format,
                       rp_out);

    auto* score_cmd = app.add_subcommand(
        "score", "Score one sentence pair, or alias of report for record files");
    std::string sc_records, sc_mqm, sc_judge, sc_prefs, sc_halluc, sc_format = "md", sc_out;
    std::string sc_hypothesis, sc_reference;
    add_report_options(score_cmd, sc_records, sc_mqm, sc_judge, sc_prefs, sc_halluc, sc_format,
                       sc_out);
    score_cmd->add_option("--hypothesis", sc_hypothesis, "Candidate sentence");
    score_cmd->add_option("--reference", sc_reference, "Reference sentence");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        Direction direction = direction_from_string(direction_name);

        if (dict_extract->parsed()) {
            auto pairs = load_corpus(de_corpus);
            Lexicon lexicon = extract_dictionary(pairs, direction);
            save_dictionary(lexicon, de_out);
            std::cerr << "extracted " << lexicon.entries.size() << " entries from "
                      << pairs.size() << " pairs -> " << de_out << "\n";
            return 0;
        }

        if (dict_lookup->parsed()) {
            Lexicon lexicon = load_dictionary(dl_dict);
            if (direction != lexicon.direction) lexicon = invert(lexicon);
            std::string word = normalize(dl_word);
            if (auto target = lookup(lexicon, word)) {
                std::cout << *target << "\n";
            } else {
                std::cerr << "no entry for \"" << word << "\"\n";
            }
            return 0;
        }

        if (translate->parsed()) {
            auto [rulebook, lexicon] = load_transducer(tr_rules, tr_dict, direction);
            std::vector<std::string> sentences;
            if (!tr_in.empty()) {
                std::string text = csvio::read_text_file(tr_in);
                std::stringstream ss(text);
                std::string line;
                while (std::getline(ss, line)) {
                    if (!line.empty() && line.back() == '\r') line.pop_back();
                    if (!line.empty()) sentences.push_back(line);
                }
            }
            if (!tr_sentence.empty()) sentences.push_back(tr_sentence);
            if (sentences.empty())
                throw DataError("nothing to translate; pass a sentence or --in FILE");
            std::string out;
            for (const auto& sentence : sentences) {
                out += apply(rulebook, lexicon, sentence);
                out += '\n';
            }
            emit(out, tr_out);
            return 0;
        }

        if (prompt_render->parsed()) {
            auto templates = prompting::TemplateSet::load(pr_templates);
            auto strategy = prompting::strategy_from_string(pr_strategy);
            prompting::RenderedPrompt prompt;
            switch (strategy) {
            case prompting::Strategy::zero_shot:
                prompt = prompting::render_zero_shot(templates, pr_sentence, direction);
                break;
            case prompting::Strategy::few_shot:
                prompt = prompting::render_few_shot(
                    templates, load_exemplars_or_default(pr_exemplars), pr_sentence, direction);
                break;
            case prompting::Strategy::cot:
                prompt = prompting::render_cot(templates, pr_sentence, direction);
                break;
            case prompting::Strategy::sylheti_cap: {
                Rulebook rulebook = load_rulebook(pr_rules);
                Lexicon lexicon = load_dictionary(pr_dict);
                prompt = prompting::render_cap(templates, rulebook, lexicon, pr_sentence,
                                               direction, pr_max_excerpt);
                std::cerr << "word mappings listed: " << prompt.lexicon_excerpt_size << "\n";
                break;
            }
            }
            emit(prompt.text, pr_out);
            return 0;
        }

        if (eval_run->parsed()) {
            auto pairs = filter_split(load_corpus(er_corpus), er_split);
            eval::EvalConfig config;
            config.strategies = parse_strategies(er_strategies);
            config.direction = direction;
            config.max_excerpt = er_max_excerpt;
            config.threads = er_threads;
            config.output = er_out;
            config.resume = er_resume;
            config.exemplars = load_exemplars_or_default(er_exemplars);
            if (er_mock) {
                auto mock = std::make_shared<llm::MockBehavior>();
                mock->mode = llm::MockBehavior::Mode::echo_reference;
                for (const auto& pair : pairs)
                    mock->references[pair.id] = direction == Direction::bangla_to_sylheti
                                                    ? pair.sylheti
                                                    : pair.bangla;
                llm::ModelEndpoint endpoint;
                endpoint.name = "mock";
                endpoint.model = "mock";
                endpoint.mock = std::move(mock);
                config.endpoints = {std::move(endpoint)};
            } else {
                if (er_models.empty())
                    throw DataError("pass --models or --mock");
                config.endpoints = parse_models(er_models);
            }
            auto templates = prompting::TemplateSet::load(er_templates);
            Rulebook rulebook = load_rulebook(er_rules);
            Lexicon lexicon = load_dictionary(er_dict);
            llm::Client client({}, static_cast<int>(er_concurrency));
            eval::RunStats stats =
                eval::run_eval(pairs, config, templates, rulebook, lexicon, client);
            std::cerr << "eval-run: " << (stats.completed + stats.failed) << " new requests, "
                      << stats.failed << " failures, " << stats.skipped
                      << " already complete -> " << er_out << "\n";
            return exit_code_for_endpoint_failures(stats);
        }

        if (judge_run->parsed()) {
            auto records = eval::load_records(jr_records);
            llm::ModelEndpoint endpoint;
            if (!jr_mock_completion.empty()) {
                auto mock = std::make_shared<llm::MockBehavior>();
                mock->mode = llm::MockBehavior::Mode::fixed;
                mock->fixed_completion = jr_mock_completion;
                endpoint.name = "judge-mock";
                endpoint.model = "judge-mock";
                endpoint.mock = std::move(mock);
            } else if (!jr_model.empty()) {
                auto preset = llm::find_preset(jr_model);
                if (!preset) throw DataError("unknown model preset \"" + jr_model + "\"");
                endpoint = *preset;
            } else {
                throw DataError("pass --judge-model or --mock-completion");
            }
            auto templates = prompting::TemplateSet::load(jr_templates);
            llm::Client client({}, static_cast<int>(jr_concurrency));
            eval::RunStats stats =
                eval::run_judge(records, endpoint, templates, client, jr_out, jr_threads);
            std::cerr << "judge-run: " << (stats.completed + stats.failed) << " verdicts ("
                      << stats.failed << " failures), " << stats.skipped
                      << " records skipped -> " << jr_out << "\n";
            return exit_code_for_endpoint_failures(stats);
        }

        if (report_cmd->parsed() || score_cmd->parsed()) {
            bool is_score = score_cmd->parsed();
            const std::string& records_path = is_score ? sc_records : rp_records;
            const std::string& mqm_path = is_score ? sc_mqm : rp_mqm;
            const std::string& judge_path = is_score ? sc_judge : rp_judge;
            const std::string& prefs_path = is_score ? sc_prefs : rp_prefs;
            const std::string& halluc_path = is_score ? sc_halluc : rp_halluc;
            const std::string& format = is_score ? sc_format : rp_format;
            const std::string& out_path = is_score ? sc_out : rp_out;

            if (is_score && (!sc_hypothesis.empty() || !sc_reference.empty())) {
                if (sc_hypothesis.empty() || sc_reference.empty())
                    throw DataError("--hypothesis and --reference go together");
                auto scores = metrics::score_sentence(sc_hypothesis, sc_reference);
                nlohmann::json j{{"bleu1", scores.bleu1},
                                 {"bleu4", scores.bleu4},
                                 {"meteor", scores.meteor},
                                 {"chrf", scores.chrf}};
                emit(j.dump(2) + "\n", out_path);
                return 0;
            }
            if (records_path.empty())
                throw DataError("pass --records (or --hypothesis/--reference for score)");
            auto records = eval::load_records(records_path);
            eval::QualityInputs inputs;
            if (!mqm_path.empty()) inputs.mqm = quality::load_mqm(mqm_path);
            if (!judge_path.empty()) inputs.judge = quality::load_judge_verdicts(judge_path);
            if (!prefs_path.empty()) inputs.preferences = quality::load_preferences(prefs_path);
            if (!halluc_path.empty())
                inputs.hallucinations = quality::load_hallucinations(halluc_path);
            eval::EvalReport report = eval::build_report(records, inputs);
            std::string rendered;
            if (format == "md") rendered = eval::render_report_markdown(report);
            else if (format == "csv") rendered = eval::render_report_csv(report);
            else rendered = eval::render_report_json(report);
            emit(rendered, out_path);
            return 0;
        }

        std::cerr << "no subcommand\n";
        return 1;
    } catch (const llm::CompletionError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
