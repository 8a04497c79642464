#include <catch2/catch_amalgamated.hpp>

#include <string>

#include <nlohmann/json.hpp>

#include "sylcap/evaluation.hpp"
#include "sylcap/quality.hpp"
#include "test_util.hpp"

using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinAbs;
using testutil::quoted;
using testutil::run_cli;
using testutil::TempDir;

namespace {

const std::string kCorpusCsv =
    "bangla,sylheti\n"
    "আমি যাই না,মুই যাই নি\n"
    "আমি করবো,মুই খরমু\n"
    "খুব ভালো,বাক্কা ভালা\n"
    "তোমার আব্বু কেমন আছে?,তোমার আব্বা বাবা আছইন নি?\n"
    "একটা,এখটা\n";

} // namespace

TEST_CASE("cli usage problems exit with code 1", "[cli]") {
    REQUIRE(run_cli("").exit_code == 1);
    REQUIRE(run_cli("frobnicate").exit_code == 1);
    REQUIRE(run_cli("translate --no-such-flag x").exit_code == 1);
    REQUIRE(run_cli("dict-extract").exit_code == 1); // missing required options
    REQUIRE(run_cli("report --records x --format xml").exit_code == 1);
    REQUIRE(run_cli("--help").exit_code == 0);
}

TEST_CASE("cli dictionary extraction and lookup round trip", "[cli]") {
    TempDir dir;
    auto corpus = dir.file("pairs.csv");
    testutil::spit(corpus, "bangla,sylheti\nআমি যাই না,মুই যাই নি\nআমি করবো,মুই খরমু\n");
    auto dict = dir.file("dict.csv");

    auto extract = run_cli("dict-extract --corpus " + quoted(corpus) + " --out " + quoted(dict));
    REQUIRE(extract.exit_code == 0);
    REQUIRE_THAT(extract.err, ContainsSubstring("extracted 3 entries from 2 pairs"));

    auto hit = run_cli("dict-lookup --dict " + quoted(dict) + " আমি");
    REQUIRE(hit.exit_code == 0);
    REQUIRE(hit.out == "মুই\n");

    auto reverse = run_cli("dict-lookup --dict " + quoted(dict) + " --direction s2b মুই");
    REQUIRE(reverse.exit_code == 0);
    REQUIRE(reverse.out == "আমি\n");

    auto miss = run_cli("dict-lookup --dict " + quoted(dict) + " ভাত");
    REQUIRE(miss.exit_code == 0);
    REQUIRE(miss.out.empty());
    REQUIRE_THAT(miss.err, ContainsSubstring("no entry for \"ভাত\""));

    auto bad_corpus = run_cli("dict-extract --corpus " + quoted(dir.file("absent.csv")) +
                              " --out " + quoted(dict));
    REQUIRE(bad_corpus.exit_code == 2);
}

TEST_CASE("cli lookup uses the shipped dictionary by default", "[cli]") {
    auto result = run_cli("dict-lookup টাকা");
    REQUIRE(result.exit_code == 0);
    REQUIRE(result.out == "ফইশা\n");
}

TEST_CASE("cli translate applies the transducer in both directions", "[cli]") {
    auto forward = run_cli("translate 'আমি যাই না'");
    REQUIRE(forward.exit_code == 0);
    REQUIRE(forward.out == "মুই যাই নি\n");

    auto reverse = run_cli("translate --direction s2b 'মুই যাই নি'");
    REQUIRE(reverse.exit_code == 0);
    REQUIRE(reverse.out == "আমি যাই না\n");

    SECTION("a line file and a positional sentence combine") {
        TempDir dir;
        auto lines = dir.file("lines.txt");
        testutil::spit(lines, "একটা\nখুব ভালো\n");
        auto out_path = dir.file("translated.txt");
        auto result = run_cli("translate --in " + quoted(lines) + " --out " +
                              quoted(out_path) + " 'টাকা'");
        REQUIRE(result.exit_code == 0);
        REQUIRE_THAT(result.err, ContainsSubstring("wrote"));
        REQUIRE(testutil::slurp(out_path) == "এখটা\nবাক্কা ভালা\nফইশা\n");
    }

    SECTION("nothing to translate is a data error") {
        REQUIRE(run_cli("translate").exit_code == 2);
    }
}

TEST_CASE("cli prompt rendering matches the library byte for byte", "[cli]") {
    auto zero = run_cli("prompt-render --strategy zero_shot 'আমি যাই না'");
    REQUIRE(zero.exit_code == 0);
    REQUIRE(zero.out == testutil::slurp(testutil::fixture_dir() / "golden_zero_shot.txt"));

    auto cap = run_cli("prompt-render --strategy sylheti_cap 'আমি যাই না'");
    REQUIRE(cap.exit_code == 0);
    REQUIRE(cap.out == testutil::slurp(testutil::fixture_dir() / "golden_cap.txt"));
    REQUIRE_THAT(cap.err, ContainsSubstring("word mappings listed: 13"));

    REQUIRE(run_cli("prompt-render --strategy fancy 'আমি যাই না'").exit_code == 2);
}

TEST_CASE("cli score gives sentence metrics as json", "[cli]") {
    auto result = run_cli("score --hypothesis 'মুই যাই নি' --reference 'মুই যাই নি'");
    REQUIRE(result.exit_code == 0);
    nlohmann::json j = nlohmann::json::parse(result.out);
    REQUIRE_THAT(j.at("bleu1").get<double>(), WithinAbs(1.0, 1e-12));
    REQUIRE_THAT(j.at("chrf").get<double>(), WithinAbs(100.0, 1e-12));

    REQUIRE(run_cli("score --hypothesis 'মুই'").exit_code == 2);
    REQUIRE(run_cli("score").exit_code == 2); // neither sentences nor records
}

TEST_CASE("cli mock evaluation, judging and reporting chain together", "[cli]") {
    TempDir dir;
    auto corpus = dir.file("corpus.csv");
    testutil::spit(corpus, kCorpusCsv);
    auto records_path = dir.file("records.jsonl");

    auto eval_args = "eval-run --corpus " + quoted(corpus) + " --out " +
                     quoted(records_path) + " --mock";
    auto first = run_cli(eval_args);
    REQUIRE(first.exit_code == 0);
    REQUIRE_THAT(first.err,
                 ContainsSubstring("eval-run: 20 new requests, 0 failures, 0 already complete"));

    auto records = sylcap::eval::load_records(records_path);
    REQUIRE(records.size() == 20);
    for (const auto& record : records) {
        REQUIRE_FALSE(record.error.has_value());
        REQUIRE_THAT(record.scores->bleu1, WithinAbs(1.0, 1e-12));
        REQUIRE_THAT(record.scores->chrf, WithinAbs(100.0, 1e-12));
    }

    std::string bytes_before = testutil::slurp(records_path);
    auto resumed = run_cli(eval_args + " --resume");
    REQUIRE(resumed.exit_code == 0);
    REQUIRE_THAT(resumed.err,
                 ContainsSubstring("eval-run: 0 new requests, 0 failures, 20 already complete"));
    REQUIRE(testutil::slurp(records_path) == bytes_before);

    auto verdicts_path = dir.file("verdicts.jsonl");
    auto judged = run_cli("judge-run --records " + quoted(records_path) + " --out " +
                          quoted(verdicts_path) +
                          " --mock-completion '{\"adequacy\": 80, \"fluency\": 70, "
                          "\"overall\": 75}'");
    REQUIRE(judged.exit_code == 0);
    REQUIRE_THAT(judged.err,
                 ContainsSubstring("judge-run: 20 verdicts (0 failures), 0 records skipped"));
    auto verdicts = sylcap::quality::load_judge_verdicts(verdicts_path);
    REQUIRE(verdicts.size() == 20);
    REQUIRE_THAT(verdicts.front().second.overall, WithinAbs(75.0, 1e-12));

    auto md = run_cli("report --records " + quoted(records_path) + " --judge " +
                      quoted(verdicts_path));
    REQUIRE(md.exit_code == 0);
    REQUIRE_THAT(md.out, ContainsSubstring("# Translation Evaluation Report"));
    REQUIRE_THAT(md.out, ContainsSubstring("## Judge means"));
    REQUIRE_THAT(md.out, ContainsSubstring("| mock |"));

    SECTION("report output is byte-identical across runs in every format") {
        for (const std::string format : {"md", "csv", "json"}) {
            INFO(format);
            auto args = "report --records " + quoted(records_path) + " --format " + format;
            auto once = run_cli(args);
            auto twice = run_cli(args);
            REQUIRE(once.exit_code == 0);
            REQUIRE_FALSE(once.out.empty());
            REQUIRE(once.out == twice.out);
        }
    }

    SECTION("json report parses and carries the format tag") {
        auto out_path = dir.file("report.json");
        auto result = run_cli("report --records " + quoted(records_path) +
                              " --format json --out " + quoted(out_path));
        REQUIRE(result.exit_code == 0);
        nlohmann::json j = nlohmann::json::parse(testutil::slurp(out_path));
        REQUIRE(j.at("format") == "sylcap-report/1");
        REQUIRE(j.at("requests").at("succeeded") == 20);
    }

    SECTION("score doubles as report when given record files") {
        auto result = run_cli("score --records " + quoted(records_path) + " --format csv");
        REQUIRE(result.exit_code == 0);
        REQUIRE_THAT(result.out, ContainsSubstring("model,strategy,metric,value"));
        REQUIRE_THAT(result.out, ContainsSubstring("mock,sylheti_cap,bleu1,1"));
    }
}

TEST_CASE("cli eval-run validates its inputs", "[cli]") {
    TempDir dir;
    auto corpus = dir.file("corpus.csv");
    testutil::spit(corpus, kCorpusCsv);
    auto out = quoted(dir.file("never.jsonl"));
    auto base = "eval-run --corpus " + quoted(corpus) + " --out " + out;

    REQUIRE(run_cli(base).exit_code == 2); // neither --models nor --mock
    auto unknown = run_cli(base + " --models claude");
    REQUIRE(unknown.exit_code == 2);
    REQUIRE_THAT(unknown.err, ContainsSubstring("unknown model preset"));
    REQUIRE(run_cli(base + " --mock --split dev").exit_code == 2);
    REQUIRE(run_cli(base + " --mock --split train").exit_code == 2); // corpus is all test
}

TEST_CASE("cli surfaces an endpoint whose every request fails as exit 3", "[cli]") {
    TempDir dir;
    auto corpus = dir.file("corpus.csv");
    testutil::spit(corpus, kCorpusCsv);

    SECTION("authentication failures on a real preset") {
        auto result = run_cli("eval-run --corpus " + quoted(corpus) + " --out " +
                                  quoted(dir.file("auth.jsonl")) +
                                  " --models openai --strategies zero_shot",
                              "OPENAI_API_KEY=");
        REQUIRE(result.exit_code == 3);
        REQUIRE_THAT(result.err, ContainsSubstring("every request to endpoint \"openai\" failed"));
    }

    SECTION("a judge that never produces parseable verdicts") {
        auto records_path = dir.file("records.jsonl");
        REQUIRE(run_cli("eval-run --corpus " + quoted(corpus) + " --out " +
                        quoted(records_path) + " --mock --strategies zero_shot")
                    .exit_code == 0);
        auto result = run_cli("judge-run --records " + quoted(records_path) + " --out " +
                              quoted(dir.file("verdicts.jsonl")) +
                              " --mock-completion 'not a verdict'");
        REQUIRE(result.exit_code == 3);
        REQUIRE_THAT(result.err,
                     ContainsSubstring("every request to endpoint \"judge-mock\" failed"));
    }

    SECTION("judge-run requires a judge") {
        auto records_path = dir.file("records.jsonl");
        testutil::spit(records_path, "");
        REQUIRE(run_cli("judge-run --records " + quoted(records_path) + " --out " +
                        quoted(dir.file("v.jsonl")))
                    .exit_code == 2);
    }
}
