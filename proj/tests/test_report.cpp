#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <string>
#include <vector>

#include "sylcap/report.hpp"

using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinAbs;
using namespace sylcap;

namespace {

eval::TranslationRecord make_record(const std::string& pair_id, prompting::Strategy strategy,
                                    const std::string& model, const std::string& reference,
                                    const std::string& hypothesis) {
    eval::TranslationRecord record;
    record.pair_id = pair_id;
    record.strategy = strategy;
    record.model_name = model;
    record.source = reference; // unused by aggregation; any text will do
    record.reference = reference;
    record.hypothesis = hypothesis;
    record.scores = metrics::score_sentence(hypothesis, reference);
    return record;
}

// Two models, two strategies. m1 zero_shot has one perfect and one disjoint
// record, m1 sylheti_cap has two perfect records, m2 zero_shot failed outright.
std::vector<eval::TranslationRecord> fixture_records() {
    std::vector<eval::TranslationRecord> records;
    records.push_back(make_record("p1", prompting::Strategy::zero_shot, "m1",
                                  "তুমার আব্বা ভালা আছইন", "তুমার আব্বা ভালা আছইন"));
    records.push_back(make_record("p2", prompting::Strategy::zero_shot, "m1",
                                  "অসত্য", "ভুল"));
    records.push_back(make_record("p1", prompting::Strategy::sylheti_cap, "m1",
                                  "তুমার আব্বা ভালা আছইন", "তুমার আব্বা ভালা আছইন"));
    records.push_back(make_record("p2", prompting::Strategy::sylheti_cap, "m1",
                                  "মুই বাক্কা ভালা আছি", "মুই বাক্কা ভালা আছি"));
    eval::TranslationRecord failed;
    failed.pair_id = "p1";
    failed.strategy = prompting::Strategy::zero_shot;
    failed.model_name = "m2";
    failed.error = "request p1::zero_shot::m2 failed after 5 attempts";
    records.push_back(failed);
    return records;
}

eval::QualityInputs fixture_quality() {
    eval::QualityInputs inputs;
    quality::MqmFile mqm;
    mqm.annotations.push_back(
        {"p1::sylheti_cap::m1", quality::MqmCategory::mistranslation,
         quality::MqmSeverity::minor, ""});
    mqm.annotations.push_back(
        {"p2::sylheti_cap::m1", quality::MqmCategory::omission,
         quality::MqmSeverity::major, ""});
    inputs.mqm = std::move(mqm);
    inputs.judge.emplace_back(quality::SegmentKey{"p1", "sylheti_cap", "m1"},
                              quality::JudgeVerdict{80, 80, 80});
    inputs.judge.emplace_back(quality::SegmentKey{"p2", "sylheti_cap", "m1"},
                              quality::JudgeVerdict{90, 90, 90});
    inputs.preferences = {
        {"p1::sylheti_cap::m1", quality::Rating::good, "a1"},
        {"p1::sylheti_cap::m1", quality::Rating::good, "a2"},
        {"p1::sylheti_cap::m1", quality::Rating::poor, "a3"},
        {"p2::sylheti_cap::m1", quality::Rating::poor, "a1"},
    };
    inputs.hallucinations = {
        {"p1::sylheti_cap::m1", true, "a1"},
        {"p2::sylheti_cap::m1", false, "a1"},
        {"p3::sylheti_cap::m1", false, "a1"},
        {"p4::sylheti_cap::m1", false, "a1"},
    };
    return inputs;
}

const quality::GroupKey kCap{"sylheti_cap", "m1"};

} // namespace

TEST_CASE("report aggregation computes per-group means and counts") {
    eval::EvalReport report = eval::build_report(fixture_records());

    REQUIRE(report.direction == "bangla_to_sylheti");
    REQUIRE(report.pair_count == 2);
    REQUIRE(report.record_count == 5);
    REQUIRE(report.succeeded == 4);
    REQUIRE(report.failed == 1);
    REQUIRE(report.strategies == std::vector<std::string>{"zero_shot", "sylheti_cap"});
    REQUIRE(report.models == std::vector<std::string>{"m1", "m2"});
    REQUIRE(report.cells.size() == 3);

    const eval::ReportCell& zero = report.cells.at({"zero_shot", "m1"});
    REQUIRE(zero.total == 2);
    REQUIRE(zero.succeeded == 2);
    REQUIRE(zero.failed == 0);
    REQUIRE_THAT(zero.means.bleu1, WithinAbs(0.5, 1e-12));
    REQUIRE_THAT(zero.means.bleu4, WithinAbs(0.5, 1e-12));
    REQUIRE_THAT(zero.means.meteor, WithinAbs(0.49609375, 1e-12));
    REQUIRE_THAT(zero.means.chrf, WithinAbs(50.0, 1e-12));
    // pooled counts: unigrams 4/5, higher orders 1/1 each, brevity penalty 1
    REQUIRE_THAT(zero.corpus_bleu4, WithinAbs(std::pow(0.8, 0.25), 1e-12));

    const eval::ReportCell& cap = report.cells.at(kCap);
    REQUIRE(cap.succeeded == 2);
    REQUIRE_THAT(cap.means.bleu1, WithinAbs(1.0, 1e-12));
    REQUIRE_THAT(cap.means.meteor, WithinAbs(0.9921875, 1e-12));
    REQUIRE_THAT(cap.means.chrf, WithinAbs(100.0, 1e-12));
    REQUIRE_THAT(cap.corpus_bleu4, WithinAbs(1.0, 1e-12));

    const eval::ReportCell& broken = report.cells.at({"zero_shot", "m2"});
    REQUIRE(broken.total == 1);
    REQUIRE(broken.succeeded == 0);
    REQUIRE(broken.failed == 1);

    SECTION("best markers point at the winning group") {
        for (const char* metric : {"bleu1", "bleu4", "meteor", "chrf", "corpus_bleu4"}) {
            INFO(metric);
            REQUIRE(report.best.at(metric) == std::vector<quality::GroupKey>{kCap});
        }
        REQUIRE_FALSE(report.best.contains("mqm"));
        REQUIRE_FALSE(report.best.contains("judge_overall"));
    }

    SECTION("the all-failed group is called out in the notes") {
        bool found = false;
        for (const auto& note : report.notes)
            found = found || note == "zero_shot/m2: all 1 requests failed";
        REQUIRE(found);
    }
}

TEST_CASE("quality inputs attach to their strategy and model group") {
    eval::EvalReport report = eval::build_report(fixture_records(), fixture_quality());
    const eval::ReportCell& cap = report.cells.at(kCap);

    // one minor and one major error over the group's two completed segments
    REQUIRE(cap.mqm.has_value());
    REQUIRE_THAT(*cap.mqm, WithinAbs(3.0, 1e-12));

    REQUIRE(cap.judge.has_value());
    REQUIRE(cap.judge_count == 2);
    REQUIRE_THAT(cap.judge->adequacy, WithinAbs(85.0, 1e-12));
    REQUIRE_THAT(cap.judge->fluency, WithinAbs(85.0, 1e-12));
    REQUIRE_THAT(cap.judge->overall, WithinAbs(85.0, 1e-12));

    REQUIRE(cap.preference.has_value());
    REQUIRE_THAT(cap.preference->good, WithinAbs(0.5, 1e-12));
    REQUIRE_THAT(cap.preference->fair, WithinAbs(0.0, 1e-12));
    REQUIRE_THAT(cap.preference->poor, WithinAbs(0.5, 1e-12));

    REQUIRE(cap.hallucination_rate.has_value());
    REQUIRE_THAT(*cap.hallucination_rate, WithinAbs(0.25, 1e-12));

    const eval::ReportCell& zero = report.cells.at({"zero_shot", "m1"});
    REQUIRE_FALSE(zero.mqm.has_value());
    REQUIRE_FALSE(zero.judge.has_value());

    REQUIRE(report.best.at("judge_overall") == std::vector<quality::GroupKey>{kCap});
    REQUIRE(report.best.at("mqm") == std::vector<quality::GroupKey>{kCap});
    REQUIRE(report.best.at("hallucination_rate") == std::vector<quality::GroupKey>{kCap});
}

TEST_CASE("report aggregation rejects inconsistent inputs") {
    SECTION("no records at all") {
        REQUIRE_THROWS_WITH(eval::build_report({}),
                            ContainsSubstring("no translation records"));
    }
    SECTION("every request failed") {
        eval::TranslationRecord failed;
        failed.pair_id = "p1";
        failed.model_name = "m1";
        failed.error = "boom";
        REQUIRE_THROWS_WITH(eval::build_report({failed}),
                            ContainsSubstring("every request failed; nothing to report"));
    }
    SECTION("judge verdict for a group with no records") {
        eval::QualityInputs inputs;
        inputs.judge.emplace_back(quality::SegmentKey{"p1", "cot", "m1"},
                                  quality::JudgeVerdict{50, 50, 50});
        REQUIRE_THROWS_WITH(
            eval::build_report(fixture_records(), inputs),
            ContainsSubstring(
                "judge verdict references cot/m1 but no translation records exist"));
    }
    SECTION("MQM for a group whose every request failed") {
        eval::QualityInputs inputs;
        quality::MqmFile mqm;
        mqm.annotations.push_back({"p1::zero_shot::m2", quality::MqmCategory::other,
                                   quality::MqmSeverity::minor, ""});
        inputs.mqm = std::move(mqm);
        REQUIRE_THROWS_WITH(eval::build_report(fixture_records(), inputs),
                            ContainsSubstring("no successful translations"));
    }
    SECTION("hallucination flags for an unknown model") {
        eval::QualityInputs inputs;
        inputs.hallucinations = {{"p1::zero_shot::m9", true, "a1"}};
        REQUIRE_THROWS_WITH(eval::build_report(fixture_records(), inputs),
                            ContainsSubstring("hallucination flag references zero_shot/m9"));
    }
    SECTION("mixed directions only warrant a note") {
        auto records = fixture_records();
        records[1].direction = Direction::sylheti_to_bangla;
        eval::EvalReport report = eval::build_report(records);
        bool found = false;
        for (const auto& note : report.notes)
            found = found || note.find("mix translation directions") != std::string::npos;
        REQUIRE(found);
    }
}

TEST_CASE("exact metric ties share the best marking") {
    std::vector<eval::TranslationRecord> records;
    records.push_back(make_record("p1", prompting::Strategy::zero_shot, "m1",
                                  "মুই যাই নি", "মুই যাই নি"));
    records.push_back(make_record("p1", prompting::Strategy::zero_shot, "m2",
                                  "মুই যাই নি", "মুই যাই নি"));
    eval::EvalReport report = eval::build_report(records);
    REQUIRE(report.best.at("bleu1").size() == 2);
    REQUIRE(report.best.at("chrf") ==
            std::vector<quality::GroupKey>{{"zero_shot", "m1"}, {"zero_shot", "m2"}});

    std::string md = eval::render_report_markdown(report);
    REQUIRE_THAT(md, ContainsSubstring("| m1 | **1.0000**"));
    REQUIRE_THAT(md, ContainsSubstring("| m2 | **1.0000**"));
}

TEST_CASE("markdown output carries every section and bolds the winners") {
    eval::EvalReport report = eval::build_report(fixture_records(), fixture_quality());
    std::string md = eval::render_report_markdown(report);

    for (const char* heading :
         {"# Translation Evaluation Report", "## Sentence-level means", "## BLEU-4",
          "## Requests", "## Judge means", "## MQM (lower is better)",
          "## Preference distribution", "## Hallucinations (lower is better)", "## Notes"}) {
        INFO(heading);
        REQUIRE_THAT(md, ContainsSubstring(heading));
    }

    REQUIRE_THAT(md, ContainsSubstring("- Format: sylcap-report/1"));
    REQUIRE_THAT(md, ContainsSubstring("- Direction: bangla_to_sylheti"));
    REQUIRE_THAT(md, ContainsSubstring("- Requests: 5 total, 4 succeeded, 1 failed"));

    REQUIRE_THAT(md, ContainsSubstring("0.5000"));     // zero_shot bleu1 mean, plain
    REQUIRE_THAT(md, ContainsSubstring("**1.0000**")); // winning bleu1 mean, bold
    REQUIRE_THAT(md, ContainsSubstring("0.4961"));     // meteor rounds to four decimals
    REQUIRE_THAT(md, ContainsSubstring("**100.00**"));
    REQUIRE_THAT(md, ContainsSubstring("**85.00 / 85.00 / 85.00**"));
    REQUIRE_THAT(md, ContainsSubstring("**3.00**"));   // MQM, best because it is alone
    REQUIRE_THAT(md, ContainsSubstring("0.50 / 0.00 / 0.50"));
    REQUIRE_THAT(md, ContainsSubstring("**0.25**"));
    REQUIRE_THAT(md, ContainsSubstring("2/2"));
    REQUIRE_THAT(md, ContainsSubstring("0/1"));
    REQUIRE_THAT(md, ContainsSubstring("—")); // absent sylheti_cap/m2 cell
    REQUIRE_THAT(md, ContainsSubstring("exact-match variant"));

    SECTION("rendering is deterministic across independent builds") {
        eval::EvalReport again = eval::build_report(fixture_records(), fixture_quality());
        REQUIRE(eval::render_report_markdown(again) == md);
        REQUIRE(eval::render_report_csv(again) == eval::render_report_csv(report));
        REQUIRE(eval::render_report_json(again) == eval::render_report_json(report));
    }
}

TEST_CASE("csv output is one metric per row with shortest numbers") {
    eval::EvalReport report = eval::build_report(fixture_records(), fixture_quality());
    std::string csv = eval::render_report_csv(report);

    REQUIRE_THAT(csv, ContainsSubstring("# format: sylcap-report/1\n"));
    REQUIRE_THAT(csv, ContainsSubstring("# requests: total=5 succeeded=4 failed=1\n"));
    REQUIRE_THAT(csv, ContainsSubstring("model,strategy,metric,value\n"));
    REQUIRE_THAT(csv, ContainsSubstring("m1,zero_shot,bleu1,0.5\n"));
    REQUIRE_THAT(csv, ContainsSubstring("m1,zero_shot,meteor,0.49609375\n"));
    REQUIRE_THAT(csv, ContainsSubstring("m1,sylheti_cap,chrf,100\n"));
    REQUIRE_THAT(csv, ContainsSubstring("m1,sylheti_cap,mqm,3\n"));
    REQUIRE_THAT(csv, ContainsSubstring("m1,sylheti_cap,judge_overall,85\n"));
    REQUIRE_THAT(csv, ContainsSubstring("m1,sylheti_cap,judge_count,2\n"));
    REQUIRE_THAT(csv, ContainsSubstring("m1,sylheti_cap,hallucination_rate,0.25\n"));
    REQUIRE_THAT(csv, ContainsSubstring("m1,sylheti_cap,preference_good,0.5\n"));
    REQUIRE_THAT(csv, ContainsSubstring("m2,zero_shot,total,1\n"));
    REQUIRE_THAT(csv, ContainsSubstring("m2,zero_shot,failed,1\n"));
    // a group with no successes reports request counts but no scores
    REQUIRE(csv.find("m2,zero_shot,bleu1") == std::string::npos);
}

TEST_CASE("json output mirrors the full report structure") {
    eval::EvalReport report = eval::build_report(fixture_records(), fixture_quality());
    std::string text = eval::render_report_json(report);
    REQUIRE(text.back() == '\n');

    nlohmann::json j = nlohmann::json::parse(text);
    REQUIRE(j.at("format") == "sylcap-report/1");
    REQUIRE(j.at("direction") == "bangla_to_sylheti");
    REQUIRE(j.at("pairs") == 2);
    REQUIRE(j.at("requests").at("total") == 5);
    REQUIRE(j.at("requests").at("succeeded") == 4);
    REQUIRE(j.at("strategies") == nlohmann::json::array({"zero_shot", "sylheti_cap"}));
    REQUIRE(j.at("cells").size() == 3);

    const nlohmann::json* cap = nullptr;
    for (const auto& cell : j.at("cells"))
        if (cell.at("strategy") == "sylheti_cap" && cell.at("model") == "m1") cap = &cell;
    REQUIRE(cap != nullptr);
    REQUIRE_THAT(cap->at("bleu1").get<double>(), WithinAbs(1.0, 1e-12));
    REQUIRE_THAT(cap->at("mqm").get<double>(), WithinAbs(3.0, 1e-12));
    REQUIRE(cap->at("judge").at("count") == 2);
    REQUIRE_THAT(cap->at("judge").at("overall").get<double>(), WithinAbs(85.0, 1e-12));
    REQUIRE_THAT(cap->at("hallucination_rate").get<double>(), WithinAbs(0.25, 1e-12));

    const nlohmann::json* broken = nullptr;
    for (const auto& cell : j.at("cells"))
        if (cell.at("model") == "m2") broken = &cell;
    REQUIRE(broken != nullptr);
    REQUIRE_FALSE(broken->contains("bleu1"));

    REQUIRE(j.at("best").at("bleu1") ==
            nlohmann::json::array({nlohmann::json::array({"sylheti_cap", "m1"})}));
    REQUIRE_FALSE(j.at("notes").empty());
}
