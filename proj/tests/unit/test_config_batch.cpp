#include <gtest/gtest.h>

#include <fstream>

#include "cfdx/batch.hpp"
#include "cfdx/config.hpp"
#include "cfdx/scripted_backend.hpp"
#include "support/error_kind.hpp"
#include "support/fixtures.hpp"

namespace {

namespace fs = std::filesystem;
using cfdx::ErrorKind;
using nlohmann::json;
using support::kind_of;

void write_lines(const fs::path& p, const std::vector<std::string>& lines) {
  std::ofstream out(p);
  for (const auto& l : lines) out << l << '\n';
}

TEST(Config, DefaultsValidateAndDigestTracksThresholds) {
  cfdx::RunConfig c;
  EXPECT_EQ(kind_of([&] { c.validate(); }), ErrorKind::InvalidConfig);  // no backend configured
  c.script = fixtures::dir() / "script.json";
  EXPECT_NO_THROW(c.validate());
  EXPECT_EQ(c.seeds, (std::vector<std::int64_t>{101, 202, 303}));
  const auto base = cfdx::config_digest(c);
  EXPECT_EQ(base, cfdx::config_digest(c));
  auto tighter = c;
  tighter.sip_threshold = 0.9;
  EXPECT_NE(cfdx::config_digest(tighter), base);
  auto edit = c;
  edit.edit_sim_threshold = 0.75;
  EXPECT_NE(cfdx::config_digest(edit), base);
}

TEST(Config, JsonOverlayAndValidation) {
  const auto c = cfdx::apply_config_json({}, json{{"sip_threshold", 0.9},
                                                 {"script", "s.json"},
                                                 {"score_weights", {{"w_sig", 0.6}, {"w_shift", 1.0}, {"w_pre", 0.4}}},
                                                 {"seeds", {1, 2}},
                                                 {"mode", "zero-shot-cot"}});
  EXPECT_DOUBLE_EQ(c.sip_threshold, 0.9);
  EXPECT_DOUBLE_EQ(c.score_weights.w_pre, 0.4);
  EXPECT_EQ(c.seeds.size(), 2u);
  EXPECT_EQ(c.mode, cfdx::RunMode::ZeroShotCot);
  EXPECT_EQ(cfdx::apply_config_json({}, cfdx::config_to_json(c)).sip_threshold, 0.9);
  EXPECT_EQ(cfdx::config_digest(cfdx::apply_config_json({}, cfdx::config_to_json(c))), cfdx::config_digest(c));

  EXPECT_EQ(kind_of([] { (void)cfdx::apply_config_json({}, json{{"sip_treshold", 0.9}}); }), ErrorKind::InvalidConfig);
  EXPECT_NO_THROW(c.validate());
  auto bad = c;
  bad.max_rounds = 0;
  EXPECT_EQ(kind_of([&] { bad.validate(); }), ErrorKind::InvalidConfig);
  bad = c;
  bad.consensus_threshold = 1.5;
  EXPECT_EQ(kind_of([&] { bad.validate(); }), ErrorKind::InvalidConfig);
  bad = c;
  bad.score_weights.w_pre = 0.5;
  EXPECT_EQ(kind_of([&] { bad.validate(); }), ErrorKind::InvalidConfig);
  EXPECT_EQ(kind_of([] { (void)cfdx::parse_run_mode("three-shot"); }), ErrorKind::InvalidConfig);
}

TEST(Config, PresetsLoad) {
  const auto presets = cfdx::load_presets(fixtures::assets() / "presets.json");
  EXPECT_TRUE(presets.contains("default"));
  EXPECT_TRUE(presets.contains("eval_judge"));
  EXPECT_DOUBLE_EQ(presets.at("eval_judge").temperature, 0.0);
}

TEST(Ingest, FixtureCases) {
  const auto r = cfdx::ingest_cases(fixtures::dir() / "cases.jsonl");
  EXPECT_EQ(r.cases.size(), 10u);
  EXPECT_TRUE(r.errors.empty());
  EXPECT_EQ(r.cases.front().id, "c01");
  EXPECT_TRUE(r.cases.front().ground_truth.has_value());
}

TEST(Ingest, ErrorsAreReportedPerLine) {
  const auto dir = fixtures::scratch("ingest");
  write_lines(dir / "cases.jsonl", {
                                       R"({"id": "a", "case_presentation": "Fever.", "final_diagnosis": "Flu"})",
                                       R"(not json)",
                                       R"({"id": "b", "case_presentation": "  "})",
                                       R"({"id": 7, "case_presentation": "Cough.", "metadata": {"age": 40}})",
                                       R"({"id": "a", "case_presentation": "Again."})",
                                       R"({"case_presentation": "No id."})",
                                   });
  const auto r = cfdx::ingest_cases(dir / "cases.jsonl");
  ASSERT_EQ(r.cases.size(), 2u);
  EXPECT_EQ(r.cases[1].id, "7");
  EXPECT_FALSE(r.cases[1].ground_truth);
  EXPECT_EQ(r.cases[1].metadata.at("age"), "40");
  ASSERT_EQ(r.errors.size(), 4u);
  EXPECT_EQ(r.errors[0].line, 2u);
  EXPECT_EQ(r.errors[2].message, "duplicate id 'a' on lines 1 and 5");
  EXPECT_EQ(r.warnings.size(), 1u);

  write_lines(dir / "bad.jsonl", {"{}", "[]"});
  EXPECT_EQ(kind_of([&] { (void)cfdx::ingest_cases(dir / "bad.jsonl"); }), ErrorKind::NoValidRecords);
  EXPECT_EQ(kind_of([&] { (void)cfdx::ingest_cases(dir / "absent.jsonl"); }), ErrorKind::FileNotFound);
}

TEST(Ingest, SelectKeepsListOrder) {
  const auto cases = cfdx::ingest_cases(fixtures::dir() / "cases.jsonl").cases;
  const auto picked = cfdx::select_cases(cases, {"c05", "c01"});
  ASSERT_EQ(picked.size(), 2u);
  EXPECT_EQ(picked[0].id, "c05");
  EXPECT_EQ(kind_of([&] { (void)cfdx::select_cases(cases, {"zz"}); }), ErrorKind::InvalidArgument);
}

TEST(Summarize, ReplacesPresentationOrPassesThrough) {
  auto backend = cfdx::ScriptedBackend::load(fixtures::dir() / "script.json");
  cfdx::LlmClient client(backend, "m", cfdx::DecodingPreset{});
  const auto ok = cfdx::preprocess_summarize(fixtures::fixture_case("c01"), client, fixtures::templates());
  EXPECT_TRUE(ok.summarized);
  EXPECT_NE(ok.case_record.presentation, fixtures::fixture_case("c01").presentation);
  EXPECT_EQ(ok.case_record.metadata.at("original_presentation"), fixtures::fixture_case("c01").presentation);
  EXPECT_TRUE(ok.case_record.metadata.contains("summary_length_ratio"));

  const std::string id = fixtures::expectations()["unsummarizable"];
  const auto kept = cfdx::preprocess_summarize(fixtures::fixture_case(id), client, fixtures::templates());
  EXPECT_FALSE(kept.summarized);
  EXPECT_EQ(kept.case_record, fixtures::fixture_case(id));
  ASSERT_EQ(kept.warnings.size(), 1u);
  EXPECT_EQ(kept.raw_replies.size(), 2u);
}

TEST(Baseline, PromptsByMode) {
  const auto& t = fixtures::templates();
  const auto examples = cfdx::load_few_shot(fixtures::dir() / "few_shot.jsonl");
  ASSERT_FALSE(examples.empty());
  const auto zero = cfdx::baseline_prompt(cfdx::RunMode::ZeroShot, "Fever.", {}, t);
  const auto cot = cfdx::baseline_prompt(cfdx::RunMode::ZeroShotCot, "Fever.", {}, t);
  const auto few = cfdx::baseline_prompt(cfdx::RunMode::FewShot, "Fever.", examples, t);
  EXPECT_NE(zero.find("Fever."), std::string::npos);
  EXPECT_EQ(cot.rfind(zero, 0), 0u);
  EXPECT_GT(cot.size(), zero.size());
  EXPECT_NE(few.find(examples.front().final_diagnosis), std::string::npos);
  EXPECT_GT(few.size(), zero.size());
}

cfdx::Runtime scripted_runtime(const std::string& mode, std::vector<std::int64_t> seeds) {
  auto config = fixtures::scripted_config(mode);
  config.seeds = std::move(seeds);
  return cfdx::make_runtime(config);
}

TEST(Batch, WritesArtifactsAndResumes) {
  const auto out = fixtures::scratch("batch_full");
  const auto cases = cfdx::select_cases(cfdx::ingest_cases(fixtures::dir() / "cases.jsonl").cases, {"c01", "c03"});
  auto rt = scripted_runtime("full-pipeline", {101, 202});
  const auto first = cfdx::run_batch(rt, cases, out);
  EXPECT_TRUE(first.at("complete").get<bool>());
  EXPECT_EQ(first.at("run").at("written"), 4);
  EXPECT_EQ(first.at("artifacts").size(), 4u);
  for (const auto& a : first.at("artifacts")) EXPECT_TRUE(fs::exists(out / a.at("path").get<std::string>()));
  EXPECT_TRUE(fs::exists(out / "seed_101" / "c01.json"));

  auto rt2 = scripted_runtime("full-pipeline", {101, 202});
  const auto second = cfdx::run_batch(rt2, cases, out);
  EXPECT_EQ(second.at("run").at("written"), 0);
  EXPECT_EQ(second.at("run").at("skipped"), 4);
  EXPECT_EQ(second.at("run").at("backend_calls"), 0);
  EXPECT_EQ(cfdx::comparable_manifest(first), cfdx::comparable_manifest(second));
}

TEST(Batch, BaselineArtifactRecordsPromptAndAnswer) {
  const auto out = fixtures::scratch("batch_zero");
  const auto cases = cfdx::select_cases(cfdx::ingest_cases(fixtures::dir() / "cases.jsonl").cases, {"c01"});
  auto rt = scripted_runtime("zero-shot", {101});
  const auto manifest = cfdx::run_batch(rt, cases, out);
  EXPECT_EQ(manifest.at("mode"), "zero-shot");
  const auto art = fixtures::read_json(out / "seed_101" / "c01.json");
  EXPECT_EQ(art.at("kind"), "baseline");
  EXPECT_EQ(art.at("status"), "ok");
  EXPECT_EQ(art.at("prompt_sha256").get<std::string>().size(), 64u);
  EXPECT_FALSE(art.at("answer").get<std::string>().empty());
}

TEST(Report, AccuracyFromGrader) {
  const auto out = fixtures::scratch("report_acc");
  const auto cases =
      cfdx::select_cases(cfdx::ingest_cases(fixtures::dir() / "cases.jsonl").cases, {"c01", "c02", "c03", "c04"});
  auto rt = scripted_runtime("zero-shot", {101});
  (void)cfdx::run_batch(rt, cases, out);
  const auto report = cfdx::emit_report_with(out, [](const std::string& id, const std::string&) -> std::optional<bool> {
    return id != "c02";
  });
  EXPECT_DOUBLE_EQ(report.at("accuracy").at("mean").get<double>(), 0.75);
  EXPECT_DOUBLE_EQ(report.at("accuracy").at("std").get<double>(), 0.0);
  EXPECT_EQ(report.at("per_case").at("101").at("c02"), false);
  EXPECT_TRUE(fs::exists(out / "report.json"));
  EXPECT_TRUE(fs::exists(out / "report.txt"));
  EXPECT_NE(cfdx::report_table(report).find("0.75"), std::string::npos);
}

TEST(Report, IncompleteManifestIsRejected) {
  const auto out = fixtures::scratch("report_empty");
  auto grader = [](const std::string&, const std::string&) -> std::optional<bool> { return true; };
  EXPECT_EQ(kind_of([&] { (void)cfdx::emit_report_with(out, grader); }), ErrorKind::ManifestIncomplete);
  std::ofstream(out / "manifest.json") << R"({"complete": false, "artifacts": []})";
  EXPECT_EQ(kind_of([&] { (void)cfdx::emit_report_with(out, grader); }), ErrorKind::ManifestIncomplete);
}

TEST(Compare, McNemarAcrossReports) {
  json ref{{"per_case", {{"101", json::object()}}}};
  json other{{"per_case", {{"101", json::object()}}}};
  for (int i = 0; i < 10; ++i) {
    const std::string id = "c" + std::to_string(i);
    ref["per_case"]["101"][id] = i == 0;
    other["per_case"]["101"][id] = i != 0;
  }
  ref["per_case"]["101"]["same"] = true;
  other["per_case"]["101"]["same"] = true;
  ref["per_case"]["101"]["abstain"] = nullptr;
  other["per_case"]["101"]["abstain"] = true;
  const auto cmp = cfdx::compare_reports({ref, other, ref}, {"full", "zero", "full-again"});
  ASSERT_EQ(cmp.at("rows").size(), 2u);
  const auto& row = cmp.at("rows")[0];
  EXPECT_EQ(row.at("pairs"), 11);
  EXPECT_EQ(row.at("b"), 1);
  EXPECT_EQ(row.at("c"), 9);
  EXPECT_DOUBLE_EQ(row.at("p").get<double>(), 0.021484375);
  EXPECT_DOUBLE_EQ(row.at("p_holm").get<double>(), 0.04296875);
  EXPECT_DOUBLE_EQ(cmp.at("rows")[1].at("p").get<double>(), 1.0);
  EXPECT_NE(cfdx::comparison_table(cmp).find("full-again"), std::string::npos);
  EXPECT_EQ(kind_of([&] { (void)cfdx::compare_reports({ref}, {"only"}); }), ErrorKind::InvalidArgument);
}

TEST(Artifacts, NamesAreSanitized) {
  EXPECT_EQ(cfdx::artifact_name("c01"), "c01.json");
  const auto odd = cfdx::artifact_name("../a b/c");
  EXPECT_EQ(odd.find('/'), std::string::npos);
  EXPECT_EQ(odd.find(' '), std::string::npos);
}

}  // namespace
