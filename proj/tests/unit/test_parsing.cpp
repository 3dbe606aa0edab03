#include <gtest/gtest.h>

#include <set>

#include "cfdx/parsing.hpp"
#include "cfdx/prompts.hpp"
#include "support/error_kind.hpp"
#include "support/fixtures.hpp"

namespace {

using cfdx::ErrorKind;

using support::kind_of;

TEST(Render, SubstitutesOnceAndLeavesJsonBraces) {
  const auto t = cfdx::PromptTemplate::from_body("t", "Case: {case}\nReturn {\"a\": 1} for {diagnosis}.");
  EXPECT_EQ(t.required_vars, (std::set<std::string>{"case", "diagnosis"}));
  const auto r = cfdx::render_prompt(t, {{"case", "has {diagnosis} inside"}, {"diagnosis", "Flu"}});
  EXPECT_EQ(r.text, "Case: has {diagnosis} inside\nReturn {\"a\": 1} for Flu.");
  EXPECT_TRUE(r.warnings.empty());
}

TEST(Render, MissingAndUnknownVars) {
  const auto t = cfdx::PromptTemplate::from_body("t", "{a} and {b}");
  EXPECT_EQ(kind_of([&] { (void)cfdx::render_prompt(t, {{"a", "1"}}); }), ErrorKind::MissingVar);
  const auto r = cfdx::render_prompt(t, {{"a", "1"}, {"b", "2"}, {"c", "3"}});
  EXPECT_EQ(r.text, "1 and 2");
  ASSERT_EQ(r.warnings.size(), 1u);
  EXPECT_EQ(r.warnings[0].code, "UnknownVar");
}

TEST(Templates, AllAssetsLoadWithChecksums) {
  const auto& store = fixtures::templates();
  for (const char* id : {"triage", "ddx", "report", "specialist", "independent_clinician", "summarizer", "judge",
                         "evidence", "edit", "edit_insert", "zero_shot", "probe_candidates", "probe_hypothesis",
                         "eval_judge", "case_summarization", "few_shot_example"}) {
    EXPECT_TRUE(store.contains(id)) << id;
    EXPECT_EQ(store.checksums().at(id).size(), 64u) << id;
  }
  EXPECT_EQ(kind_of([&] { (void)store.get("nope"); }), ErrorKind::FileNotFound);
}

TEST(Templates, OverrideChangesChecksum) {
  auto store = cfdx::TemplateStore::load(fixtures::assets() / "prompts");
  const auto before = store.checksums().at("judge");
  store.override_template("judge", "Decide: {case}");
  EXPECT_NE(store.checksums().at("judge"), before);
  EXPECT_EQ(store.get("judge").body, "Decide: {case}");
}

TEST(Tags, FindTagIsCaseInsensitiveAndTolerant) {
  const std::string text = "pre <ANSWER kind=\"x\"> Flu </Answer> post";
  const auto span = cfdx::find_tag(text, "answer");
  ASSERT_TRUE(span);
  EXPECT_EQ(text.substr(span->content_begin, span->content_end - span->content_begin), " Flu ");
  EXPECT_FALSE(cfdx::find_tag(text, "question"));

  // A repeated opening tag is read as a malformed closer.
  EXPECT_EQ(cfdx::find_all_tags("<e>one<e> then <e>two</e>", "e"), (std::vector<std::string>{"one", "two"}));
  EXPECT_EQ(cfdx::find_all_tags("<e>unclosed to the end", "e"), (std::vector<std::string>{"unclosed to the end"}));
}

TEST(Tags, SectionsAndRequired) {
  const std::string text = "<think>reasoning</think>\n<answer>\n Flu\n</answer><answer>second</answer>";
  const auto s = cfdx::parse_tagged_sections(text, {"think", "answer", "confidence"});
  EXPECT_EQ(s.at("think"), "reasoning");
  EXPECT_EQ(s.at("answer"), "Flu");
  EXPECT_FALSE(s.contains("confidence"));
  EXPECT_EQ(kind_of([&] { (void)cfdx::parse_tagged_sections(text, {"confidence"}, {"confidence"}); }),
            ErrorKind::MissingRequiredTag);
}

TEST(QaLines, ParsesQuestionsAnswersAndDropsBadLines) {
  const auto qa = cfdx::parse_qa_lines(
      "- Q-TO-[Cardiologist]: Is the troponin rising?\n"
      "A-TO-Neurologist: No focal deficit.\n"
      "Q-TO-[Pulmonologist]: asking myself\n"
      "random chatter\n",
      "Pulmonologist", 2);
  ASSERT_EQ(qa.questions.size(), 1u);
  EXPECT_EQ(qa.questions[0], (cfdx::RoutedQuestion{"Pulmonologist", "Cardiologist", 2, "Is the troponin rising?"}));
  ASSERT_EQ(qa.answers.size(), 1u);
  EXPECT_EQ(qa.answers[0].to_role, "Neurologist");
  ASSERT_EQ(qa.warnings.size(), 2u);
  EXPECT_EQ(qa.warnings[0].code, "SelfQuestionDropped");
  EXPECT_EQ(qa.warnings[1].code, "MalformedQaLine");

  const auto none = cfdx::parse_qa_lines("None", "Pulmonologist", 0);
  EXPECT_TRUE(none.questions.empty());
  EXPECT_TRUE(none.warnings.empty());
}

TEST(QaLines, SummaryAttribution) {
  const auto qa = cfdx::parse_summary_qa(
      "<question from=\"Pulmonologist\" to=\"Cardiologist\" round=\"0\">Troponin?</question>\n"
      "<answer to=\"Pulmonologist\" round=\"1\">Rising.</answer>");
  ASSERT_EQ(qa.questions.size(), 1u);
  EXPECT_EQ(qa.questions[0], (cfdx::RoutedQuestion{"Pulmonologist", "Cardiologist", 0, "Troponin?"}));
  ASSERT_EQ(qa.answers.size(), 1u);
  EXPECT_EQ(qa.answers[0].from_role, "Unknown");
  ASSERT_EQ(qa.warnings.size(), 1u);
  EXPECT_EQ(qa.warnings[0].code, "MissingAttribution");
}

TEST(Payloads, BracedBlockIsStringAware) {
  const auto b = cfdx::extract_braced_block("x {\"a\": \"}{\", \"b\": {\"c\": 1}} tail }");
  ASSERT_TRUE(b);
  EXPECT_EQ(*b, "{\"a\": \"}{\", \"b\": {\"c\": 1}}");
  EXPECT_FALSE(cfdx::extract_braced_block("{ unbalanced"));
}

const std::string kDdx = R"({"case_summary": "s", "most_likely_diagnoses": [
  {"diagnosis": " Flu ", "rationale": "a"}, {"diagnosis": "COVID-19", "rationale": "b"},
  {"diagnosis": "Strep throat", "rationale": "c"}]})";

TEST(Payloads, AcceptsThreeWrapperStyles) {
  for (const std::string& wrapped : {kDdx, "```json\n" + kDdx + "\n```", "Here is my answer:\n" + kDdx + "\nThanks."}) {
    const auto ddx = cfdx::parse_ddx(wrapped);
    ASSERT_EQ(ddx.entries.size(), 3u);
    EXPECT_EQ(ddx.entries[0].diagnosis, "Flu");
    EXPECT_EQ(ddx.labels()[2], "Strep throat");
  }
  const auto v = cfdx::parse_structured_payload(kDdx, cfdx::PayloadSchema::DDx, fixtures::pool());
  EXPECT_TRUE(std::holds_alternative<cfdx::DifferentialSet>(v));
}

TEST(Payloads, DdxRequiresThreeDistinctEntries) {
  EXPECT_EQ(kind_of([] {
              (void)cfdx::parse_ddx(R"({"most_likely_diagnoses": [{"diagnosis": "A"}, {"diagnosis": "B"}]})");
            }),
            ErrorKind::SchemaViolation);
  EXPECT_EQ(kind_of([] { (void)cfdx::parse_ddx("no json here"); }), ErrorKind::SchemaViolation);
}

std::string triage_json(int n, const std::vector<std::string>& roles) {
  nlohmann::json doc{{"main_symptoms", {"fever"}}, {"problems", {"p"}}, {"num_agents", n}};
  doc["assigned_specialists"] = nlohmann::json::array();
  for (const auto& r : roles) doc["assigned_specialists"].push_back({{"role", r}, {"rationale", "why"}});
  return doc.dump();
}

TEST(Payloads, TriageValidation) {
  const auto& pool = fixtures::pool();
  const auto ok = cfdx::parse_triage(triage_json(2, {"cardiologist", "Neurologist"}), pool);
  ASSERT_EQ(ok.assigned_specialists.size(), 2u);
  EXPECT_EQ(ok.assigned_specialists[0].role, "Cardiologist");

  const std::vector<std::string> six{"Cardiologist", "Neurologist", "Nephrologist",
                                     "Hematologist", "Pulmonologist", "Endocrinologist"};
  EXPECT_EQ(kind_of([&] { (void)cfdx::parse_triage(triage_json(6, six), pool); }), ErrorKind::SchemaViolation);
  EXPECT_EQ(kind_of([&] { (void)cfdx::parse_triage(triage_json(3, {"Cardiologist"}), pool); }),
            ErrorKind::SchemaViolation);
  EXPECT_EQ(kind_of([&] { (void)cfdx::parse_triage(triage_json(1, {"Kidney Wizard"}), pool); }),
            ErrorKind::UnknownRole);
  const auto dropped =
      cfdx::parse_triage(triage_json(2, {"Kidney Wizard", "Nephrologist"}), pool, {5, true});
  ASSERT_EQ(dropped.assigned_specialists.size(), 1u);
  EXPECT_EQ(dropped.warnings[0].code, "UnknownRoleDropped");
}

TEST(Payloads, JudgeFields) {
  const auto j = cfdx::parse_judge(
      R"({"had_consensus": "false", "final_diagnosis": " Lyme disease ", "winner_role": "Neurologist",
          "confidence_score": "High"})");
  EXPECT_FALSE(j.had_consensus);
  EXPECT_EQ(j.final_diagnosis, "Lyme disease");
  EXPECT_EQ(j.winner_role, "Neurologist");
  EXPECT_EQ(kind_of([] { (void)cfdx::parse_judge(R"({"had_consensus": true})"); }), ErrorKind::SchemaViolation);
}

TEST(Confidence, Levels) {
  EXPECT_EQ(cfdx::parse_confidence(" High "), cfdx::Confidence::High);
  EXPECT_EQ(cfdx::parse_confidence("medium"), cfdx::Confidence::Moderate);
  EXPECT_EQ(cfdx::parse_confidence("LOW - uncertain"), cfdx::Confidence::Low);
  EXPECT_FALSE(cfdx::parse_confidence("perhaps"));
}

TEST(Pool, FortyThreeRolesInSevenCategories) {
  const auto& pool = fixtures::pool();
  EXPECT_EQ(pool.roles().size(), 43u);
  EXPECT_EQ(pool.categories().size(), 7u);
  std::set<std::string> names;
  for (const auto& r : pool.roles()) names.insert(r.name);
  EXPECT_EQ(names.size(), 43u);
  EXPECT_TRUE(pool.find("  general internal medicine doctor "));
  EXPECT_FALSE(pool.find("Kidney Wizard"));
  EXPECT_NE(pool.listing().find("Cardiologist"), std::string::npos);
  EXPECT_EQ(pool.checksum().size(), 64u);
}

}  // namespace
