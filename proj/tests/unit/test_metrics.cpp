#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "cfdx/metrics.hpp"
#include "cfdx/scripted_backend.hpp"
#include "support/error_kind.hpp"
#include "support/fixtures.hpp"

namespace {

using cfdx::ErrorKind;
using support::kind_of;

cfdx::SpecialistTurn turn(std::string role, std::string dx) {
  cfdx::SpecialistTurn t;
  t.role = std::move(role);
  t.is_clinician = t.role == "Independent Clinician";
  t.final_diagnosis = std::move(dx);
  return t;
}

// Each round lists (specialist label, clinician label).
cfdx::Transcript transcript(std::string id, std::string specialty,
                            const std::vector<std::pair<std::string, std::string>>& rounds, bool consensus,
                            std::string verdict) {
  cfdx::Transcript t;
  t.case_record.id = std::move(id);
  t.case_record.ground_truth = "X";
  t.case_record.metadata["specialty"] = std::move(specialty);
  for (std::size_t r = 0; r < rounds.size(); ++r) {
    cfdx::RoundRecord rec;
    rec.round = static_cast<int>(r);
    rec.turns = {turn("Cardiologist", rounds[r].first), turn("Independent Clinician", rounds[r].second)};
    t.rounds.push_back(std::move(rec));
  }
  t.stance_changes = cfdx::count_stance_changes(t.rounds);
  t.verdict.had_consensus = consensus;
  t.verdict.final_diagnosis = std::move(verdict);
  return t;
}

cfdx::CounterfactualVariant variant(cfdx::EditOperation op, std::string base_label, double base_p,
                                    std::string probed_label, double probed_p, bool passed) {
  cfdx::CounterfactualVariant v;
  v.operation = op;
  v.base = {std::move(base_label), base_p, 0.0};
  v.probed = {std::move(probed_label), probed_p, 0.0};
  v.passed_filter = passed;
  return v;
}

std::vector<cfdx::Transcript> hand_fixture() {
  std::vector<cfdx::Transcript> out;
  out.push_back(transcript("a", "Cardiology", {{"X", "X"}}, true, "X"));
  out.push_back(transcript("b", "Cardiology", {{"Y", "X"}, {"X", "X"}}, true, "X"));
  out.push_back(transcript("c", "Neurology", {{"X", "Y"}, {"X", "Y"}, {"Y", "Y"}}, false, "Y"));
  out.push_back(transcript("d", "Neurology", {{"X", "X"}}, true, "X"));
  auto& cands = out[0].rounds[0].turns[0].candidates;
  cands.push_back(variant(cfdx::EditOperation::Negate, "X", 0.8, "x", 0.5, true));
  cands.push_back(variant(cfdx::EditOperation::Replace, "X", 0.8, "Z", 0.1, true));
  cands.push_back(variant(cfdx::EditOperation::Weaken, "X", 0.8, "X", 0.7, false));
  return out;
}

std::optional<bool> exact_grader(const std::string&, const std::string& label) { return label == "X"; }

TEST(Metrics, HandFixture) {
  const auto m = cfdx::compute_metrics(hand_fixture(), exact_grader);
  EXPECT_EQ(m.cases, 4u);
  EXPECT_EQ(m.scored_cases, 4u);
  EXPECT_DOUBLE_EQ(m.accuracy, 0.75);
  EXPECT_DOUBLE_EQ(m.consensus_rate, 0.75);
  EXPECT_DOUBLE_EQ(m.avg_rounds, 1.75);
  EXPECT_EQ(m.stance_changes, 2u);
  EXPECT_EQ(m.stance_opportunities, 6u);
  EXPECT_DOUBLE_EQ(m.stance_change_rate, 2.0 / 6.0);
  EXPECT_EQ(m.outcome_matrix, (cfdx::OutcomeMatrix{1, 1, 1, 5}));
  EXPECT_EQ(m.outcome_matrix.total(), 8u);
  ASSERT_EQ(m.delta_p.size(), 1u);
  ASSERT_EQ(m.delta_p.at("Negate").size(), 1u);
  EXPECT_NEAR(m.delta_p.at("Negate")[0], 0.3, 1e-12);
  EXPECT_NEAR(m.delta_p_label_changed.at("Replace").at(0), 0.7, 1e-12);
  EXPECT_DOUBLE_EQ(m.category_accuracy.at("Cardiology"), 1.0);
  EXPECT_DOUBLE_EQ(m.category_accuracy.at("Neurology"), 0.5);
  ASSERT_EQ(m.per_case.size(), 4u);
  EXPECT_EQ(m.per_case[2], (std::pair<std::string, std::optional<bool>>{"c", false}));
}

TEST(Metrics, PermutationInvariant) {
  auto ts = hand_fixture();
  const auto reference = cfdx::metrics_to_json(cfdx::compute_metrics(ts, exact_grader));
  std::mt19937_64 rng(2);
  for (int i = 0; i < 10; ++i) {
    std::shuffle(ts.begin(), ts.end(), rng);
    EXPECT_EQ(cfdx::metrics_to_json(cfdx::compute_metrics(ts, exact_grader)), reference);
  }
}

TEST(Metrics, FailedAndAbstainedCases) {
  auto ts = hand_fixture();
  cfdx::Transcript failed;
  failed.case_record.id = "e";
  failed.status = "failed";
  ts.push_back(failed);
  const auto m = cfdx::compute_metrics(ts, [](const std::string& id, const std::string& label) -> std::optional<bool> {
    if (id == "d") return std::nullopt;
    return label == "X";
  });
  EXPECT_EQ(m.cases, 5u);
  EXPECT_EQ(m.failed_cases, 1u);
  EXPECT_EQ(m.abstained_cases, 1u);
  EXPECT_EQ(m.scored_cases, 3u);
  EXPECT_DOUBLE_EQ(m.accuracy, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(m.consensus_rate, 0.75);
  EXPECT_EQ(kind_of([] { (void)cfdx::compute_metrics({}, exact_grader); }), ErrorKind::EmptyInput);
}

TEST(Judge, ParseYesNo) {
  EXPECT_TRUE(cfdx::parse_yes_no("Yes."));
  EXPECT_TRUE(cfdx::parse_yes_no("  YES, they match"));
  EXPECT_FALSE(cfdx::parse_yes_no("<answer>No</answer>"));
  EXPECT_EQ(kind_of([] { (void)cfdx::parse_yes_no("Maybe"); }), ErrorKind::UnparseableVerdict);
  EXPECT_EQ(kind_of([] { (void)cfdx::parse_yes_no("Yesterday"); }), ErrorKind::UnparseableVerdict);
}

TEST(Judge, ScriptedGraderMemoizes) {
  auto backend = cfdx::ScriptedBackend::load(fixtures::dir() / "judge_script.json");
  cfdx::LlmClient judge(backend, "judge", cfdx::DecodingPreset{0.0, 1.0, std::nullopt, 16});
  cfdx::JudgeGrader grader(judge, fixtures::templates(), {{"a", "Acute appendicitis"}, {"b", "Gout"}});
  EXPECT_EQ(grader("a", "acute appendicitis"), std::optional<bool>(true));
  EXPECT_EQ(grader("a", "appendicitis, acute"), std::optional<bool>(true));
  EXPECT_EQ(grader("b", "Pseudogout"), std::optional<bool>(false));
  EXPECT_EQ(grader("a", "acute appendicitis"), std::optional<bool>(true));
  EXPECT_EQ(grader("missing", "x"), std::nullopt);
  EXPECT_EQ(judge.stats().backend_calls, 3u);
}

TEST(Judge, UnparseableTwiceAbstains) {
  auto backend = cfdx::ScriptedBackend::from_json(nlohmann::json{
      {"id", "j"},
      {"capabilities", {{"logprobs", false}, {"seed", false}}},
      {"entries", {{{"match", {{"kind", "eval_judge"}}}, {"reply", "It depends."}}}}});
  cfdx::LlmClient judge(backend, "judge", cfdx::DecodingPreset{});
  const auto out = cfdx::judge_correctness("Flu", "Influenza", judge, fixtures::templates());
  EXPECT_FALSE(out.correct.has_value());
  EXPECT_EQ(out.raw_replies.size(), 2u);
}

}  // namespace
