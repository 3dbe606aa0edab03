#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "cfdx/orchestrator.hpp"
#include "support/fixtures.hpp"

namespace {

using nlohmann::json;
using Votes = std::vector<std::pair<std::string, std::string>>;

Votes votes(const std::vector<std::string>& labels) {
  Votes out;
  for (std::size_t i = 0; i < labels.size(); ++i) out.emplace_back("r" + std::to_string(i), labels[i]);
  return out;
}

TEST(Consensus, Examples) {
  const auto all = cfdx::check_consensus(votes({"Flu", "flu", " FLU ", "Flu"}));
  EXPECT_TRUE(all.reached);
  EXPECT_DOUBLE_EQ(all.fraction, 1.0);
  EXPECT_EQ(all.modal_diagnosis, "Flu");

  const auto three_of_four = cfdx::check_consensus(votes({"A", "A", "B", "A"}));
  EXPECT_TRUE(three_of_four.reached);
  EXPECT_DOUBLE_EQ(three_of_four.fraction, 0.75);

  const auto two_of_three = cfdx::check_consensus(votes({"A", "A", "B"}));
  EXPECT_FALSE(two_of_three.reached);

  const auto tie = cfdx::check_consensus(votes({"B", "A", "A", "B"}));
  EXPECT_FALSE(tie.reached);
  EXPECT_EQ(tie.modal_diagnosis, "B");
  EXPECT_TRUE(tie.tie_broken);
  EXPECT_EQ(tie.participants, 4u);
}

TEST(Consensus, MatchesCountingOracleForAllSmallElectorates) {
  const std::vector<std::string> alphabet{"A", "B", "C"};
  for (std::size_t n = 2; n <= 8; ++n) {
    std::size_t combos = 1;
    for (std::size_t i = 0; i < n; ++i) combos *= alphabet.size();
    for (std::size_t code = 0; code < combos; ++code) {
      std::vector<std::string> labels;
      std::size_t c = code;
      for (std::size_t i = 0; i < n; ++i, c /= alphabet.size()) labels.push_back(alphabet[c % alphabet.size()]);

      std::map<std::string, std::size_t> counts;
      for (const auto& l : labels) ++counts[l];
      std::size_t best = 0;
      for (const auto& [l, k] : counts) best = std::max(best, k);
      std::string first_modal;
      for (const auto& l : labels) {
        if (counts[l] == best) {
          first_modal = l;
          break;
        }
      }
      const std::size_t modal_labels =
          std::count_if(counts.begin(), counts.end(), [&](const auto& kv) { return kv.second == best; });

      const auto got = cfdx::check_consensus(votes(labels), 0.75);
      ASSERT_EQ(got.modal_diagnosis, first_modal);
      ASSERT_DOUBLE_EQ(got.fraction, static_cast<double>(best) / static_cast<double>(n));
      ASSERT_EQ(got.reached, 4 * best >= 3 * n);
      ASSERT_EQ(got.tie_broken, modal_labels > 1);
    }
  }
}

TEST(Mapping, ExactThenSemanticRemap) {
  const cfdx::HashedTrigramEmbedder embedder;
  const cfdx::DifferentialSet ddx{"s", {{"Acute appendicitis", ""}, {"Mesenteric adenitis", ""}, {"Ovarian torsion", ""}}};
  const auto exact = cfdx::map_to_ddx(" acute APPENDICITIS ", ddx, embedder);
  EXPECT_EQ(exact.label, "Acute appendicitis");
  EXPECT_FALSE(exact.remapped);
  const auto remap = cfdx::map_to_ddx("appendicitis, acute", ddx, embedder);
  EXPECT_EQ(remap.label, "Acute appendicitis");
  EXPECT_TRUE(remap.remapped);
}

TEST(StanceChanges, CountsPerParticipant) {
  auto turn = [](std::string role, std::string dx) {
    cfdx::SpecialistTurn t;
    t.role = std::move(role);
    t.final_diagnosis = std::move(dx);
    return t;
  };
  std::vector<cfdx::RoundRecord> rounds(3);
  rounds[0].turns = {turn("A", "x"), turn("B", "y")};
  rounds[1].turns = {turn("A", "y"), turn("B", "Y")};
  rounds[2].turns = {turn("A", "x"), turn("B", "y")};
  const auto changes = cfdx::count_stance_changes(rounds);
  EXPECT_EQ(changes.at("A"), 2);
  EXPECT_EQ(changes.at("B"), 0);
}

class FixtureRun : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    fixtures::Harness h;
    for (const auto& c : cfdx::ingest_cases(fixtures::dir() / "cases.jsonl").cases) {
      (*transcripts_)[c.id] = h.run(c);
    }
  }
  static const cfdx::Transcript& at(const std::string& id) { return transcripts_->at(id); }
  static const cfdx::SpecialistTurn& turn(const cfdx::Transcript& t, int round, const std::string& role) {
    for (const auto& tr : t.rounds.at(static_cast<std::size_t>(round)).turns) {
      if (tr.role == role) return tr;
    }
    throw std::runtime_error("no turn for " + role);
  }
  static inline auto transcripts_ = std::make_unique<std::map<std::string, cfdx::Transcript>>();
};

TEST_F(FixtureRun, AllCasesCompleteWithValidStructure) {
  ASSERT_EQ(transcripts_->size(), 10u);
  for (const auto& [id, t] : *transcripts_) {
    EXPECT_EQ(t.status, "ok") << id << ": " << t.failure;
    EXPECT_EQ(t.ddx.entries.size(), 3u) << id;
    EXPECT_FALSE(t.rounds.empty()) << id;
    EXPECT_LE(t.rounds.size(), 3u) << id;
    EXPECT_FALSE(t.verdict.final_diagnosis.empty()) << id;
    const auto labels = t.ddx.labels();
    EXPECT_NE(std::find(labels.begin(), labels.end(), t.verdict.final_diagnosis), labels.end()) << id;
    for (const auto& round : t.rounds) {
      ASSERT_EQ(round.turns.size(), t.assigned_specialists.size() + 1) << id;
      EXPECT_TRUE(round.turns.back().is_clinician);
      EXPECT_EQ(round.turns.back().role, "Independent Clinician");
      for (const auto& turn : round.turns) {
        EXPECT_NE(std::find(labels.begin(), labels.end(), turn.final_diagnosis), labels.end()) << id;
        EXPECT_LE(turn.selected.size(), 3u);
        for (const auto& v : turn.selected) {
          EXPECT_TRUE(v.passed_filter);
          EXPECT_EQ(v.edited_text.find(t.case_record.presentation), std::string::npos);
        }
        if (turn.is_clinician) EXPECT_TRUE(turn.candidates.empty());
      }
    }
  }
}

TEST_F(FixtureRun, JudgeOnlyOnDeadlock) {
  const auto deadlock = fixtures::expectations()["deadlock"].get<std::vector<std::string>>();
  for (const auto& [id, t] : *transcripts_) {
    const bool expect_deadlock = std::find(deadlock.begin(), deadlock.end(), id) != deadlock.end();
    EXPECT_EQ(t.judge_invoked, expect_deadlock) << id;
    EXPECT_EQ(t.verdict.had_consensus, !expect_deadlock) << id;
    if (expect_deadlock) {
      EXPECT_EQ(t.rounds.size(), 3u) << id;
      EXPECT_TRUE(t.verdict.judge.has_value());
    } else {
      EXPECT_TRUE(t.rounds.back().consensus.reached) << id;
      EXPECT_EQ(t.verdict.final_diagnosis, t.rounds.back().consensus.modal_diagnosis) << id;
    }
  }
}

TEST_F(FixtureRun, ExactThresholdReachesConsensus) {
  const auto& c = at("c10").rounds.at(0).consensus;
  EXPECT_TRUE(c.reached);
  EXPECT_DOUBLE_EQ(c.fraction, 0.75);
  EXPECT_EQ(c.participants, 4u);
}

TEST_F(FixtureRun, RoutedQuestionIsDeliveredAndAnswered) {
  const auto& t = at(fixtures::expectations()["routed"]);
  ASSERT_GE(t.rounds.size(), 2u);
  const auto& asker = turn(t, 0, "Pulmonologist");
  ASSERT_EQ(asker.questions.size(), 1u);
  EXPECT_EQ(asker.questions[0].to_role, "Cardiologist");
  const auto& answerer = turn(t, 1, "Cardiologist");
  ASSERT_EQ(answerer.delivered_questions.size(), 1u);
  EXPECT_EQ(answerer.delivered_questions[0].from_role, "Pulmonologist");
  ASSERT_EQ(answerer.answers.size(), 1u);
  EXPECT_EQ(answerer.answers[0].to_role, "Pulmonologist");
  EXPECT_FALSE(t.rounds[0].summary_questions.empty());
}

TEST_F(FixtureRun, StanceChangeUsesHypothesisProbe) {
  const auto ex = fixtures::expectations();
  const auto& t = at(ex["stance_change"]);
  const std::string role = ex["stance_change_role"];
  EXPECT_EQ(t.stance_changes.at(role), 1);
  const auto& r1 = turn(t, 1, role);
  ASSERT_TRUE(r1.p_base_hypothesis);
  EXPECT_EQ(*r1.p_base_hypothesis, ex["stance_change_hypothesis"].get<std::string>());
  ASSERT_TRUE(r1.p_base);
  EXPECT_NEAR(r1.p_base->probability, std::exp(-0.15), 1e-12);
  const auto& r0 = turn(t, 0, role);
  EXPECT_FALSE(r0.p_base_hypothesis);
  ASSERT_TRUE(r0.p_base);
  EXPECT_NEAR(r0.p_base->probability, 0.8, 1e-12);
}

TEST_F(FixtureRun, UnparseableReplyIsRetried) {
  const auto& t = at(fixtures::expectations()["unparseable_first_reply"]);
  const auto& first = t.rounds.at(0).turns.at(0);
  EXPECT_EQ(first.raw_replies.size(), 2u);
  EXPECT_FALSE(first.carried_forward);
}

TEST_F(FixtureRun, UnknownTriageRoleIsRetried) {
  const auto& t = at(fixtures::expectations()["triage_unknown_role"]);
  EXPECT_EQ(t.assigned_specialists, (std::vector<std::string>{"Nephrologist"}));
}

TEST_F(FixtureRun, ClinicianSynonymIsRemapped) {
  const auto& t = at(fixtures::expectations()["clinician_synonym"]);
  const auto& clinician = t.rounds.at(0).turns.back();
  EXPECT_TRUE(clinician.remapped);
  EXPECT_EQ(clinician.emitted_diagnosis, "appendicitis, acute");
  EXPECT_EQ(clinician.final_diagnosis, t.ddx.entries.at(0).diagnosis);
}

TEST_F(FixtureRun, TranscriptJsonRoundTrips) {
  for (const auto& [id, t] : *transcripts_) {
    const json j = cfdx::transcript_to_json(t);
    EXPECT_EQ(cfdx::transcript_to_json(cfdx::transcript_from_json(j)), j) << id;
  }
}

TEST(FixtureDeterminism, FreshRunsMatch) {
  for (const char* id : {"c03", "c05", "c08"}) {
    fixtures::Harness a;
    fixtures::Harness b;
    const auto c = fixtures::fixture_case(id);
    EXPECT_EQ(cfdx::comparable_transcript(cfdx::transcript_to_json(a.run(c))),
              cfdx::comparable_transcript(cfdx::transcript_to_json(b.run(c))))
        << id;
  }
}

TEST(CarryForward, UnparseableTwiceKeepsPriorStance) {
  json doc = fixtures::read_json(fixtures::dir() / "script.json");
  doc["entries"].insert(doc["entries"].begin(),
                        json{{"match", {{"kind", "specialist"}, {"case_id", "c04"}, {"role", "Neurologist"}, {"round", "1"}}},
                             {"reply", "I cannot decide."}});
  fixtures::Harness h(cfdx::ScriptedBackend::from_json(doc));
  const auto t = h.run(fixtures::fixture_case("c04"));
  ASSERT_EQ(t.status, "ok") << t.failure;
  const auto& r0 = t.rounds.at(0).turns.at(0);
  const auto& r1 = t.rounds.at(1).turns.at(0);
  EXPECT_TRUE(r1.carried_forward);
  EXPECT_EQ(r1.final_diagnosis, r0.final_diagnosis);
  EXPECT_EQ(r1.confidence, r0.confidence);
  EXPECT_EQ(r1.raw_replies.size(), 2u);
}

TEST(Failure, BackendMissYieldsFailedTranscript) {
  json doc = fixtures::read_json(fixtures::dir() / "script.json");
  auto& entries = doc["entries"];
  entries.erase(std::remove_if(entries.begin(), entries.end(),
                               [](const json& e) { return e["match"].value("kind", "") == "ddx"; }),
                entries.end());
  fixtures::Harness h(cfdx::ScriptedBackend::from_json(doc));
  const auto t = h.run(fixtures::fixture_case("c01"));
  EXPECT_EQ(t.status, "failed");
  EXPECT_NE(t.failure.find("ScriptMiss"), std::string::npos);
}

}  // namespace
