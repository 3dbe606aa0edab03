#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "cfdx/cf_engine.hpp"
#include "cfdx/client.hpp"
#include "cfdx/parsing.hpp"
#include "cfdx/prompts.hpp"
#include "cfdx/similarity.hpp"

namespace cfdx {

struct CaseRecord {
  std::string id;
  std::string presentation;
  std::optional<std::string> ground_truth;
  std::map<std::string, std::string> metadata;

  bool operator==(const CaseRecord&) const = default;
};

struct Stance {
  std::string diagnosis;
  Confidence confidence = Confidence::Moderate;

  bool operator==(const Stance&) const = default;
};

// One participant's output for one round.
struct SpecialistTurn {
  std::string role;
  int round = 0;
  bool is_clinician = false;
  std::string reasoning_chain;
  std::string discriminators;
  std::string cf_evidence;
  std::string critique;
  std::string emitted_diagnosis;  // as written by the model
  std::string final_diagnosis;    // DDx label it maps to
  Confidence confidence = Confidence::Moderate;
  std::vector<RoutedQuestion> questions;
  std::vector<RoutedAnswer> answers;
  std::vector<RoutedQuestion> delivered_questions;
  bool remapped = false;
  bool carried_forward = false;
  std::vector<std::string> raw_replies;
  Warnings warnings;

  // Counterfactual step; absent for the independent clinician.
  std::optional<ProbedDiagnosis> p_base;
  std::optional<std::string> p_base_hypothesis;
  std::vector<CounterfactualVariant> candidates;
  std::vector<CounterfactualVariant> selected;
};

struct ConsensusResult {
  bool reached = false;
  std::string modal_diagnosis;
  double fraction = 0.0;
  std::size_t participants = 0;
  bool tie_broken = false;

  bool operator==(const ConsensusResult&) const = default;
};

struct RoundRecord {
  int round = 0;
  std::vector<SpecialistTurn> turns;  // assignment order, clinician last
  std::string summary_log;
  std::string summary_raw;
  std::vector<RoutedQuestion> summary_questions;
  std::vector<RoutedAnswer> summary_answers;
  ConsensusResult consensus;
  Warnings warnings;
};

struct Verdict {
  bool had_consensus = false;
  std::string final_diagnosis;
  std::string winner_role;
  std::string rationale;
  Confidence confidence = Confidence::Moderate;
  std::optional<JudgePayload> judge;
  bool remapped = false;
  std::vector<std::string> raw_replies;
};

struct Transcript {
  static constexpr int kSchemaVersion = 1;

  CaseRecord case_record;
  std::string status = "ok";  // "ok" or "failed"
  std::string failure;
  TriagePayload triage;
  std::vector<std::string> assigned_specialists;
  std::map<std::string, std::string> reports;
  DifferentialSet ddx;
  std::vector<RoundRecord> rounds;
  bool judge_invoked = false;
  Verdict verdict;
  std::map<std::string, int> stance_changes;
  std::map<std::string, std::string> raw_replies;  // triage, ddx, report:<role>
  nlohmann::json config_snapshot;
  std::map<std::string, std::string> asset_checksums;
  std::string backend_id;
  std::string model_id;
  std::string embedder_id;
  CallStats calls;
  Warnings warnings;
  double elapsed_seconds = 0.0;
};

struct OrchestratorConfig {
  int max_rounds = 3;
  int max_specialists = 5;
  double consensus_threshold = 0.75;
  bool clinician_votes = true;
  CfConfig cf;

  void validate() const;
};

struct PipelineContext {
  LlmClient& client;
  const EmbeddingProvider& provider;
  const TemplateStore& templates;
  const SpecialistPool& pool;
  OrchestratorConfig config;
};

// `ordered` lists (role, label) in assignment order; the earliest role's label
// wins a modal tie.
[[nodiscard]] ConsensusResult check_consensus(const std::vector<std::pair<std::string, std::string>>& ordered,
                                              double threshold = 0.75);

// Maps a model-emitted label onto the DDx: exact normalized match, else the
// label with the highest semantic similarity (remapped = true).
struct LabelMapping {
  std::string label;
  bool remapped = false;
};
[[nodiscard]] LabelMapping map_to_ddx(std::string_view emitted, const DifferentialSet& ddx,
                                      const EmbeddingProvider& provider);

// Rounds in which each participant's label differs from its previous round.
[[nodiscard]] std::map<std::string, int> count_stance_changes(const std::vector<RoundRecord>& rounds);

// Full pipeline for one case. Backend failures after retries yield a
// transcript with status "failed" rather than an exception.
[[nodiscard]] Transcript run_case(const CaseRecord& case_record, PipelineContext& ctx);

[[nodiscard]] nlohmann::json transcript_to_json(const Transcript& t);
[[nodiscard]] Transcript transcript_from_json(const nlohmann::json& j);

// Transcript JSON without the keys that legitimately differ between runs.
[[nodiscard]] nlohmann::json comparable_transcript(nlohmann::json j);

void to_json(nlohmann::json& j, const CaseRecord& c);
void from_json(const nlohmann::json& j, CaseRecord& c);

}  // namespace cfdx
