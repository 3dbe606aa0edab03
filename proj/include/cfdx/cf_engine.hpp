#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cfdx/client.hpp"
#include "cfdx/error.hpp"
#include "cfdx/parsing.hpp"
#include "cfdx/prompts.hpp"
#include "cfdx/similarity.hpp"

namespace cfdx {

enum class EditOperation { Negate, Remove, Replace, Weaken, Intensify, Insert };

inline constexpr std::array<EditOperation, 6> kAllOperations{
    EditOperation::Negate,    EditOperation::Remove,    EditOperation::Replace,
    EditOperation::Weaken,    EditOperation::Intensify, EditOperation::Insert};

[[nodiscard]] std::string_view to_string(EditOperation op);
[[nodiscard]] std::optional<EditOperation> parse_operation(std::string_view name);

struct EvidenceSpan {
  std::string excerpt;
  std::size_t start = 0;  // byte offsets into the case text, [start, end)
  std::size_t end = 0;

  bool operator==(const EvidenceSpan&) const = default;
};

// Verbatim, ordered, non-overlapping spans of the case that support one
// candidate diagnosis.
struct EvidenceGroup {
  std::string diagnosis_label;
  std::vector<EvidenceSpan> spans;
  std::string rationale;

  // Throws NonSubstringSpan if any invariant fails against `case_text`.
  void validate(std::string_view case_text) const;

  bool operator==(const EvidenceGroup&) const = default;
};

// Probability of the label the model emitted inside its diagnosis tag:
// exp(mean logprob of the label tokens).
struct ProbedDiagnosis {
  std::string label;
  double probability = 0.0;
  double mean_token_logprob = 0.0;

  bool operator==(const ProbedDiagnosis&) const = default;
};

struct ScoreWeights {
  double w_sig = 0.7;
  double w_shift = 1.0;
  double w_pre = 0.3;

  // Throws InvalidConfig unless all are >= 0 and w_sig + w_pre = 1 within 1e-9.
  void validate() const;
};

struct FilterThresholds {
  double sip = 0.85;
  double edit_sim = 0.80;
};

struct CounterfactualVariant {
  std::size_t generation_index = 0;
  std::string target_diagnosis;
  EditOperation operation = EditOperation::Negate;
  EvidenceGroup evidence;
  std::string edited_text;
  double sem_sim = 0.0;
  double edit_sim = 0.0;
  double sip = 0.0;
  ProbedDiagnosis base;
  ProbedDiagnosis probed;
  double cpg = 0.0;
  double diag_shift = 0.0;
  double combined = 0.0;
  bool passed_filter = false;

  bool operator==(const CounterfactualVariant&) const = default;
};

// --- pure scoring ---------------------------------------------------------

[[nodiscard]] double counterfactual_probability_gap(double p_base, double p_ce);
[[nodiscard]] double preservation_score(double sem_sim, double edit_sim, const SimilarityWeights& w);
[[nodiscard]] double combined_score(double cpg, double diag_shift, double sip, const ScoreWeights& w);
[[nodiscard]] bool passes_filter(double sip, double edit_sim, const FilterThresholds& t);

// Fills the score fields of `variant` (edited_text, base and probed must be
// set). sem_sim/edit_sim are computed here.
[[nodiscard]] CounterfactualVariant score_variant(std::string_view original, CounterfactualVariant variant,
                                                  const ProbedDiagnosis& p_base,
                                                  const SimilarityWeights& sim_weights,
                                                  const ScoreWeights& score_weights,
                                                  const EmbeddingProvider& provider,
                                                  const FilterThresholds& thresholds = {});

// Same, with preservation scores already computed (batch kernel path).
[[nodiscard]] CounterfactualVariant finish_scoring(CounterfactualVariant variant, double sem_sim,
                                                   double edit_sim, const ProbedDiagnosis& p_base,
                                                   const SimilarityWeights& sim_weights,
                                                   const ScoreWeights& score_weights,
                                                   const EmbeddingProvider& provider,
                                                   const FilterThresholds& thresholds);

struct RankResult {
  std::vector<CounterfactualVariant> selected;
  Warnings warnings;
};

// Keeps filter-passing variants, orders by combined desc, sip desc, then
// generation index, and returns at most k. Empty output carries AllFiltered.
[[nodiscard]] RankResult rank_variants(std::vector<CounterfactualVariant> candidates, std::size_t k);

// --- text mechanics -------------------------------------------------------

// Locates excerpts in the case (first non-overlapping occurrence of each),
// ordered by start. Throws NonSubstringSpan.
[[nodiscard]] EvidenceGroup locate_evidence(std::string_view case_text, std::string diagnosis,
                                            const std::vector<std::string>& excerpts,
                                            std::string rationale);

// Replaces [start,end) with `replacement`, repairing doubled punctuation and
// spacing at the seam when the replacement is empty.
[[nodiscard]] std::string splice(std::string_view text, std::size_t start, std::size_t end,
                                 std::string_view replacement);

// Inserts `finding` after the sentence that contains offset `after`.
[[nodiscard]] std::string insert_finding(std::string_view text, std::size_t after, std::string_view finding);

// exp(mean logprob) over the tokens covering the label inside the first
// <answer> (or <final_diagnosis>) tag. Throws NoLogprobs or MissingTag.
[[nodiscard]] ProbedDiagnosis probability_from_response(const ChatResponse& response);

// Candidate operation schedule for one diagnosis: cycles through the six
// operations; Insert appears at most once.
[[nodiscard]] std::vector<EditOperation> operation_schedule(std::size_t n);

// --- backend-driven steps ---------------------------------------------------

struct CfConfig {
  std::size_t k = 3;
  std::size_t candidates_per_dx = 6;
  SimilarityWeights sim_weights;
  ScoreWeights score_weights;
  FilterThresholds thresholds;
};

// Everything a specialist's counterfactual step needs to talk to the model.
struct CfContext {
  LlmClient& client;
  const EmbeddingProvider& provider;
  const TemplateStore& templates;
  std::string case_id;
  std::string role;
  int round = 0;
};

// Errors: NonSubstringSpan (after one reminder retry), backend errors.
[[nodiscard]] EvidenceGroup extract_evidence(std::string_view case_text, const std::string& diagnosis,
                                             CfContext& ctx);

// Errors: NoOpEdit, MissingTag, backend errors.
[[nodiscard]] std::string apply_edit(std::string_view case_text, const EvidenceGroup& evidence,
                                     EditOperation op, CfContext& ctx, std::size_t candidate_index = 0);

// Zero-shot diagnosis probe (cached). With a hypothesis, the prompt names the
// working diagnosis under evaluation.
[[nodiscard]] ProbedDiagnosis probe_diagnosis(std::string_view case_text, const DifferentialSet& ddx,
                                              CfContext& ctx,
                                              const std::optional<std::string>& hypothesis = std::nullopt);

struct GenerationResult {
  std::vector<CounterfactualVariant> candidates;  // every scored candidate, generation order
  std::vector<CounterfactualVariant> selected;    // top-k
  Warnings warnings;
};

// Evidence extraction, N edits per diagnosis, probing, scoring and top-k
// selection against the given baseline probe.
[[nodiscard]] GenerationResult generate_and_rank(std::string_view case_text, const DifferentialSet& ddx,
                                                 const ProbedDiagnosis& p_base, const CfConfig& config,
                                                 CfContext& ctx);

}  // namespace cfdx
