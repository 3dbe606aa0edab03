#pragma once

#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cfdx/client.hpp"
#include "cfdx/orchestrator.hpp"
#include "cfdx/prompts.hpp"
#include "cfdx/stats.hpp"

namespace cfdx {

struct JudgeOutcome {
  std::optional<bool> correct;  // nullopt = abstain
  std::vector<std::string> raw_replies;
};

// Yes/no grading of one prediction with the LLM-as-judge template at the
// judge preset. An unparseable reply is retried once, then abstains.
[[nodiscard]] JudgeOutcome judge_correctness(const std::string& prediction, const std::string& truth,
                                             LlmClient& judge, const TemplateStore& templates,
                                             const DecodingPreset& preset = {0.0, 1.0, std::nullopt, 16});

// Reads "yes"/"no" from the start of a reply. Throws UnparseableVerdict.
[[nodiscard]] bool parse_yes_no(std::string_view reply);

// Correctness of `label` for case `case_id`; nullopt = abstain or no truth.
using Grader = std::function<std::optional<bool>(const std::string& case_id, const std::string& label)>;

// Grader backed by the LLM judge, memoized per (truth, label) pair.
class JudgeGrader {
 public:
  JudgeGrader(LlmClient& judge, const TemplateStore& templates, std::map<std::string, std::string> truths);

  std::optional<bool> operator()(const std::string& case_id, const std::string& label);
  [[nodiscard]] std::size_t abstains() const;

 private:
  LlmClient& judge_;
  const TemplateStore& templates_;
  std::map<std::string, std::string> truths_;
  mutable std::mutex mutex_;
  std::map<std::pair<std::string, std::string>, std::optional<bool>> memo_;
  std::size_t abstains_ = 0;
};

struct OutcomeMatrix {
  std::size_t ww = 0;
  std::size_t wc = 0;
  std::size_t cw = 0;
  std::size_t cc = 0;

  [[nodiscard]] std::size_t total() const { return ww + wc + cw + cc; }
  bool operator==(const OutcomeMatrix&) const = default;
};

struct MetricsReport {
  std::size_t cases = 0;
  std::size_t failed_cases = 0;
  std::size_t scored_cases = 0;
  std::size_t abstained_cases = 0;
  double accuracy = 0.0;
  double consensus_rate = 0.0;
  double avg_rounds = 0.0;
  double stance_change_rate = 0.0;
  std::size_t stance_changes = 0;
  std::size_t stance_opportunities = 0;
  OutcomeMatrix outcome_matrix;
  std::map<std::string, std::vector<double>> delta_p;                // label kept
  std::map<std::string, std::vector<double>> delta_p_label_changed;  // label changed
  std::map<std::string, double> category_accuracy;
  std::map<std::string, std::size_t> category_counts;
  std::vector<std::pair<std::string, std::optional<bool>>> per_case;  // case id -> verdict correctness
};

// Throws EmptyInput for an empty transcript list.
[[nodiscard]] MetricsReport compute_metrics(const std::vector<Transcript>& transcripts, const Grader& grade);

[[nodiscard]] nlohmann::json metrics_to_json(const MetricsReport& report);

}  // namespace cfdx
