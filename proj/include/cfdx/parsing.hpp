#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "cfdx/error.hpp"

namespace cfdx {

class SpecialistPool;

// Offsets of one <tag>...</tag> occurrence.
struct TagSpan {
  std::size_t open_begin = 0;
  std::size_t content_begin = 0;
  std::size_t content_end = 0;
  std::size_t close_end = 0;
};

// Case-insensitive. Accepts attributes on the opening tag. A missing closing
// tag ends the content at the next opening tag of the same name or at the
// end of the text.
[[nodiscard]] std::optional<TagSpan> find_tag(std::string_view text, std::string_view tag,
                                              std::size_t from = 0);

// All occurrences, in order, with trimmed content.
[[nodiscard]] std::vector<std::string> find_all_tags(std::string_view text, std::string_view tag);

// Trimmed inner content of each expected tag present; first occurrence wins.
// Throws MissingRequiredTag for any absent tag listed in `required`.
[[nodiscard]] std::map<std::string, std::string> parse_tagged_sections(
    std::string_view text, const std::set<std::string>& expected,
    const std::set<std::string>& required = {});

struct RoutedQuestion {
  std::string from_role;
  std::string to_role;
  int round = 0;
  std::string text;

  bool operator==(const RoutedQuestion&) const = default;
};

struct RoutedAnswer {
  std::string from_role;
  std::string to_role;
  int round = 0;
  std::string text;

  bool operator==(const RoutedAnswer&) const = default;
};

struct QaLines {
  std::vector<RoutedQuestion> questions;
  std::vector<RoutedAnswer> answers;
  Warnings warnings;
};

// Parses "Q-TO-[Role]: text" and "A-TO-[Role]: text" lines written by
// `speaker`. A body of "None" yields nothing. Self-directed questions and
// malformed lines are dropped with a warning.
[[nodiscard]] QaLines parse_qa_lines(std::string_view text, std::string_view speaker, int round);

// Parses the summarizer's <question from= to= round=> and <answer ...> tags.
// Missing attribution becomes "Unknown" with a warning.
[[nodiscard]] QaLines parse_summary_qa(std::string_view summary);

// The first balanced {...} block, string-literal aware; nullopt if none.
[[nodiscard]] std::optional<std::string_view> extract_braced_block(std::string_view text);

enum class Confidence { High, Moderate, Low };

[[nodiscard]] std::string_view to_string(Confidence c);
[[nodiscard]] std::optional<Confidence> parse_confidence(std::string_view text);

struct DdxEntry {
  std::string diagnosis;
  std::string rationale;

  bool operator==(const DdxEntry&) const = default;
};

// Exactly three distinct candidate diagnoses; the closed label set for all
// later stages.
struct DifferentialSet {
  std::string case_summary;
  std::vector<DdxEntry> entries;

  void validate() const;
  [[nodiscard]] std::vector<std::string> labels() const;
  // Index of the entry whose normalized label equals `label`.
  [[nodiscard]] std::optional<std::size_t> find(std::string_view label) const;

  bool operator==(const DifferentialSet&) const = default;
};

struct SpecialistAssignment {
  std::string role;
  std::string rationale;

  bool operator==(const SpecialistAssignment&) const = default;
};

struct TriagePayload {
  std::vector<std::string> main_symptoms;
  std::vector<std::string> problems;
  std::vector<SpecialistAssignment> assigned_specialists;
  int num_agents = 0;
  Warnings warnings;
};

struct JudgePayload {
  bool had_consensus = false;
  std::string final_diagnosis;
  std::string winner_role;
  std::string rationale;
  std::string initial_symptom_reasoning;
  std::string timeline_importance;
  std::string primary_cause_vs_downstream;
  std::string counterfactual_evidence_summary;
  std::string confidence_score;
  std::string validation_check;
};

enum class PayloadSchema { Triage, DDx, Judge };

struct TriageOptions {
  int max_agents = 5;
  // Drop unknown roles with a warning instead of throwing UnknownRole.
  bool drop_unknown_roles = false;
};

[[nodiscard]] TriagePayload parse_triage(std::string_view text, const SpecialistPool& pool,
                                         const TriageOptions& options = {});
[[nodiscard]] DifferentialSet parse_ddx(std::string_view text);
[[nodiscard]] JudgePayload parse_judge(std::string_view text);

using StructuredPayload = std::variant<TriagePayload, DifferentialSet, JudgePayload>;

[[nodiscard]] StructuredPayload parse_structured_payload(std::string_view text, PayloadSchema schema,
                                                         const SpecialistPool& pool);

}  // namespace cfdx
