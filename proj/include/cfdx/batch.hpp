#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cfdx/backend.hpp"
#include "cfdx/cache.hpp"
#include "cfdx/config.hpp"
#include "cfdx/metrics.hpp"
#include "cfdx/orchestrator.hpp"
#include "cfdx/prompts.hpp"

namespace cfdx {

// --- dataset ----------------------------------------------------------------

struct IngestIssue {
  std::size_t line = 0;  // 1-based
  std::string message;
};

struct IngestResult {
  std::vector<CaseRecord> cases;  // file order
  std::vector<IngestIssue> errors;
  std::vector<IngestIssue> warnings;  // e.g. missing final_diagnosis
};

// Line-delimited JSON records {id, case_presentation, final_diagnosis,
// metadata}. Throws FileNotFound or NoValidRecords.
[[nodiscard]] IngestResult ingest_cases(const std::filesystem::path& path);

// Keeps only the listed ids, in list order. Unknown ids throw InvalidArgument.
[[nodiscard]] std::vector<CaseRecord> select_cases(const std::vector<CaseRecord>& cases,
                                                   const std::vector<std::string>& ids);

// --- summarization preprocessing ---------------------------------------------

struct SummarizeResult {
  CaseRecord case_record;
  bool summarized = false;
  Warnings warnings;
  std::vector<std::string> raw_replies;
};

// Replaces the presentation with the <case_prompt> content of the reply. After
// two unusable replies the case passes through unchanged with a warning.
[[nodiscard]] SummarizeResult preprocess_summarize(const CaseRecord& case_record, LlmClient& client,
                                                   const TemplateStore& templates);

// --- runtime ----------------------------------------------------------------

struct Runtime {
  RunConfig config;
  TemplateStore templates;
  SpecialistPool pool;
  DecodingPreset preset;
  std::unique_ptr<ChatBackend> backend;
  std::unique_ptr<ChatBackend> judge_backend;
  std::unique_ptr<EmbeddingProvider> provider;
  std::shared_ptr<ProbabilityCache> cache;
  std::string model_id;
  std::string judge_model_id;
};

// Builds backends, embedder, templates and cache from a validated config.
// `backend` and `judge_backend` override the configured ones when given.
[[nodiscard]] Runtime make_runtime(const RunConfig& config, std::unique_ptr<ChatBackend> backend = nullptr,
                                   std::unique_ptr<ChatBackend> judge_backend = nullptr);

// --- baselines ----------------------------------------------------------------

struct FewShotExample {
  std::string case_presentation;
  std::string final_diagnosis;
  std::string rationale;
};

[[nodiscard]] std::vector<FewShotExample> load_few_shot(const std::filesystem::path& path);

[[nodiscard]] std::string baseline_prompt(RunMode mode, const std::string& presentation,
                                          const std::vector<FewShotExample>& examples, const TemplateStore& templates);

// One prompt-reply record for a single-prompt baseline.
[[nodiscard]] nlohmann::json run_baseline_case(const CaseRecord& case_record, RunMode mode,
                                               const std::vector<FewShotExample>& examples, LlmClient& client,
                                               const TemplateStore& templates);

// --- batch ------------------------------------------------------------------

[[nodiscard]] std::string artifact_name(const std::string& case_id);

// Runs every seed x case, writing seed_<s>/<case>.json and manifest.json.
// Existing artifacts are kept and counted as skipped. Returns the manifest.
nlohmann::json run_batch(Runtime& runtime, const std::vector<CaseRecord>& cases,
                         const std::filesystem::path& out_dir);

// Manifest without per-invocation bookkeeping (run counters, timing).
[[nodiscard]] nlohmann::json comparable_manifest(nlohmann::json manifest);

// --- reporting --------------------------------------------------------------

// Grades every artifact listed in the manifest and writes report.json and
// report.txt next to it. Throws ManifestIncomplete.
nlohmann::json emit_report(const std::filesystem::path& out_dir, LlmClient& judge, const TemplateStore& templates);

// Same, with an arbitrary grader.
nlohmann::json emit_report_with(const std::filesystem::path& out_dir, Grader grade);

[[nodiscard]] std::string report_table(const nlohmann::json& report);

// McNemar comparisons of the first report against each other one, paired by
// (seed, case id), with Holm adjustment across comparisons.
[[nodiscard]] nlohmann::json compare_reports(const std::vector<nlohmann::json>& reports,
                                             const std::vector<std::string>& names);
[[nodiscard]] std::string comparison_table(const nlohmann::json& comparison);

}  // namespace cfdx
