#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cfdx/client.hpp"
#include "cfdx/http_backend.hpp"
#include "cfdx/orchestrator.hpp"

namespace cfdx {

enum class RunMode { FullPipeline, ZeroShot, ZeroShotCot, FewShot, FewShotCot };

[[nodiscard]] std::string_view to_string(RunMode mode);
[[nodiscard]] RunMode parse_run_mode(std::string_view text);

struct EmbeddingEndpoint {
  std::string base_url;
  std::string model;
  std::size_t dims = 0;
  std::string api_key_env;
};

struct RunConfig {
  int n_ddx = 3;
  int k_variants = 3;
  int n_candidates_per_dx = 6;
  int max_rounds = 3;
  int max_specialists = 5;
  double consensus_threshold = 0.75;
  double sip_threshold = 0.85;
  double edit_sim_threshold = 0.80;
  SimilarityWeights sim_weights;
  ScoreWeights score_weights;
  bool clinician_votes = true;
  std::vector<std::int64_t> seeds{101, 202, 303};
  RunMode mode = RunMode::FullPipeline;
  bool summarize = false;

  std::string preset = "default";  // key into presets.json
  std::optional<EndpointConfig> endpoint;
  std::optional<EndpointConfig> judge_endpoint;
  std::optional<EmbeddingEndpoint> embedding;
  std::optional<std::filesystem::path> script;        // scripted backend for generation
  std::optional<std::filesystem::path> judge_script;  // scripted backend for grading
  std::optional<std::filesystem::path> few_shot_file;
  std::filesystem::path assets_dir;
  std::optional<std::filesystem::path> cache_dir;

  // Throws InvalidConfig.
  void validate() const;
  [[nodiscard]] OrchestratorConfig orchestrator() const;
};

// Applies the keys present in `doc` on top of `base`. Unknown keys throw
// InvalidConfig so that typos do not silently fall back to defaults.
[[nodiscard]] RunConfig apply_config_json(RunConfig base, const nlohmann::json& doc);
[[nodiscard]] RunConfig load_config_file(RunConfig base, const std::filesystem::path& path);

[[nodiscard]] nlohmann::json config_to_json(const RunConfig& config);
// sha256 of the canonical config JSON.
[[nodiscard]] std::string config_digest(const RunConfig& config);

using PresetTable = std::map<std::string, DecodingPreset>;
[[nodiscard]] PresetTable load_presets(const std::filesystem::path& path);

[[nodiscard]] std::filesystem::path default_assets_dir();

}  // namespace cfdx
