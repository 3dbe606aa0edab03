#pragma once

#include <filesystem>
#include <fstream>
#include <memory>
#include <string>

#include <nlohmann/json.hpp>

#include "cfdx/batch.hpp"
#include "cfdx/config.hpp"
#include "cfdx/orchestrator.hpp"
#include "cfdx/prompts.hpp"
#include "cfdx/scripted_backend.hpp"

namespace fixtures {

inline std::filesystem::path dir() { return CFDX_FIXTURE_DIR; }
inline std::filesystem::path assets() { return CFDX_ASSET_DIR; }

inline nlohmann::json read_json(const std::filesystem::path& p) {
  std::ifstream in(p);
  return nlohmann::json::parse(in);
}

inline const cfdx::TemplateStore& templates() {
  static const cfdx::TemplateStore store = cfdx::TemplateStore::load(assets() / "prompts");
  return store;
}

inline const cfdx::SpecialistPool& pool() {
  static const cfdx::SpecialistPool p = cfdx::SpecialistPool::load(assets() / "specialist_pool.json");
  return p;
}

inline nlohmann::json expectations() { return read_json(dir() / "expectations.json"); }

// Fresh scratch directory under the build tree.
inline std::filesystem::path scratch(const std::string& name) {
  const auto p = std::filesystem::path(CFDX_SCRATCH_DIR) / name;
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

inline cfdx::RunConfig scripted_config(const std::string& mode = "full-pipeline") {
  cfdx::RunConfig c;
  c.script = dir() / "script.json";
  c.judge_script = dir() / "judge_script.json";
  c.assets_dir = assets();
  c.mode = cfdx::parse_run_mode(mode);
  if (mode == "few-shot" || mode == "few-shot-cot") c.few_shot_file = dir() / "few_shot.jsonl";
  return c;
}

// Backend, embedder and client for running single cases against a script.
struct Harness {
  cfdx::ScriptedBackend backend;
  cfdx::HashedTrigramEmbedder embedder;
  cfdx::LlmClient client;
  cfdx::OrchestratorConfig config;

  explicit Harness(cfdx::ScriptedBackend b)
      : backend(std::move(b)), client(backend, "scripted-model", cfdx::DecodingPreset{}) {}
  Harness() : Harness(cfdx::ScriptedBackend::load(dir() / "script.json")) {}

  cfdx::Transcript run(const cfdx::CaseRecord& c) {
    cfdx::PipelineContext ctx{client, embedder, templates(), pool(), config};
    return cfdx::run_case(c, ctx);
  }
};

inline cfdx::CaseRecord fixture_case(const std::string& id) {
  const auto cases = cfdx::ingest_cases(dir() / "cases.jsonl").cases;
  for (const auto& c : cases) {
    if (c.id == id) return c;
  }
  throw std::runtime_error("no fixture case " + id);
}

}  // namespace fixtures
