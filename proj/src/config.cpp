#include "cfdx/config.hpp"

#include <cstdlib>
#include <fstream>
#include <set>

#include "cfdx/hash.hpp"
#include "cfdx/serialize.hpp"

namespace cfdx {

namespace {

void require(bool ok, const std::string& message) {
  if (!ok) throw Error(ErrorKind::InvalidConfig, message);
}

bool in_unit(double v) { return v >= 0.0 && v <= 1.0; }

json preset_to_json(const DecodingPreset& p) {
  return json{{"temperature", p.temperature}, {"top_p", p.top_p}, {"top_k", p.top_k}, {"max_tokens", p.max_tokens}};
}

DecodingPreset preset_from_json(const json& j, DecodingPreset base = {}) {
  base.temperature = j.value("temperature", base.temperature);
  base.top_p = j.value("top_p", base.top_p);
  if (j.contains("top_k")) base.top_k = j.at("top_k").get<std::optional<int>>();
  base.max_tokens = j.value("max_tokens", base.max_tokens);
  return base;
}

json endpoint_to_json(const EndpointConfig& e) {
  return json{{"name", e.name},
              {"base_url", e.base_url},
              {"model_id", e.model_id},
              {"api_key_env", e.api_key_env},
              {"capabilities", {{"logprobs", e.capabilities.logprobs}, {"seed", e.capabilities.seed}}},
              {"decoding", preset_to_json(e.decoding)},
              {"max_in_flight", e.max_in_flight},
              {"timeout_seconds", e.timeout_seconds}};
}

EndpointConfig endpoint_from_json(const json& j) {
  EndpointConfig e;
  e.name = j.value("name", e.name);
  e.base_url = j.at("base_url").get<std::string>();
  e.model_id = j.at("model_id").get<std::string>();
  e.api_key_env = j.value("api_key_env", "");
  if (j.contains("capabilities")) {
    e.capabilities.logprobs = j["capabilities"].value("logprobs", false);
    e.capabilities.seed = j["capabilities"].value("seed", false);
  }
  if (j.contains("decoding")) e.decoding = preset_from_json(j["decoding"]);
  e.max_in_flight = j.value("max_in_flight", e.max_in_flight);
  e.timeout_seconds = j.value("timeout_seconds", e.timeout_seconds);
  return e;
}

std::optional<std::filesystem::path> optional_path(const json& j) {
  if (j.is_null()) return std::nullopt;
  return std::filesystem::path(j.get<std::string>());
}

json path_or_null(const std::optional<std::filesystem::path>& p) { return p ? json(p->string()) : json(); }

}  // namespace

std::string_view to_string(RunMode mode) {
  switch (mode) {
    case RunMode::FullPipeline: return "full-pipeline";
    case RunMode::ZeroShot: return "zero-shot";
    case RunMode::ZeroShotCot: return "zero-shot-cot";
    case RunMode::FewShot: return "few-shot";
    case RunMode::FewShotCot: return "few-shot-cot";
  }
  return "full-pipeline";
}

RunMode parse_run_mode(std::string_view text) {
  for (RunMode m : {RunMode::FullPipeline, RunMode::ZeroShot, RunMode::ZeroShotCot, RunMode::FewShot,
                    RunMode::FewShotCot}) {
    if (to_string(m) == text) return m;
  }
  throw Error(ErrorKind::InvalidConfig, "unknown mode '" + std::string(text) + "'");
}

void RunConfig::validate() const {
  require(n_ddx == 3, "n_ddx must be 3 while the differential set is fixed at three labels");
  require(k_variants >= 1, "k_variants must be >= 1");
  require(n_candidates_per_dx >= 1, "n_candidates_per_dx must be >= 1");
  require(max_rounds >= 1, "max_rounds must be >= 1");
  require(max_specialists >= 1 && max_specialists <= 5, "max_specialists must be in [1, 5]");
  require(in_unit(consensus_threshold) && consensus_threshold > 0.0, "consensus_threshold must be in (0, 1]");
  require(in_unit(sip_threshold), "sip_threshold must be in [0, 1]");
  require(in_unit(edit_sim_threshold), "edit_sim_threshold must be in [0, 1]");
  sim_weights.validate();
  score_weights.validate();
  require(!seeds.empty(), "at least one seed is required");
  require(std::set<std::int64_t>(seeds.begin(), seeds.end()).size() == seeds.size(), "seeds must be distinct");
  require(script.has_value() || endpoint.has_value(), "either script or endpoint must be configured");
  if (mode == RunMode::FewShot || mode == RunMode::FewShotCot) {
    require(few_shot_file.has_value(), "few-shot modes need few_shot_file");
  }
}

OrchestratorConfig RunConfig::orchestrator() const {
  OrchestratorConfig o;
  o.max_rounds = max_rounds;
  o.max_specialists = max_specialists;
  o.consensus_threshold = consensus_threshold;
  o.clinician_votes = clinician_votes;
  o.cf.k = static_cast<std::size_t>(k_variants);
  o.cf.candidates_per_dx = static_cast<std::size_t>(n_candidates_per_dx);
  o.cf.sim_weights = sim_weights;
  o.cf.score_weights = score_weights;
  o.cf.thresholds = {sip_threshold, edit_sim_threshold};
  return o;
}

RunConfig apply_config_json(RunConfig c, const json& doc) {
  require(doc.is_object(), "config must be a JSON object");
  static const std::set<std::string> known{
      "n_ddx",          "k_variants",      "n_candidates_per_dx", "max_rounds",   "max_specialists",
      "consensus_threshold", "sip_threshold", "edit_sim_threshold", "sim_weights", "score_weights",
      "clinician_votes", "seeds",          "mode",                "summarize",    "preset",
      "endpoint",       "judge_endpoint",  "embedding",           "script",       "judge_script",
      "few_shot_file",  "assets_dir",      "cache_dir"};
  for (const auto& [key, value] : doc.items()) {
    require(known.contains(key), "unknown config key '" + key + "'");
  }
  try {
    c.n_ddx = doc.value("n_ddx", c.n_ddx);
    c.k_variants = doc.value("k_variants", c.k_variants);
    c.n_candidates_per_dx = doc.value("n_candidates_per_dx", c.n_candidates_per_dx);
    c.max_rounds = doc.value("max_rounds", c.max_rounds);
    c.max_specialists = doc.value("max_specialists", c.max_specialists);
    c.consensus_threshold = doc.value("consensus_threshold", c.consensus_threshold);
    c.sip_threshold = doc.value("sip_threshold", c.sip_threshold);
    c.edit_sim_threshold = doc.value("edit_sim_threshold", c.edit_sim_threshold);
    if (doc.contains("sim_weights")) {
      c.sim_weights.w_sim = doc["sim_weights"].value("w_sim", c.sim_weights.w_sim);
      c.sim_weights.w_edit = doc["sim_weights"].value("w_edit", c.sim_weights.w_edit);
    }
    if (doc.contains("score_weights")) {
      c.score_weights.w_sig = doc["score_weights"].value("w_sig", c.score_weights.w_sig);
      c.score_weights.w_shift = doc["score_weights"].value("w_shift", c.score_weights.w_shift);
      c.score_weights.w_pre = doc["score_weights"].value("w_pre", c.score_weights.w_pre);
    }
    c.clinician_votes = doc.value("clinician_votes", c.clinician_votes);
    if (doc.contains("seeds")) c.seeds = doc["seeds"].get<std::vector<std::int64_t>>();
    if (doc.contains("mode")) c.mode = parse_run_mode(doc["mode"].get<std::string>());
    c.summarize = doc.value("summarize", c.summarize);
    c.preset = doc.value("preset", c.preset);
    // null clears an optional section, matching config_to_json output.
    if (doc.contains("endpoint")) {
      c.endpoint = doc["endpoint"].is_null() ? std::nullopt : std::optional(endpoint_from_json(doc["endpoint"]));
    }
    if (doc.contains("judge_endpoint")) {
      c.judge_endpoint =
          doc["judge_endpoint"].is_null() ? std::nullopt : std::optional(endpoint_from_json(doc["judge_endpoint"]));
    }
    if (doc.contains("embedding")) {
      const auto& e = doc["embedding"];
      if (e.is_null()) {
        c.embedding.reset();
      } else {
        c.embedding = EmbeddingEndpoint{e.at("base_url").get<std::string>(), e.at("model").get<std::string>(),
                                        e.at("dims").get<std::size_t>(), e.value("api_key_env", "")};
      }
    }
    if (doc.contains("script")) c.script = optional_path(doc["script"]);
    if (doc.contains("judge_script")) c.judge_script = optional_path(doc["judge_script"]);
    if (doc.contains("few_shot_file")) c.few_shot_file = optional_path(doc["few_shot_file"]);
    if (doc.contains("assets_dir")) c.assets_dir = doc["assets_dir"].get<std::string>();
    if (doc.contains("cache_dir")) c.cache_dir = optional_path(doc["cache_dir"]);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::InvalidConfig, e.what());
  }
  return c;
}

RunConfig load_config_file(RunConfig base, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::FileNotFound, path.string());
  try {
    return apply_config_json(std::move(base), json::parse(in));
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::InvalidConfig, path.string() + ": " + e.what());
  }
}

json config_to_json(const RunConfig& c) {
  json embedding;
  if (c.embedding) {
    embedding = {{"base_url", c.embedding->base_url},
                 {"model", c.embedding->model},
                 {"dims", c.embedding->dims},
                 {"api_key_env", c.embedding->api_key_env}};
  }
  return json{{"n_ddx", c.n_ddx},
              {"k_variants", c.k_variants},
              {"n_candidates_per_dx", c.n_candidates_per_dx},
              {"max_rounds", c.max_rounds},
              {"max_specialists", c.max_specialists},
              {"consensus_threshold", c.consensus_threshold},
              {"sip_threshold", c.sip_threshold},
              {"edit_sim_threshold", c.edit_sim_threshold},
              {"sim_weights", {{"w_sim", c.sim_weights.w_sim}, {"w_edit", c.sim_weights.w_edit}}},
              {"score_weights",
               {{"w_sig", c.score_weights.w_sig}, {"w_shift", c.score_weights.w_shift}, {"w_pre", c.score_weights.w_pre}}},
              {"clinician_votes", c.clinician_votes},
              {"seeds", c.seeds},
              {"mode", std::string(to_string(c.mode))},
              {"summarize", c.summarize},
              {"preset", c.preset},
              {"endpoint", c.endpoint ? endpoint_to_json(*c.endpoint) : json()},
              {"judge_endpoint", c.judge_endpoint ? endpoint_to_json(*c.judge_endpoint) : json()},
              {"embedding", embedding},
              {"script", path_or_null(c.script)},
              {"judge_script", path_or_null(c.judge_script)},
              {"few_shot_file", path_or_null(c.few_shot_file)}};
}

std::string config_digest(const RunConfig& config) { return sha256_hex(config_to_json(config).dump()); }

PresetTable load_presets(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::FileNotFound, path.string());
  PresetTable out;
  const json doc = json::parse(in);
  for (const auto& [name, value] : doc.items()) out[name] = preset_from_json(value);
  return out;
}

std::filesystem::path default_assets_dir() {
  if (const char* env = std::getenv("CFDX_ASSETS"); env && *env) return env;
#ifdef CFDX_ASSET_DIR
  return CFDX_ASSET_DIR;
#else
  return "assets";
#endif
}

}  // namespace cfdx
