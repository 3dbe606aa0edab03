#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "cfdx/batch.hpp"
#include "cfdx/scripted_backend.hpp"
#include "cfdx/serialize.hpp"
#include "cfdx/text.hpp"

namespace {

using cfdx::json;

struct RunFlags {
  std::optional<std::string> config_file;
  std::optional<int> k_variants, n_candidates_per_dx, max_rounds, max_specialists;
  std::optional<double> consensus_threshold, sip_threshold, edit_sim_threshold;
  std::optional<double> w_sim, w_edit, w_sig, w_shift, w_pre;
  std::optional<bool> clinician_votes;
  std::vector<std::int64_t> seeds;
  std::optional<std::string> mode, preset, script, judge_script, few_shot_file, assets_dir, cache_dir;
  bool summarize = false;
  std::optional<std::string> base_url, model_id, api_key_env;
  bool logprobs = false;
  std::optional<std::string> judge_base_url, judge_model_id, judge_api_key_env;
};

void add_run_flags(CLI::App& cmd, RunFlags& f) {
  cmd.add_option("--config", f.config_file, "JSON config file; its keys override flags");
  cmd.add_option("--k-variants", f.k_variants);
  cmd.add_option("--n-candidates-per-dx", f.n_candidates_per_dx);
  cmd.add_option("--max-rounds", f.max_rounds);
  cmd.add_option("--max-specialists", f.max_specialists);
  cmd.add_option("--consensus-threshold", f.consensus_threshold);
  cmd.add_option("--sip-threshold", f.sip_threshold);
  cmd.add_option("--edit-sim-threshold", f.edit_sim_threshold);
  cmd.add_option("--w-sim", f.w_sim);
  cmd.add_option("--w-edit", f.w_edit);
  cmd.add_option("--w-sig", f.w_sig);
  cmd.add_option("--w-shift", f.w_shift);
  cmd.add_option("--w-pre", f.w_pre);
  cmd.add_option("--clinician-votes", f.clinician_votes);
  cmd.add_option("--seeds", f.seeds)->delimiter(',');
  cmd.add_option("--mode", f.mode, "full-pipeline, zero-shot, zero-shot-cot, few-shot, few-shot-cot");
  cmd.add_option("--preset", f.preset, "decoding preset name from presets.json");
  cmd.add_option("--script", f.script, "scripted mock backend file");
  cmd.add_option("--judge-script", f.judge_script, "scripted judge backend file");
  cmd.add_option("--few-shot-file", f.few_shot_file);
  cmd.add_option("--assets-dir", f.assets_dir);
  cmd.add_option("--cache-dir", f.cache_dir, "persistent probability cache directory");
  cmd.add_flag("--summarize", f.summarize, "summarize case presentations first");
  cmd.add_option("--base-url", f.base_url, "chat-completions endpoint base URL");
  cmd.add_option("--model-id", f.model_id);
  cmd.add_option("--api-key-env", f.api_key_env, "environment variable holding the API key");
  cmd.add_flag("--logprobs", f.logprobs, "endpoint returns token logprobs");
  cmd.add_option("--judge-base-url", f.judge_base_url);
  cmd.add_option("--judge-model-id", f.judge_model_id);
  cmd.add_option("--judge-api-key-env", f.judge_api_key_env);
}

template <typename T>
void set_if(T& target, const std::optional<T>& value) {
  if (value) target = *value;
}

cfdx::EndpointConfig make_endpoint(const std::string& name, const std::string& url,
                                   const std::optional<std::string>& model,
                                   const std::optional<std::string>& key_env, bool logprobs) {
  cfdx::EndpointConfig e;
  e.name = name;
  e.base_url = url;
  e.model_id = model.value_or("default");
  e.api_key_env = key_env.value_or("");
  e.capabilities.logprobs = logprobs;
  return e;
}

// Defaults, then flags, then the config file on top.
cfdx::RunConfig resolve_config(const RunFlags& f) {
  cfdx::RunConfig c;
  set_if(c.k_variants, f.k_variants);
  set_if(c.n_candidates_per_dx, f.n_candidates_per_dx);
  set_if(c.max_rounds, f.max_rounds);
  set_if(c.max_specialists, f.max_specialists);
  set_if(c.consensus_threshold, f.consensus_threshold);
  set_if(c.sip_threshold, f.sip_threshold);
  set_if(c.edit_sim_threshold, f.edit_sim_threshold);
  set_if(c.sim_weights.w_sim, f.w_sim);
  set_if(c.sim_weights.w_edit, f.w_edit);
  set_if(c.score_weights.w_sig, f.w_sig);
  set_if(c.score_weights.w_shift, f.w_shift);
  set_if(c.score_weights.w_pre, f.w_pre);
  set_if(c.clinician_votes, f.clinician_votes);
  if (!f.seeds.empty()) c.seeds = f.seeds;
  if (f.mode) c.mode = cfdx::parse_run_mode(*f.mode);
  set_if(c.preset, f.preset);
  if (f.script) c.script = *f.script;
  if (f.judge_script) c.judge_script = *f.judge_script;
  if (f.few_shot_file) c.few_shot_file = *f.few_shot_file;
  if (f.assets_dir) c.assets_dir = *f.assets_dir;
  if (f.cache_dir) c.cache_dir = *f.cache_dir;
  if (f.summarize) c.summarize = true;
  if (f.base_url) c.endpoint = make_endpoint("generation", *f.base_url, f.model_id, f.api_key_env, f.logprobs);
  if (f.judge_base_url) {
    c.judge_endpoint = make_endpoint("judge", *f.judge_base_url, f.judge_model_id, f.judge_api_key_env, false);
  }
  if (f.config_file) c = cfdx::load_config_file(std::move(c), *f.config_file);
  if (c.assets_dir.empty()) c.assets_dir = cfdx::default_assets_dir();
  return c;
}

void echo_config(const cfdx::RunConfig& c) {
  std::cerr << "effective config (digest " << cfdx::config_digest(c) << "):\n"
            << cfdx::config_to_json(c).dump(2) << '\n';
}

std::vector<cfdx::CaseRecord> load_cases(const std::string& path, const std::vector<std::string>& ids) {
  cfdx::IngestResult ingest = cfdx::ingest_cases(path);
  for (const auto& e : ingest.errors) std::cerr << path << ":" << e.line << ": error: " << e.message << '\n';
  return ids.empty() ? std::move(ingest.cases) : cfdx::select_cases(ingest.cases, ids);
}

std::vector<std::string> read_id_list(const std::optional<std::string>& path) {
  std::vector<std::string> ids;
  if (!path) return ids;
  std::ifstream in(*path);
  if (!in) throw cfdx::Error(cfdx::ErrorKind::FileNotFound, *path);
  for (std::string line; std::getline(in, line);) {
    const auto id = cfdx::trim(line);
    if (!id.empty() && id.front() != '#') ids.emplace_back(id);
  }
  return ids;
}

struct JudgeSetup {
  std::unique_ptr<cfdx::ChatBackend> backend;
  std::string model_id;
  cfdx::TemplateStore templates;
};

// Grading only needs the judge backend and the templates.
JudgeSetup make_judge(const cfdx::RunConfig& c) {
  JudgeSetup j;
  j.templates = cfdx::TemplateStore::load(c.assets_dir / "prompts");
  if (c.judge_script) {
    j.backend = std::make_unique<cfdx::ScriptedBackend>(cfdx::ScriptedBackend::load(*c.judge_script));
    j.model_id = j.backend->id();
  } else if (c.judge_endpoint) {
    j.backend = std::make_unique<cfdx::HttpChatBackend>(*c.judge_endpoint);
    j.model_id = c.judge_endpoint->model_id;
  } else {
    throw cfdx::Error(cfdx::ErrorKind::InvalidConfig, "evaluation needs --judge-script or a judge endpoint");
  }
  return j;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Counterfactual multi-agent diagnosis pipeline"};
  app.require_subcommand(1);

  std::string cases_path;
  std::optional<std::string> ids_path;
  std::vector<std::string> ids;

  auto* ingest = app.add_subcommand("ingest-check", "validate a dataset file");
  ingest->add_option("cases", cases_path, "JSONL dataset")->required();

  RunFlags summarize_flags;
  std::string summary_out;
  auto* summarize = app.add_subcommand("summarize", "write a summarized copy of a dataset");
  summarize->add_option("cases", cases_path, "JSONL dataset")->required();
  summarize->add_option("-o,--out", summary_out, "output JSONL")->required();
  add_run_flags(*summarize, summarize_flags);

  RunFlags run_flags;
  std::string out_dir;
  auto* run = app.add_subcommand("run", "run every seed x case into an output directory");
  run->add_option("cases", cases_path, "JSONL dataset")->required();
  run->add_option("-o,--out", out_dir, "output directory")->required();
  run->add_option("--case-ids", ids_path, "file with one case id per line");
  run->add_option("--case-id", ids, "case id to include (repeatable)");
  add_run_flags(*run, run_flags);

  RunFlags eval_flags;
  auto* evaluate = app.add_subcommand("evaluate", "grade a completed run directory");
  evaluate->add_option("run_dir", out_dir, "run directory with manifest.json")->required();
  add_run_flags(*evaluate, eval_flags);

  std::vector<std::string> report_paths;
  std::vector<std::string> names;
  std::optional<std::string> compare_out;
  auto* compare = app.add_subcommand("compare", "paired McNemar tests between reports");
  compare->add_option("reports", report_paths, "report.json files; the first is the reference")->required();
  compare->add_option("--name", names, "display name per report (defaults to the path)");
  compare->add_option("-o,--out", compare_out, "write the comparison JSON here");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*ingest) {
      const cfdx::IngestResult r = cfdx::ingest_cases(cases_path);
      for (const auto& e : r.errors) std::cout << "line " << e.line << ": error: " << e.message << '\n';
      for (const auto& w : r.warnings) std::cout << "line " << w.line << ": warning: " << w.message << '\n';
      std::cout << r.cases.size() << " valid records, " << r.errors.size() << " errors, " << r.warnings.size()
                << " warnings\n";
      return r.errors.empty() ? 0 : 1;
    }

    if (*summarize) {
      cfdx::RunConfig config = resolve_config(summarize_flags);
      echo_config(config);
      cfdx::Runtime rt = cfdx::make_runtime(config);
      std::ofstream out(summary_out);
      if (!out) throw cfdx::Error(cfdx::ErrorKind::InvalidArgument, "cannot write " + summary_out);
      for (const auto& c : load_cases(cases_path, {})) {
        cfdx::LlmClient client(*rt.backend, rt.model_id, rt.preset, {}, rt.cache);
        const cfdx::SummarizeResult r = cfdx::preprocess_summarize(c, client, rt.templates);
        for (const auto& w : r.warnings) std::cerr << "warning: " << w.code << ": " << w.detail << '\n';
        json record{{"id", r.case_record.id},
                    {"case_presentation", r.case_record.presentation},
                    {"metadata", r.case_record.metadata}};
        if (r.case_record.ground_truth) record["final_diagnosis"] = *r.case_record.ground_truth;
        out << record.dump() << '\n';
      }
      return 0;
    }

    if (*run) {
      cfdx::RunConfig config = resolve_config(run_flags);
      echo_config(config);
      std::vector<std::string> selected = read_id_list(ids_path);
      selected.insert(selected.end(), ids.begin(), ids.end());
      const auto cases = load_cases(cases_path, selected);
      cfdx::Runtime rt = cfdx::make_runtime(config);
      const json manifest = cfdx::run_batch(rt, cases, out_dir);
      const auto& r = manifest.at("run");
      std::cout << "written " << r.at("written") << ", skipped " << r.at("skipped") << ", failed " << r.at("failed")
                << ", backend calls " << r.at("backend_calls") << ", cache hits " << r.at("cache_hits") << '\n';
      return 0;
    }

    if (*evaluate) {
      // Run settings come from the manifest; only the judge is configured here.
      cfdx::RunConfig config = resolve_config(eval_flags);
      JudgeSetup setup = make_judge(config);
      std::cerr << "judge: " << setup.backend->id() << " model " << setup.model_id << '\n';
      const cfdx::PresetTable presets = cfdx::load_presets(config.assets_dir / "presets.json");
      cfdx::LlmClient judge(*setup.backend, setup.model_id, presets.at("eval_judge"));
      const json report = cfdx::emit_report(out_dir, judge, setup.templates);
      std::cout << cfdx::report_table(report);
      return 0;
    }

    if (*compare) {
      std::vector<json> reports;
      for (const auto& p : report_paths) {
        std::ifstream in(p);
        if (!in) throw cfdx::Error(cfdx::ErrorKind::FileNotFound, p);
        reports.push_back(json::parse(in));
      }
      if (names.empty()) names = report_paths;
      const json comparison = cfdx::compare_reports(reports, names);
      if (compare_out) std::ofstream(*compare_out) << comparison.dump(2) << '\n';
      std::cout << cfdx::comparison_table(comparison);
      return 0;
    }
  } catch (const cfdx::Error& e) {
    std::cerr << "error: " << cfdx::to_string(e.kind()) << ": " << e.detail() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
