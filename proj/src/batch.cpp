#include "cfdx/batch.hpp"

#include <chrono>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include "cfdx/hash.hpp"
#include "cfdx/http_backend.hpp"
#include "cfdx/parallel.hpp"
#include "cfdx/scripted_backend.hpp"
#include "cfdx/serialize.hpp"
#include "cfdx/stats.hpp"
#include "cfdx/text.hpp"

namespace cfdx {

namespace fs = std::filesystem;

namespace {

constexpr int kManifestSchema = 1;
constexpr int kBaselineSchema = 1;
constexpr int kReportSchema = 1;

std::optional<json> read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) return std::nullopt;
  try {
    return json::parse(in);
  } catch (const json::parse_error&) {
    return std::nullopt;
  }
}

void write_json(const fs::path& path, const json& doc) {
  fs::create_directories(path.parent_path());
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw Error(ErrorKind::InvalidArgument, "cannot write " + path.string());
    out << doc.dump(2) << '\n';
  }
  fs::rename(tmp, path);
}

std::string tag_content(std::string_view text, std::string_view tag) {
  const auto span = find_tag(text, tag);
  if (!span) return {};
  return std::string(trim(text.substr(span->content_begin, span->content_end - span->content_begin)));
}

std::string fixed(double v, int digits) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits) << v;
  return os.str();
}

}  // namespace

// --- dataset ----------------------------------------------------------------

IngestResult ingest_cases(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::FileNotFound, path.string());
  IngestResult out;
  std::map<std::string, std::size_t> first_line;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (trim(line).empty()) continue;
    json doc;
    try {
      doc = json::parse(line);
    } catch (const json::parse_error& e) {
      out.errors.push_back({number, std::string("invalid JSON: ") + e.what()});
      continue;
    }
    if (!doc.is_object()) {
      out.errors.push_back({number, "record is not an object"});
      continue;
    }
    CaseRecord c;
    if (!doc.contains("id") || !(doc["id"].is_string() || doc["id"].is_number_integer())) {
      out.errors.push_back({number, "missing id"});
      continue;
    }
    c.id = doc["id"].is_string() ? doc["id"].get<std::string>() : std::to_string(doc["id"].get<long long>());
    if (!doc.contains("case_presentation") || !doc["case_presentation"].is_string() ||
        trim(doc["case_presentation"].get<std::string>()).empty()) {
      out.errors.push_back({number, "missing or empty case_presentation"});
      continue;
    }
    if (const auto it = first_line.find(c.id); it != first_line.end()) {
      out.errors.push_back({number, "duplicate id '" + c.id + "' on lines " + std::to_string(it->second) + " and " +
                                        std::to_string(number)});
      continue;
    }
    c.presentation = doc["case_presentation"].get<std::string>();
    if (doc.contains("final_diagnosis") && doc["final_diagnosis"].is_string() &&
        !trim(doc["final_diagnosis"].get<std::string>()).empty()) {
      c.ground_truth = doc["final_diagnosis"].get<std::string>();
    } else {
      out.warnings.push_back({number, "record " + c.id + " has no final_diagnosis; excluded from scoring"});
    }
    if (doc.contains("metadata") && doc["metadata"].is_object()) {
      for (const auto& [k, v] : doc["metadata"].items()) c.metadata[k] = v.is_string() ? v.get<std::string>() : v.dump();
    }
    first_line[c.id] = number;
    out.cases.push_back(std::move(c));
  }
  if (out.cases.empty()) throw Error(ErrorKind::NoValidRecords, path.string());
  return out;
}

std::vector<CaseRecord> select_cases(const std::vector<CaseRecord>& cases, const std::vector<std::string>& ids) {
  std::vector<CaseRecord> out;
  for (const auto& id : ids) {
    const auto it = std::find_if(cases.begin(), cases.end(), [&](const auto& c) { return c.id == id; });
    if (it == cases.end()) throw Error(ErrorKind::InvalidArgument, "unknown case id '" + id + "'");
    out.push_back(*it);
  }
  return out;
}

// --- summarization -----------------------------------------------------------

SummarizeResult preprocess_summarize(const CaseRecord& case_record, LlmClient& client, const TemplateStore& templates) {
  if (trim(case_record.presentation).empty()) throw Error(ErrorKind::EmptyInput, "case presentation is empty");
  SummarizeResult out{case_record, false, {}, {}};
  const std::string prompt =
      render_prompt(templates.get("case_summarization"), {{"case_presentation", case_record.presentation}}).text;
  for (int attempt = 0; attempt < 2; ++attempt) {
    const ChatResponse reply = client.chat({{MessageRole::User, prompt}}, {{"kind", "case_summary"},
                                                                          {"case_id", case_record.id},
                                                                          {"attempt", std::to_string(attempt)}});
    out.raw_replies.push_back(reply.text);
    std::string summary = tag_content(reply.text, "case_prompt");
    if (summary.empty()) continue;
    out.case_record.metadata["original_presentation"] = case_record.presentation;
    out.case_record.metadata["summary_length_ratio"] =
        fixed(static_cast<double>(summary.size()) / static_cast<double>(case_record.presentation.size()), 4);
    out.case_record.presentation = std::move(summary);
    out.summarized = true;
    return out;
  }
  out.warnings.push_back({"MissingTag", "case_prompt missing twice; " + case_record.id + " left unsummarized"});
  return out;
}

// --- runtime ----------------------------------------------------------------

Runtime make_runtime(const RunConfig& config, std::unique_ptr<ChatBackend> backend,
                     std::unique_ptr<ChatBackend> judge_backend) {
  config.validate();
  Runtime rt;
  rt.config = config;
  const fs::path assets = config.assets_dir.empty() ? default_assets_dir() : config.assets_dir;
  rt.templates = TemplateStore::load(assets / "prompts");
  rt.pool = SpecialistPool::load(assets / "specialist_pool.json");
  const PresetTable presets = load_presets(assets / "presets.json");
  const auto preset = presets.find(config.preset);
  if (preset == presets.end()) throw Error(ErrorKind::InvalidConfig, "unknown preset '" + config.preset + "'");
  rt.preset = preset->second;

  if (backend) {
    rt.backend = std::move(backend);
  } else if (config.script) {
    rt.backend = std::make_unique<ScriptedBackend>(ScriptedBackend::load(*config.script));
  } else {
    rt.backend = std::make_unique<HttpChatBackend>(*config.endpoint);
  }
  rt.model_id = config.endpoint ? config.endpoint->model_id : rt.backend->id();
  if (config.endpoint && !config.script && !backend) rt.preset = config.endpoint->decoding;

  if (judge_backend) {
    rt.judge_backend = std::move(judge_backend);
  } else if (config.judge_script) {
    rt.judge_backend = std::make_unique<ScriptedBackend>(ScriptedBackend::load(*config.judge_script));
  } else if (config.judge_endpoint) {
    rt.judge_backend = std::make_unique<HttpChatBackend>(*config.judge_endpoint);
  }
  if (rt.judge_backend) {
    rt.judge_model_id = config.judge_endpoint ? config.judge_endpoint->model_id : rt.judge_backend->id();
  }

  if (config.embedding) {
    rt.provider = std::make_unique<HttpEmbeddingProvider>(config.embedding->base_url, config.embedding->model,
                                                          config.embedding->dims, config.embedding->api_key_env);
  } else {
    rt.provider = std::make_unique<HashedTrigramEmbedder>();
  }
  rt.cache = std::make_shared<ProbabilityCache>(config.cache_dir);
  return rt;
}

// --- baselines ----------------------------------------------------------------

std::vector<FewShotExample> load_few_shot(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::FileNotFound, path.string());
  std::vector<FewShotExample> out;
  std::string line;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    const json doc = json::parse(line);
    out.push_back({doc.at("case_presentation").get<std::string>(), doc.at("final_diagnosis").get<std::string>(),
                   doc.value("rationale", "")});
  }
  return out;
}

std::string baseline_prompt(RunMode mode, const std::string& presentation, const std::vector<FewShotExample>& examples,
                            const TemplateStore& templates) {
  if (mode == RunMode::FullPipeline) throw Error(ErrorKind::InvalidArgument, "full pipeline has no single prompt");
  const bool few = mode == RunMode::FewShot || mode == RunMode::FewShotCot;
  const bool cot = mode == RunMode::ZeroShotCot || mode == RunMode::FewShotCot;
  std::string prompt;
  if (few) {
    for (std::size_t i = 0; i < examples.size(); ++i) {
      const auto& ex = examples[i];
      prompt += render_prompt(templates.get("few_shot_example"),
                              {{"index", std::to_string(i + 1)},
                               {"case_presentation", ex.case_presentation},
                               {"think", cot ? "<think>\n" + ex.rationale + "\n</think>\n" : std::string()},
                               {"diagnosis", ex.final_diagnosis}})
                    .text;
      prompt += '\n';
    }
  }
  prompt += render_prompt(templates.get("zero_shot"), {{"case_presentation", presentation}}).text;
  if (cot) prompt += "\nLet’s think step by step";
  return prompt;
}

json run_baseline_case(const CaseRecord& case_record, RunMode mode, const std::vector<FewShotExample>& examples,
                       LlmClient& client, const TemplateStore& templates) {
  const std::string prompt = baseline_prompt(mode, case_record.presentation, examples, templates);
  json record{{"schema_version", kBaselineSchema},
              {"kind", "baseline"},
              {"mode", std::string(to_string(mode))},
              {"case", case_record},
              {"prompt_sha256", sha256_hex(prompt)},
              {"status", "ok"}};
  try {
    const ChatResponse reply = client.chat({{MessageRole::User, prompt}}, {{"kind", "baseline"},
                                                                          {"case_id", case_record.id},
                                                                          {"mode", std::string(to_string(mode))}});
    record["raw_reply"] = reply.text;
    record["think"] = tag_content(reply.text, "think");
    record["answer"] = tag_content(reply.text, "answer");
    if (record["answer"].get<std::string>().empty()) {
      record["warnings"] = json::array({Warning{"MissingTag", "answer"}});
    }
  } catch (const Error& e) {
    record["status"] = "failed";
    record["failure"] = std::string(to_string(e.kind())) + ": " + e.detail();
  }
  const CallStats stats = client.stats();
  record["calls"] = {{"backend_calls", stats.backend_calls}, {"retries", stats.retries}};
  return record;
}

// --- batch ------------------------------------------------------------------

std::string artifact_name(const std::string& case_id) {
  std::string out;
  for (char ch : case_id) {
    const bool keep = std::isalnum(static_cast<unsigned char>(ch)) || ch == '-' || ch == '_' || ch == '.';
    out += keep ? ch : '_';
  }
  if (out.empty() || out.front() == '.') out.insert(out.begin(), '_');
  return out + ".json";
}

json run_batch(Runtime& rt, const std::vector<CaseRecord>& input_cases, const fs::path& out_dir) {
  const auto started = std::chrono::steady_clock::now();
  fs::create_directories(out_dir);
  {
    std::set<std::string> names;
    for (const auto& c : input_cases) {
      if (!names.insert(artifact_name(c.id)).second) {
        throw Error(ErrorKind::InvalidArgument, "case ids collide after file-name sanitizing: " + c.id);
      }
    }
  }
  const json config_json = config_to_json(rt.config);
  std::vector<FewShotExample> examples;
  if (rt.config.few_shot_file) examples = load_few_shot(*rt.config.few_shot_file);

  std::size_t written = 0;
  std::size_t skipped = 0;
  std::size_t failed = 0;
  CallStats totals;
  auto add_stats = [&](const CallStats& s) {
    totals.backend_calls += s.backend_calls;
    totals.retries += s.retries;
    totals.cache_hits += s.cache_hits;
    totals.cache_misses += s.cache_misses;
    for (const auto& [k, v] : s.calls_by_kind) totals.calls_by_kind[k] += v;
  };

  // Summaries are computed once per case and reused by every seed and rerun.
  std::vector<CaseRecord> cases = input_cases;
  json summary_warnings = json::array();
  if (rt.config.summarize) {
    std::vector<CallStats> stats(cases.size());
    std::vector<Warnings> warnings(cases.size());
    parallel_for(cases.size(), [&](std::size_t i) {
      const fs::path path = out_dir / "summaries" / artifact_name(cases[i].id);
      if (const auto existing = read_json(path)) {
        cases[i] = existing->at("case").get<CaseRecord>();
        return;
      }
      LlmClient client(*rt.backend, rt.model_id, rt.preset, {}, rt.cache);
      SummarizeResult result = preprocess_summarize(cases[i], client, rt.templates);
      write_json(path, {{"case", result.case_record},
                        {"summarized", result.summarized},
                        {"raw_replies", result.raw_replies},
                        {"warnings", result.warnings}});
      cases[i] = std::move(result.case_record);
      warnings[i] = std::move(result.warnings);
      stats[i] = client.stats();
    });
    for (std::size_t i = 0; i < cases.size(); ++i) {
      add_stats(stats[i]);
      for (const auto& w : warnings[i]) summary_warnings.push_back(w);
    }
  }

  json artifacts = json::array();
  json manifest{{"schema_version", kManifestSchema},
                {"kind", "manifest"},
                {"mode", std::string(to_string(rt.config.mode))},
                {"config", config_json},
                {"config_digest", config_digest(rt.config)},
                {"asset_checksums", rt.templates.checksums()},
                {"specialist_pool_checksum", rt.pool.checksum()},
                {"backend_id", rt.backend->id()},
                {"model_id", rt.model_id},
                {"embedder_id", rt.provider->id()}};

  for (const std::int64_t seed : rt.config.seeds) {
    const fs::path seed_dir = out_dir / ("seed_" + std::to_string(seed));
    fs::create_directories(seed_dir);
    std::vector<std::string> statuses(cases.size());
    std::vector<bool> reused(cases.size(), false);
    std::vector<CallStats> stats(cases.size());

    parallel_for(cases.size(), [&](std::size_t i) {
      const fs::path path = seed_dir / artifact_name(cases[i].id);
      if (const auto existing = read_json(path)) {
        statuses[i] = existing->value("status", "ok");
        reused[i] = true;
        return;
      }
      LlmClient client(*rt.backend, rt.model_id, rt.preset, {}, rt.cache, seed);
      json doc;
      if (rt.config.mode == RunMode::FullPipeline) {
        PipelineContext ctx{client, *rt.provider, rt.templates, rt.pool, rt.config.orchestrator()};
        Transcript t = run_case(cases[i], ctx);
        t.config_snapshot = config_json;
        t.config_snapshot["seed"] = seed;
        doc = transcript_to_json(t);
      } else {
        doc = run_baseline_case(cases[i], rt.config.mode, examples, client, rt.templates);
        doc["config"] = config_json;
        doc["config"]["seed"] = seed;
      }
      statuses[i] = doc.value("status", "ok");
      stats[i] = client.stats();
      write_json(path, doc);
    });

    for (std::size_t i = 0; i < cases.size(); ++i) {
      artifacts.push_back({{"seed", seed},
                           {"case_id", cases[i].id},
                           {"path", (fs::path("seed_" + std::to_string(seed)) / artifact_name(cases[i].id)).string()},
                           {"status", statuses[i]}});
      if (reused[i]) {
        ++skipped;
      } else {
        ++written;
        add_stats(stats[i]);
      }
      failed += statuses[i] == "ok" ? 0 : 1;
    }
    manifest["artifacts"] = artifacts;
    manifest["complete"] = false;
    write_json(out_dir / "manifest.json", manifest);  // checkpoint
  }

  manifest["complete"] = true;
  manifest["summary_warnings"] = summary_warnings;
  manifest["run"] = {{"written", written},
                     {"skipped", skipped},
                     {"failed", failed},
                     {"backend_calls", totals.backend_calls},
                     {"retries", totals.retries},
                     {"cache_hits", totals.cache_hits},
                     {"cache_misses", totals.cache_misses},
                     {"calls_by_kind", totals.calls_by_kind}};
  manifest["timing"] = {
      {"elapsed_seconds", std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count()}};
  write_json(out_dir / "manifest.json", manifest);
  return manifest;
}

json comparable_manifest(json manifest) {
  manifest.erase("run");
  manifest.erase("timing");
  return manifest;
}

// --- reporting --------------------------------------------------------------

namespace {

struct LoadedArtifact {
  std::int64_t seed = 0;
  std::string case_id;
  std::optional<Transcript> transcript;
  std::string prediction;
  CaseRecord case_record;
  bool ok = true;
};

std::vector<LoadedArtifact> load_artifacts(const fs::path& out_dir, json& manifest) {
  const auto doc = read_json(out_dir / "manifest.json");
  if (!doc) throw Error(ErrorKind::ManifestIncomplete, "no readable manifest.json in " + out_dir.string());
  manifest = *doc;
  if (!manifest.value("complete", false) || !manifest.contains("artifacts") || manifest["artifacts"].empty()) {
    throw Error(ErrorKind::ManifestIncomplete, "manifest lists no completed artifacts");
  }
  std::vector<LoadedArtifact> out;
  for (const auto& entry : manifest["artifacts"]) {
    const fs::path path = out_dir / entry.at("path").get<std::string>();
    const auto art = read_json(path);
    if (!art) throw Error(ErrorKind::ManifestIncomplete, "missing artifact " + path.string());
    LoadedArtifact a;
    a.seed = entry.at("seed").get<std::int64_t>();
    a.case_id = entry.at("case_id").get<std::string>();
    a.case_record = art->at("case").get<CaseRecord>();
    a.ok = art->value("status", "ok") == "ok";
    if (art->value("kind", "") == "baseline") {
      a.prediction = art->value("answer", "");
    } else {
      a.transcript = transcript_from_json(*art);
      a.prediction = a.transcript->verdict.final_diagnosis;
    }
    out.push_back(std::move(a));
  }
  return out;
}

}  // namespace

json emit_report_with(const fs::path& out_dir, Grader grade) {
  json manifest;
  const std::vector<LoadedArtifact> artifacts = load_artifacts(out_dir, manifest);

  std::map<std::int64_t, std::vector<const LoadedArtifact*>> by_seed;
  for (const auto& a : artifacts) by_seed[a.seed].push_back(&a);

  json seeds = json::array();
  json per_case = json::object();
  std::vector<double> accuracies;
  std::vector<Transcript> all_transcripts;
  std::size_t abstains = 0;

  for (const auto& [seed, items] : by_seed) {
    std::size_t scored = 0;
    std::size_t correct = 0;
    std::size_t seed_abstains = 0;
    std::size_t failures = 0;
    std::vector<Transcript> transcripts;
    json seed_cases = json::object();
    for (const auto* a : items) {
      std::optional<bool> verdict;
      if (a->ok && !trim(a->prediction).empty()) verdict = grade(a->case_id, a->prediction);
      if (!a->ok) ++failures;
      seed_cases[a->case_id] = verdict;
      if (verdict) {
        ++scored;
        correct += *verdict ? 1 : 0;
      } else if (a->ok) {
        ++seed_abstains;
      }
      if (a->transcript) transcripts.push_back(*a->transcript);
    }
    const double accuracy = scored ? static_cast<double>(correct) / static_cast<double>(scored) : 0.0;
    accuracies.push_back(accuracy);
    abstains += seed_abstains;
    json entry{{"seed", seed},
               {"cases", items.size()},
               {"scored", scored},
               {"correct", correct},
               {"abstained", seed_abstains},
               {"failed", failures},
               {"accuracy", accuracy}};
    if (!transcripts.empty()) entry["discussion"] = metrics_to_json(compute_metrics(transcripts, grade));
    seeds.push_back(std::move(entry));
    per_case[std::to_string(seed)] = std::move(seed_cases);
    all_transcripts.insert(all_transcripts.end(), transcripts.begin(), transcripts.end());
  }

  const MeanStd summary = mean_std(accuracies);
  json report{{"schema_version", kReportSchema},
              {"kind", "report"},
              {"mode", manifest.value("mode", "")},
              {"config_digest", manifest.value("config_digest", "")},
              {"accuracy", {{"mean", summary.mean}, {"std", summary.std}, {"per_seed", accuracies}}},
              {"abstained", abstains},
              {"seeds", std::move(seeds)},
              {"per_case", std::move(per_case)}};
  if (!all_transcripts.empty()) report["discussion"] = metrics_to_json(compute_metrics(all_transcripts, grade));
  write_json(out_dir / "report.json", report);
  std::ofstream(out_dir / "report.txt") << report_table(report);
  return report;
}

json emit_report(const fs::path& out_dir, LlmClient& judge, const TemplateStore& templates) {
  json manifest;
  const std::vector<LoadedArtifact> artifacts = load_artifacts(out_dir, manifest);
  std::map<std::string, std::string> truths;
  for (const auto& a : artifacts) {
    if (a.case_record.ground_truth) truths[a.case_id] = *a.case_record.ground_truth;
  }
  auto grader = std::make_shared<JudgeGrader>(judge, templates, std::move(truths));
  return emit_report_with(out_dir, [grader](const std::string& id, const std::string& label) {
    return (*grader)(id, label);
  });
}

std::string report_table(const json& report) {
  std::ostringstream os;
  const auto& acc = report.at("accuracy");
  os << "mode: " << report.value("mode", "") << '\n';
  os << "accuracy: " << fixed(100.0 * acc.at("mean").get<double>(), 1) << " ("
     << fixed(100.0 * acc.at("std").get<double>(), 1) << ")\n";
  os << "abstained: " << report.value("abstained", 0) << "\n\n";
  os << std::left << std::setw(10) << "seed" << std::setw(8) << "cases" << std::setw(8) << "scored" << std::setw(10)
     << "accuracy" << '\n';
  for (const auto& s : report.at("seeds")) {
    os << std::left << std::setw(10) << s.at("seed").get<std::int64_t>() << std::setw(8)
       << s.at("cases").get<std::size_t>() << std::setw(8) << s.at("scored").get<std::size_t>() << std::setw(10)
       << fixed(s.at("accuracy").get<double>(), 3) << '\n';
  }
  if (report.contains("discussion")) {
    const auto& d = report["discussion"];
    os << "\nconsensus_rate: " << fixed(d.at("consensus_rate").get<double>(), 3) << '\n';
    os << "avg_rounds: " << fixed(d.at("avg_rounds").get<double>(), 3) << '\n';
    os << "stance_change_rate: " << fixed(d.at("stance_change_rate").get<double>(), 3) << '\n';
    const auto& m = d.at("outcome_matrix");
    os << "outcomes W->W " << m.at("ww") << "  W->C " << m.at("wc") << "  C->W " << m.at("cw") << "  C->C "
       << m.at("cc") << '\n';
    for (const auto& [op, values] : d.at("delta_p").items()) {
      double sum = 0.0;
      for (const auto& v : values) sum += v.get<double>();
      os << "delta_p " << op << ": n=" << values.size()
         << " mean=" << fixed(values.empty() ? 0.0 : sum / static_cast<double>(values.size()), 4) << '\n';
    }
  }
  return os.str();
}

json compare_reports(const std::vector<json>& reports, const std::vector<std::string>& names) {
  if (reports.size() < 2 || names.size() != reports.size()) {
    throw Error(ErrorKind::InvalidArgument, "compare needs at least two named reports");
  }
  const json& base = reports.front().at("per_case");
  json rows = json::array();
  std::vector<double> raw;
  for (std::size_t r = 1; r < reports.size(); ++r) {
    const json& other = reports[r].at("per_case");
    std::uint64_t b = 0;
    std::uint64_t c = 0;
    std::uint64_t pairs = 0;
    for (const auto& [seed, cases] : base.items()) {
      if (!other.contains(seed)) continue;
      for (const auto& [id, verdict] : cases.items()) {
        if (verdict.is_null() || !other[seed].contains(id) || other[seed][id].is_null()) continue;
        const bool x = verdict.get<bool>();
        const bool y = other[seed][id].get<bool>();
        ++pairs;
        b += (x && !y) ? 1 : 0;
        c += (!x && y) ? 1 : 0;
      }
    }
    const double p = mcnemar_exact(b, c);
    raw.push_back(p);
    rows.push_back({{"reference", names.front()}, {"other", names[r]}, {"pairs", pairs}, {"b", b}, {"c", c}, {"p", p}});
  }
  const std::vector<double> adjusted = holm_adjust(raw);
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i]["p_holm"] = adjusted[i];
  return json{{"kind", "comparison"}, {"test", "exact McNemar, Holm-adjusted"}, {"rows", rows}};
}

std::string comparison_table(const json& comparison) {
  std::ostringstream os;
  os << std::left << std::setw(24) << "reference" << std::setw(24) << "other" << std::setw(8) << "pairs"
     << std::setw(6) << "b" << std::setw(6) << "c" << std::setw(14) << "p" << "p_holm\n";
  for (const auto& row : comparison.at("rows")) {
    os << std::left << std::setw(24) << row.at("reference").get<std::string>() << std::setw(24)
       << row.at("other").get<std::string>() << std::setw(8) << row.at("pairs").get<std::uint64_t>() << std::setw(6)
       << row.at("b").get<std::uint64_t>() << std::setw(6) << row.at("c").get<std::uint64_t>() << std::setw(14)
       << std::setprecision(10) << row.at("p").get<double>() << std::setprecision(10)
       << row.at("p_holm").get<double>() << '\n';
  }
  return os.str();
}

}  // namespace cfdx
