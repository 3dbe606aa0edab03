#include "cfdx/orchestrator.hpp"
#include "cfdx/serialize.hpp"

namespace cfdx {

namespace {

Confidence confidence_from(const json& j) {
  const auto c = parse_confidence(j.get<std::string>());
  if (!c) throw Error(ErrorKind::ParseError, "bad confidence value");
  return *c;
}

json turn_to_json(const SpecialistTurn& t) {
  return json{{"role", t.role},
              {"round", t.round},
              {"is_clinician", t.is_clinician},
              {"reasoning_chain", t.reasoning_chain},
              {"discriminators", t.discriminators},
              {"counterfactual_evidence", t.cf_evidence},
              {"critique", t.critique},
              {"emitted_diagnosis", t.emitted_diagnosis},
              {"final_diagnosis", t.final_diagnosis},
              {"confidence", std::string(to_string(t.confidence))},
              {"questions", t.questions},
              {"answers", t.answers},
              {"delivered_questions", t.delivered_questions},
              {"remapped", t.remapped},
              {"carried_forward", t.carried_forward},
              {"raw_replies", t.raw_replies},
              {"warnings", t.warnings},
              {"p_base", t.p_base},
              {"p_base_hypothesis", t.p_base_hypothesis},
              {"candidates", t.candidates},
              {"selected", t.selected}};
}

SpecialistTurn turn_from_json(const json& j) {
  SpecialistTurn t;
  t.role = j.at("role").get<std::string>();
  t.round = j.at("round").get<int>();
  t.is_clinician = j.at("is_clinician").get<bool>();
  t.reasoning_chain = j.value("reasoning_chain", "");
  t.discriminators = j.value("discriminators", "");
  t.cf_evidence = j.value("counterfactual_evidence", "");
  t.critique = j.value("critique", "");
  t.emitted_diagnosis = j.value("emitted_diagnosis", "");
  t.final_diagnosis = j.at("final_diagnosis").get<std::string>();
  t.confidence = confidence_from(j.at("confidence"));
  t.questions = j.value("questions", json::array()).get<std::vector<RoutedQuestion>>();
  t.answers = j.value("answers", json::array()).get<std::vector<RoutedAnswer>>();
  t.delivered_questions = j.value("delivered_questions", json::array()).get<std::vector<RoutedQuestion>>();
  t.remapped = j.value("remapped", false);
  t.carried_forward = j.value("carried_forward", false);
  t.raw_replies = j.value("raw_replies", json::array()).get<std::vector<std::string>>();
  t.warnings = j.value("warnings", json::array()).get<Warnings>();
  t.p_base = j.value("p_base", json()).get<std::optional<ProbedDiagnosis>>();
  t.p_base_hypothesis = j.value("p_base_hypothesis", json()).get<std::optional<std::string>>();
  t.candidates = j.value("candidates", json::array()).get<std::vector<CounterfactualVariant>>();
  t.selected = j.value("selected", json::array()).get<std::vector<CounterfactualVariant>>();
  return t;
}

json consensus_to_json(const ConsensusResult& c) {
  return json{{"reached", c.reached},
              {"modal_diagnosis", c.modal_diagnosis},
              {"fraction", c.fraction},
              {"participants", c.participants},
              {"tie_broken", c.tie_broken}};
}

ConsensusResult consensus_from_json(const json& j) {
  return ConsensusResult{j.at("reached").get<bool>(), j.at("modal_diagnosis").get<std::string>(),
                         j.at("fraction").get<double>(), j.at("participants").get<std::size_t>(),
                         j.value("tie_broken", false)};
}

json calls_to_json(const CallStats& s) {
  return json{{"backend_calls", s.backend_calls},
              {"retries", s.retries},
              {"cache_hits", s.cache_hits},
              {"cache_misses", s.cache_misses},
              {"by_kind", s.calls_by_kind}};
}

CallStats calls_from_json(const json& j) {
  CallStats s;
  s.backend_calls = j.value("backend_calls", std::size_t{0});
  s.retries = j.value("retries", std::size_t{0});
  s.cache_hits = j.value("cache_hits", std::size_t{0});
  s.cache_misses = j.value("cache_misses", std::size_t{0});
  s.calls_by_kind = j.value("by_kind", json::object()).get<std::map<std::string, std::size_t>>();
  return s;
}

}  // namespace

void to_json(json& j, const CaseRecord& c) {
  j = json{{"id", c.id}, {"presentation", c.presentation}, {"ground_truth", c.ground_truth}, {"metadata", c.metadata}};
}

void from_json(const json& j, CaseRecord& c) {
  c.id = j.at("id").get<std::string>();
  c.presentation = j.at("presentation").get<std::string>();
  c.ground_truth = j.value("ground_truth", json()).get<std::optional<std::string>>();
  c.metadata = j.value("metadata", json::object()).get<std::map<std::string, std::string>>();
}

json transcript_to_json(const Transcript& t) {
  json rounds = json::array();
  for (const auto& r : t.rounds) {
    json turns = json::array();
    for (const auto& turn : r.turns) turns.push_back(turn_to_json(turn));
    rounds.push_back({{"round", r.round},
                      {"turns", std::move(turns)},
                      {"summary_log", r.summary_log},
                      {"summary_raw", r.summary_raw},
                      {"summary_questions", r.summary_questions},
                      {"summary_answers", r.summary_answers},
                      {"consensus", consensus_to_json(r.consensus)},
                      {"warnings", r.warnings}});
  }
  json triage_roles = json::array();
  for (const auto& a : t.triage.assigned_specialists) triage_roles.push_back(a);
  const Verdict& v = t.verdict;
  return json{{"schema_version", Transcript::kSchemaVersion},
              {"case", t.case_record},
              {"status", t.status},
              {"failure", t.failure},
              {"triage",
               {{"main_symptoms", t.triage.main_symptoms},
                {"problems", t.triage.problems},
                {"assigned_specialists", std::move(triage_roles)},
                {"num_agents", t.triage.num_agents},
                {"warnings", t.triage.warnings}}},
              {"assigned_specialists", t.assigned_specialists},
              {"reports", t.reports},
              {"ddx", t.ddx},
              {"rounds", std::move(rounds)},
              {"judge_invoked", t.judge_invoked},
              {"verdict",
               {{"had_consensus", v.had_consensus},
                {"final_diagnosis", v.final_diagnosis},
                {"winner_role", v.winner_role},
                {"rationale", v.rationale},
                {"confidence", std::string(to_string(v.confidence))},
                {"judge", v.judge},
                {"remapped", v.remapped},
                {"raw_replies", v.raw_replies}}},
              {"stance_changes", t.stance_changes},
              {"raw_replies", t.raw_replies},
              {"config", t.config_snapshot},
              {"asset_checksums", t.asset_checksums},
              {"provider", {{"backend_id", t.backend_id}, {"model_id", t.model_id}, {"embedder_id", t.embedder_id}}},
              {"calls", calls_to_json(t.calls)},
              {"warnings", t.warnings},
              {"timing", {{"elapsed_seconds", t.elapsed_seconds}}}};
}

Transcript transcript_from_json(const json& j) {
  if (j.value("schema_version", 0) != Transcript::kSchemaVersion) {
    throw Error(ErrorKind::ParseError, "unsupported transcript schema version");
  }
  Transcript t;
  t.case_record = j.at("case").get<CaseRecord>();
  t.status = j.at("status").get<std::string>();
  t.failure = j.value("failure", "");
  const json& triage = j.at("triage");
  t.triage.main_symptoms = triage.value("main_symptoms", json::array()).get<std::vector<std::string>>();
  t.triage.problems = triage.value("problems", json::array()).get<std::vector<std::string>>();
  for (const auto& a : triage.value("assigned_specialists", json::array())) {
    t.triage.assigned_specialists.push_back({a.at("role").get<std::string>(), a.value("rationale", "")});
  }
  t.triage.num_agents = triage.value("num_agents", 0);
  t.triage.warnings = triage.value("warnings", json::array()).get<Warnings>();
  t.assigned_specialists = j.at("assigned_specialists").get<std::vector<std::string>>();
  t.reports = j.at("reports").get<std::map<std::string, std::string>>();
  t.ddx = j.at("ddx").get<DifferentialSet>();
  for (const auto& r : j.at("rounds")) {
    RoundRecord record;
    record.round = r.at("round").get<int>();
    for (const auto& turn : r.at("turns")) record.turns.push_back(turn_from_json(turn));
    record.summary_log = r.value("summary_log", "");
    record.summary_raw = r.value("summary_raw", "");
    record.summary_questions = r.value("summary_questions", json::array()).get<std::vector<RoutedQuestion>>();
    record.summary_answers = r.value("summary_answers", json::array()).get<std::vector<RoutedAnswer>>();
    record.consensus = consensus_from_json(r.at("consensus"));
    record.warnings = r.value("warnings", json::array()).get<Warnings>();
    t.rounds.push_back(std::move(record));
  }
  t.judge_invoked = j.at("judge_invoked").get<bool>();
  const json& v = j.at("verdict");
  t.verdict.had_consensus = v.at("had_consensus").get<bool>();
  t.verdict.final_diagnosis = v.at("final_diagnosis").get<std::string>();
  t.verdict.winner_role = v.value("winner_role", "");
  t.verdict.rationale = v.value("rationale", "");
  t.verdict.confidence = confidence_from(v.at("confidence"));
  t.verdict.judge = v.value("judge", json()).get<std::optional<JudgePayload>>();
  t.verdict.remapped = v.value("remapped", false);
  t.verdict.raw_replies = v.value("raw_replies", json::array()).get<std::vector<std::string>>();
  t.stance_changes = j.value("stance_changes", json::object()).get<std::map<std::string, int>>();
  t.raw_replies = j.value("raw_replies", json::object()).get<std::map<std::string, std::string>>();
  t.config_snapshot = j.value("config", json::object());
  t.asset_checksums = j.value("asset_checksums", json::object()).get<std::map<std::string, std::string>>();
  const json& provider = j.at("provider");
  t.backend_id = provider.value("backend_id", "");
  t.model_id = provider.value("model_id", "");
  t.embedder_id = provider.value("embedder_id", "");
  t.calls = calls_from_json(j.value("calls", json::object()));
  t.warnings = j.value("warnings", json::array()).get<Warnings>();
  t.elapsed_seconds = j.value("timing", json::object()).value("elapsed_seconds", 0.0);
  return t;
}

json comparable_transcript(json j) {
  j.erase("timing");
  return j;
}

}  // namespace cfdx
