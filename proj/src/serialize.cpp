#include "cfdx/serialize.hpp"

namespace cfdx {

namespace {

MessageRole role_from_string(const std::string& s) {
  if (s == "system") return MessageRole::System;
  if (s == "assistant") return MessageRole::Assistant;
  if (s == "user") return MessageRole::User;
  throw Error(ErrorKind::ParseError, "unknown message role '" + s + "'");
}

}  // namespace

void to_json(json& j, const Warning& w) { j = json{{"code", w.code}, {"detail", w.detail}}; }
void from_json(const json& j, Warning& w) {
  w.code = j.at("code").get<std::string>();
  w.detail = j.value("detail", "");
}

void to_json(json& j, const ChatMessage& m) {
  j = json{{"role", std::string(to_string(m.role))}, {"content", m.content}};
}
void from_json(const json& j, ChatMessage& m) {
  m.role = role_from_string(j.at("role").get<std::string>());
  m.content = j.at("content").get<std::string>();
}

void to_json(json& j, const TokenLogprob& t) { j = json{{"token", t.token}, {"logprob", t.logprob}}; }
void from_json(const json& j, TokenLogprob& t) {
  t.token = j.at("token").get<std::string>();
  t.logprob = j.at("logprob").get<double>();
}

void to_json(json& j, const Usage& u) {
  j = json{{"prompt_tokens", u.prompt_tokens}, {"completion_tokens", u.completion_tokens}};
}
void from_json(const json& j, Usage& u) {
  u.prompt_tokens = j.value("prompt_tokens", 0);
  u.completion_tokens = j.value("completion_tokens", 0);
}

void to_json(json& j, const ChatResponse& r) {
  j = json{{"text", r.text}, {"token_logprobs", r.token_logprobs}, {"finish_reason", r.finish_reason},
           {"usage", r.usage}};
}
void from_json(const json& j, ChatResponse& r) {
  r.text = j.at("text").get<std::string>();
  r.token_logprobs = j.value("token_logprobs", json()).get<std::optional<std::vector<TokenLogprob>>>();
  r.finish_reason = j.value("finish_reason", "stop");
  r.usage = j.value("usage", json::object()).get<Usage>();
}

void to_json(json& j, const RoutedQuestion& q) {
  j = json{{"from", q.from_role}, {"to", q.to_role}, {"round", q.round}, {"text", q.text}};
}
void from_json(const json& j, RoutedQuestion& q) {
  q.from_role = j.at("from").get<std::string>();
  q.to_role = j.at("to").get<std::string>();
  q.round = j.at("round").get<int>();
  q.text = j.at("text").get<std::string>();
}

void to_json(json& j, const RoutedAnswer& a) {
  j = json{{"from", a.from_role}, {"to", a.to_role}, {"round", a.round}, {"text", a.text}};
}
void from_json(const json& j, RoutedAnswer& a) {
  a.from_role = j.at("from").get<std::string>();
  a.to_role = j.at("to").get<std::string>();
  a.round = j.at("round").get<int>();
  a.text = j.at("text").get<std::string>();
}

void to_json(json& j, const DdxEntry& e) { j = json{{"diagnosis", e.diagnosis}, {"rationale", e.rationale}}; }
void from_json(const json& j, DdxEntry& e) {
  e.diagnosis = j.at("diagnosis").get<std::string>();
  e.rationale = j.value("rationale", "");
}

void to_json(json& j, const DifferentialSet& d) {
  j = json{{"case_summary", d.case_summary}, {"entries", d.entries}};
}
void from_json(const json& j, DifferentialSet& d) {
  d.case_summary = j.value("case_summary", "");
  d.entries = j.at("entries").get<std::vector<DdxEntry>>();
}

void to_json(json& j, const SpecialistAssignment& s) { j = json{{"role", s.role}, {"rationale", s.rationale}}; }

void to_json(json& j, const JudgePayload& p) {
  j = json{{"had_consensus", p.had_consensus},
           {"final_diagnosis", p.final_diagnosis},
           {"winner_role", p.winner_role},
           {"rationale", p.rationale},
           {"initial_symptom_reasoning", p.initial_symptom_reasoning},
           {"timeline_importance", p.timeline_importance},
           {"primary_cause_vs_downstream", p.primary_cause_vs_downstream},
           {"counterfactual_evidence_summary", p.counterfactual_evidence_summary},
           {"confidence_score", p.confidence_score},
           {"validation_check", p.validation_check}};
}
void from_json(const json& j, JudgePayload& p) {
  p.had_consensus = j.value("had_consensus", false);
  p.final_diagnosis = j.at("final_diagnosis").get<std::string>();
  p.winner_role = j.value("winner_role", "");
  p.rationale = j.value("rationale", "");
  p.initial_symptom_reasoning = j.value("initial_symptom_reasoning", "");
  p.timeline_importance = j.value("timeline_importance", "");
  p.primary_cause_vs_downstream = j.value("primary_cause_vs_downstream", "");
  p.counterfactual_evidence_summary = j.value("counterfactual_evidence_summary", "");
  p.confidence_score = j.value("confidence_score", "");
  p.validation_check = j.value("validation_check", "");
}

void to_json(json& j, const EvidenceSpan& s) {
  j = json{{"excerpt", s.excerpt}, {"start", s.start}, {"end", s.end}};
}
void from_json(const json& j, EvidenceSpan& s) {
  s.excerpt = j.at("excerpt").get<std::string>();
  s.start = j.at("start").get<std::size_t>();
  s.end = j.at("end").get<std::size_t>();
}

void to_json(json& j, const EvidenceGroup& g) {
  j = json{{"diagnosis", g.diagnosis_label}, {"spans", g.spans}, {"rationale", g.rationale}};
}
void from_json(const json& j, EvidenceGroup& g) {
  g.diagnosis_label = j.at("diagnosis").get<std::string>();
  g.spans = j.at("spans").get<std::vector<EvidenceSpan>>();
  g.rationale = j.value("rationale", "");
}

void to_json(json& j, const ProbedDiagnosis& p) {
  j = json{{"label", p.label}, {"probability", p.probability}, {"mean_token_logprob", p.mean_token_logprob}};
}
void from_json(const json& j, ProbedDiagnosis& p) {
  p.label = j.at("label").get<std::string>();
  p.probability = j.at("probability").get<double>();
  p.mean_token_logprob = j.value("mean_token_logprob", 0.0);
}

void to_json(json& j, const CounterfactualVariant& v) {
  j = json{{"generation_index", v.generation_index},
           {"target_diagnosis", v.target_diagnosis},
           {"operation", std::string(to_string(v.operation))},
           {"evidence", v.evidence},
           {"edited_text", v.edited_text},
           {"sem_sim", v.sem_sim},
           {"edit_sim", v.edit_sim},
           {"sip", v.sip},
           {"base", v.base},
           {"probed", v.probed},
           {"cpg", v.cpg},
           {"diag_shift", v.diag_shift},
           {"combined", v.combined},
           {"passed_filter", v.passed_filter}};
}
void from_json(const json& j, CounterfactualVariant& v) {
  v.generation_index = j.at("generation_index").get<std::size_t>();
  v.target_diagnosis = j.at("target_diagnosis").get<std::string>();
  const auto op = parse_operation(j.at("operation").get<std::string>());
  if (!op) throw Error(ErrorKind::ParseError, "unknown edit operation");
  v.operation = *op;
  v.evidence = j.at("evidence").get<EvidenceGroup>();
  v.edited_text = j.at("edited_text").get<std::string>();
  v.sem_sim = j.at("sem_sim").get<double>();
  v.edit_sim = j.at("edit_sim").get<double>();
  v.sip = j.at("sip").get<double>();
  v.base = j.at("base").get<ProbedDiagnosis>();
  v.probed = j.at("probed").get<ProbedDiagnosis>();
  v.cpg = j.at("cpg").get<double>();
  v.diag_shift = j.at("diag_shift").get<double>();
  v.combined = j.at("combined").get<double>();
  v.passed_filter = j.at("passed_filter").get<bool>();
}

}  // namespace cfdx
