#include "cfdx/orchestrator.hpp"

#include <algorithm>
#include <chrono>
#include <iomanip>
#include <sstream>

#include "cfdx/parallel.hpp"
#include "cfdx/text.hpp"

namespace cfdx {

namespace {

bool is_parse_failure(ErrorKind kind) {
  return kind == ErrorKind::MissingRequiredTag || kind == ErrorKind::SchemaViolation ||
         kind == ErrorKind::ParseError || kind == ErrorKind::MissingTag;
}

std::string fixed(double v, int digits = 3) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits) << v;
  return os.str();
}

std::string or_none(std::string text) { return text.empty() ? "None" : text; }

// One agent exchange with a single re-prompt on an unparseable reply.
template <typename Parse>
auto ask(PipelineContext& ctx, std::vector<ChatMessage> messages, RequestTags tags, Parse parse,
         std::vector<std::string>& raw_replies) -> decltype(parse(std::string_view{})) {
  tags["attempt"] = "0";
  ChatResponse reply = ctx.client.chat(messages, tags);
  raw_replies.push_back(reply.text);
  try {
    return parse(reply.text);
  } catch (const Error& e) {
    if (!is_parse_failure(e.kind())) throw;
    messages.push_back({MessageRole::Assistant, reply.text});
    messages.push_back({MessageRole::User,
                        render_prompt(ctx.templates.get("parse_reminder"), {{"problem", e.what()}}).text});
  }
  tags["attempt"] = "1";
  reply = ctx.client.chat(std::move(messages), std::move(tags));
  raw_replies.push_back(reply.text);
  return parse(reply.text);
}

std::vector<ChatMessage> system_and_user(std::string system, std::string user) {
  return {{MessageRole::System, std::move(system)}, {MessageRole::User, std::move(user)}};
}

std::string format_ddx(const DifferentialSet& ddx) {
  std::string out;
  for (std::size_t i = 0; i < ddx.entries.size(); ++i) {
    out += std::to_string(i + 1) + ". " + ddx.entries[i].diagnosis;
    if (!ddx.entries[i].rationale.empty()) out += ": " + ddx.entries[i].rationale;
    out += '\n';
  }
  return out;
}

std::string format_reports(const std::vector<std::string>& roles, const std::map<std::string, std::string>& reports) {
  std::string out;
  for (const auto& role : roles) {
    const auto it = reports.find(role);
    if (it == reports.end()) continue;
    out += "[" + role + "]\n" + it->second + "\n\n";
  }
  return out;
}

std::string format_variants(const std::vector<CounterfactualVariant>& variants) {
  if (variants.empty()) return "None (no counterfactual passed the preservation filter)";
  std::string out;
  for (std::size_t i = 0; i < variants.size(); ++i) {
    const auto& v = variants[i];
    out += "Counterfactual " + std::to_string(i + 1) + ": " + std::string(to_string(v.operation)) +
           " evidence for " + v.target_diagnosis + "\n";
    out += "  Evidence group:";
    for (const auto& s : v.evidence.spans) out += " \"" + s.excerpt + "\"";
    out += "\n  Baseline: " + v.base.label + " (P=" + fixed(v.base.probability) + ")\n";
    out += "  Edited case prediction: " + v.probed.label + " (P=" + fixed(v.probed.probability) + ")\n";
    out += "  CPG=" + fixed(v.cpg) + " DiagShift=" + fixed(v.diag_shift) + " SIP=" + fixed(v.sip) +
           " Combined=" + fixed(v.combined) + "\n";
    out += "  Edited case:\n" + v.edited_text + "\n\n";
  }
  return out;
}

std::string format_stances(const std::vector<std::string>& order, const std::map<std::string, Stance>& stances,
                           const std::string& self) {
  std::string out;
  for (const auto& role : order) {
    if (role == self) continue;
    const auto it = stances.find(role);
    if (it == stances.end()) continue;
    out += "- " + role + ": " + it->second.diagnosis + " (" + std::string(to_string(it->second.confidence)) + ")\n";
  }
  return or_none(out);
}

std::string format_participants(const std::vector<std::string>& order, const std::string& self) {
  std::string out;
  for (const auto& role : order) {
    if (role != self) out += "- " + role + "\n";
  }
  return or_none(out);
}

std::string format_questions(const std::vector<RoutedQuestion>& questions) {
  std::string out;
  for (const auto& q : questions) {
    out += "Q-FROM-[" + q.from_role + "] (round " + std::to_string(q.round) + "): " + q.text + "\n";
  }
  return or_none(out);
}

std::string tag_or_empty(const std::map<std::string, std::string>& sections, const std::string& name) {
  const auto it = sections.find(name);
  return it == sections.end() ? std::string() : it->second;
}

struct RoundInputs {
  const CaseRecord& case_record;
  const DifferentialSet& ddx;
  const std::vector<std::string>& participants;  // assignment order, clinician last
  const std::string& reports_text;
  const std::map<std::string, Stance>& stances;  // previous round
  const std::string& summary;
  const std::vector<RoutedQuestion>& pending;
  int round;
};

SpecialistTurn run_turn(const std::string& role, const RoundInputs& in, PipelineContext& ctx) {
  SpecialistTurn turn;
  turn.role = role;
  turn.round = in.round;
  turn.is_clinician = role == kIndependentClinician;
  for (const auto& q : in.pending) {
    if (labels_equal(q.to_role, role)) turn.delivered_questions.push_back(q);
  }
  const auto prior = in.stances.find(role);

  if (!turn.is_clinician) {
    CfContext cf{ctx.client, ctx.provider, ctx.templates, in.case_record.id, role, in.round};
    if (in.round > 0 && prior != in.stances.end()) turn.p_base_hypothesis = prior->second.diagnosis;
    turn.p_base = probe_diagnosis(in.case_record.presentation, in.ddx, cf, turn.p_base_hypothesis);
    auto generated = generate_and_rank(in.case_record.presentation, in.ddx, *turn.p_base, ctx.config.cf, cf);
    turn.candidates = std::move(generated.candidates);
    turn.selected = std::move(generated.selected);
    turn.warnings = std::move(generated.warnings);
  }

  std::string system;
  std::string user;
  const std::string round_text = std::to_string(in.round);
  if (turn.is_clinician) {
    system = ctx.templates.get("independent_clinician").body;
    user = render_prompt(ctx.templates.get("clinician_context"),
                         {{"round", round_text},
                          {"case", in.case_record.presentation},
                          {"reports", in.reports_text},
                          {"ddx", format_ddx(in.ddx)},
                          {"participants", format_participants(in.participants, role)},
                          {"stances", format_stances(in.participants, in.stances, role)},
                          {"summary", or_none(in.summary)},
                          {"questions", format_questions(turn.delivered_questions)}})
               .text;
  } else {
    system = render_prompt(ctx.templates.get("specialist"), {{"role", role}}).text;
    user = render_prompt(ctx.templates.get("specialist_context"),
                         {{"round", round_text},
                          {"case", in.case_record.presentation},
                          {"reports", in.reports_text},
                          {"ddx", format_ddx(in.ddx)},
                          {"counterfactuals", format_variants(turn.selected)},
                          {"participants", format_participants(in.participants, role)},
                          {"stances", format_stances(in.participants, in.stances, role)},
                          {"summary", or_none(in.summary)},
                          {"questions", format_questions(turn.delivered_questions)}})
               .text;
  }

  const std::set<std::string> expected{"reasoning_chain",           "discriminators",
                                       "counterfactual_evidence",   "critique",
                                       "final_diagnosis",           "counterargument_question",
                                       "counterargument_answer",    "confidence"};
  auto parse = [&](std::string_view text) {
    auto sections = parse_tagged_sections(text, expected, {"final_diagnosis"});
    if (trim(sections.at("final_diagnosis")).empty()) {
      throw Error(ErrorKind::MissingRequiredTag, "final_diagnosis is empty");
    }
    return sections;
  };

  RequestTags tags{{"kind", turn.is_clinician ? "clinician" : "specialist"},
                   {"case_id", in.case_record.id},
                   {"role", role},
                   {"round", round_text}};
  std::optional<std::map<std::string, std::string>> sections;
  try {
    sections = ask(ctx, system_and_user(std::move(system), std::move(user)), tags, parse, turn.raw_replies);
  } catch (const Error& e) {
    if (!is_parse_failure(e.kind())) throw;
    turn.warnings.push_back({"CarriedForward", role + ": " + e.detail()});
  }

  if (!sections) {
    turn.carried_forward = true;
    if (prior != in.stances.end()) {
      turn.final_diagnosis = prior->second.diagnosis;
      turn.confidence = prior->second.confidence;
    } else {
      turn.final_diagnosis = in.ddx.entries.front().diagnosis;
      turn.confidence = Confidence::Low;
      turn.warnings.push_back({"NoPriorStance", role + " defaulted to the first DDx label"});
    }
    turn.emitted_diagnosis = turn.final_diagnosis;
    return turn;
  }

  turn.reasoning_chain = tag_or_empty(*sections, "reasoning_chain");
  turn.discriminators = tag_or_empty(*sections, "discriminators");
  turn.cf_evidence = tag_or_empty(*sections, "counterfactual_evidence");
  turn.critique = tag_or_empty(*sections, "critique");
  turn.emitted_diagnosis = sections->at("final_diagnosis");
  const LabelMapping mapped = map_to_ddx(turn.emitted_diagnosis, in.ddx, ctx.provider);
  turn.final_diagnosis = mapped.label;
  turn.remapped = mapped.remapped;
  if (mapped.remapped) {
    turn.warnings.push_back({"LabelRemapped", turn.emitted_diagnosis + " -> " + mapped.label});
  }

  if (const auto c = parse_confidence(tag_or_empty(*sections, "confidence"))) {
    turn.confidence = *c;
  } else {
    turn.confidence = Confidence::Moderate;
    turn.warnings.push_back({"MissingConfidence", role});
  }

  for (const auto* key : {"counterargument_question", "counterargument_answer"}) {
    QaLines qa = parse_qa_lines(tag_or_empty(*sections, key), role, in.round);
    turn.questions.insert(turn.questions.end(), qa.questions.begin(), qa.questions.end());
    turn.answers.insert(turn.answers.end(), qa.answers.begin(), qa.answers.end());
    turn.warnings.insert(turn.warnings.end(), qa.warnings.begin(), qa.warnings.end());
  }
  for (auto& q : turn.questions) {
    const auto target = std::find_if(in.participants.begin(), in.participants.end(),
                                     [&](const auto& p) { return labels_equal(p, q.to_role); });
    if (target == in.participants.end()) {
      turn.warnings.push_back({"UndeliverableQuestion", q.to_role});
    } else {
      q.to_role = *target;
    }
  }
  for (auto& a : turn.answers) {
    const auto target = std::find_if(in.participants.begin(), in.participants.end(),
                                     [&](const auto& p) { return labels_equal(p, a.to_role); });
    if (target != in.participants.end()) a.to_role = *target;
  }
  return turn;
}

std::string format_turns_for_summary(const std::vector<SpecialistTurn>& turns) {
  std::string out;
  for (const auto& t : turns) {
    out += "=== " + t.role + " ===\n";
    if (t.carried_forward || t.raw_replies.empty()) {
      out += "(no usable reply; stance carried forward: " + t.final_diagnosis + ")\n\n";
    } else {
      out += t.raw_replies.back() + "\n\n";
    }
  }
  return out;
}

void run_summarizer(RoundRecord& record, const std::string& previous, const CaseRecord& c, PipelineContext& ctx) {
  const std::string user = render_prompt(ctx.templates.get("summarizer_context"),
                                         {{"round", std::to_string(record.round)},
                                          {"previous_summary", or_none(previous)},
                                          {"turns", format_turns_for_summary(record.turns)}})
                               .text;
  const ChatResponse reply =
      ctx.client.chat(system_and_user(ctx.templates.get("summarizer").body, user),
                      {{"kind", "summarizer"}, {"case_id", c.id}, {"round", std::to_string(record.round)}});
  record.summary_raw = reply.text;
  if (const auto span = find_tag(reply.text, "summary_log")) {
    record.summary_log = std::string(trim(std::string_view(reply.text).substr(
        span->content_begin, span->content_end - span->content_begin)));
  } else {
    record.summary_log = std::string(trim(reply.text));
    record.warnings.push_back({"MissingSummaryTag", "summary_log"});
  }
  QaLines qa = parse_summary_qa(record.summary_log);
  record.summary_questions = std::move(qa.questions);
  record.summary_answers = std::move(qa.answers);
  record.warnings.insert(record.warnings.end(), qa.warnings.begin(), qa.warnings.end());
}

std::vector<std::string> run_triage(const CaseRecord& c, PipelineContext& ctx, Transcript& t) {
  const std::string system = render_prompt(ctx.templates.get("triage"), {{"specialist_pool", ctx.pool.listing()}}).text;
  const std::string user = render_prompt(ctx.templates.get("triage_context"), {{"case", c.presentation}}).text;
  auto messages = system_and_user(system, user);
  const RequestTags tags{{"kind", "triage"}, {"case_id", c.id}};
  TriageOptions options{ctx.config.max_specialists, false};
  std::vector<std::string> raw;

  std::optional<TriagePayload> payload;
  std::string unknown;
  try {
    payload = ask(ctx, messages, tags, [&](std::string_view text) { return parse_triage(text, ctx.pool, options); },
                  raw);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::UnknownRole) throw;
    unknown = e.detail();
  }
  if (!payload) {
    // Re-prompt once with the pool, then drop whatever is still unknown.
    messages.push_back({MessageRole::Assistant, raw.back()});
    messages.push_back({MessageRole::User,
                        render_prompt(ctx.templates.get("triage_reminder"),
                                      {{"unknown", unknown}, {"specialist_pool", ctx.pool.listing()}})
                            .text});
    RequestTags retry_tags = tags;
    retry_tags["attempt"] = "2";
    const ChatResponse reply = ctx.client.chat(std::move(messages), std::move(retry_tags));
    raw.push_back(reply.text);
    options.drop_unknown_roles = true;
    try {
      payload = parse_triage(reply.text, ctx.pool, options);
    } catch (const Error& e) {
      if (!is_parse_failure(e.kind())) throw;
      payload = TriagePayload{};
      payload->warnings.push_back({"TriageUnusable", e.detail()});
    }
  }
  for (std::size_t i = 0; i < raw.size(); ++i) t.raw_replies["triage#" + std::to_string(i)] = raw[i];

  if (payload->assigned_specialists.empty()) {
    payload->assigned_specialists.push_back({std::string(kFallbackSpecialist), "fallback: no valid role assigned"});
    payload->num_agents = 1;
    payload->warnings.push_back({"FallbackSpecialist", std::string(kFallbackSpecialist)});
  }
  t.triage = *payload;
  std::vector<std::string> roles;
  for (const auto& a : payload->assigned_specialists) roles.push_back(a.role);
  return roles;
}

DifferentialSet run_ddx(const CaseRecord& c, PipelineContext& ctx, Transcript& t) {
  std::vector<std::string> raw;
  const auto messages = system_and_user(
      ctx.templates.get("ddx").body,
      render_prompt(ctx.templates.get("ddx_context"), {{"case", c.presentation}}).text);
  DifferentialSet ddx;
  try {
    ddx = ask(ctx, messages, {{"kind", "ddx"}, {"case_id", c.id}}, [](std::string_view text) { return parse_ddx(text); },
              raw);
  } catch (...) {
    for (std::size_t i = 0; i < raw.size(); ++i) t.raw_replies["ddx#" + std::to_string(i)] = raw[i];
    throw;
  }
  for (std::size_t i = 0; i < raw.size(); ++i) t.raw_replies["ddx#" + std::to_string(i)] = raw[i];
  return ddx;
}

void run_reports(const CaseRecord& c, const std::vector<std::string>& roles, PipelineContext& ctx, Transcript& t) {
  std::vector<std::string> texts(roles.size());
  std::vector<std::string> raws(roles.size());
  std::vector<std::optional<Warning>> warnings(roles.size());
  parallel_for(roles.size(), [&](std::size_t i) {
    const std::string prompt =
        render_prompt(ctx.templates.get("report"), {{"role", roles[i]}, {"case", c.presentation}}).text;
    const ChatResponse reply = ctx.client.chat({{MessageRole::User, prompt}},
                                               {{"kind", "report"}, {"case_id", c.id}, {"role", roles[i]}});
    raws[i] = reply.text;
    if (const auto span = find_tag(reply.text, "report")) {
      texts[i] = std::string(trim(std::string_view(reply.text).substr(span->content_begin,
                                                                       span->content_end - span->content_begin)));
    } else {
      texts[i] = std::string(trim(reply.text));
      warnings[i] = Warning{"MissingReportTag", roles[i]};
    }
  });
  for (std::size_t i = 0; i < roles.size(); ++i) {
    t.reports[roles[i]] = texts[i];
    t.raw_replies["report:" + roles[i]] = raws[i];
    if (warnings[i]) t.warnings.push_back(*warnings[i]);
  }
}

Verdict consensus_verdict(const RoundRecord& last) {
  Verdict v;
  v.had_consensus = true;
  v.final_diagnosis = last.consensus.modal_diagnosis;
  v.winner_role = "Consensus";
  for (const auto& turn : last.turns) {
    if (labels_equal(turn.final_diagnosis, v.final_diagnosis)) {
      v.confidence = turn.confidence;
      break;
    }
  }
  std::size_t agreeing = 0;
  for (const auto& turn : last.turns) agreeing += labels_equal(turn.final_diagnosis, v.final_diagnosis) ? 1 : 0;
  v.rationale = std::to_string(agreeing) + " of " + std::to_string(last.consensus.participants) +
                " participants agreed in round " + std::to_string(last.round) + ".";
  return v;
}

Verdict judge_verdict(const CaseRecord& c, const Transcript& t, PipelineContext& ctx) {
  std::string counterfactuals;
  std::string stances;
  const RoundRecord& last = t.rounds.back();
  for (const auto& turn : last.turns) {
    stances += "- " + turn.role + ": " + turn.final_diagnosis + " (" + std::string(to_string(turn.confidence)) + ")\n";
    if (turn.is_clinician) continue;
    counterfactuals += "[" + turn.role + "]\n" + format_variants(turn.selected) + "\n";
  }
  const std::string user = render_prompt(ctx.templates.get("judge_context"),
                                         {{"case", c.presentation},
                                          {"ddx", format_ddx(t.ddx)},
                                          {"counterfactuals", or_none(counterfactuals)},
                                          {"stances", stances},
                                          {"summary", or_none(last.summary_log)}})
                               .text;
  Verdict v;
  std::optional<JudgePayload> payload;
  try {
    payload = ask(ctx, system_and_user(ctx.templates.get("judge").body, user), {{"kind", "judge"}, {"case_id", c.id}},
                  [](std::string_view text) { return parse_judge(text); }, v.raw_replies);
  } catch (const Error& e) {
    if (!is_parse_failure(e.kind())) throw;
  }
  v.had_consensus = false;
  if (!payload) {
    v.final_diagnosis = last.consensus.modal_diagnosis;
    v.winner_role = "Unresolved";
    v.rationale = "Judge reply unusable; modal label of the final round used.";
    v.confidence = Confidence::Low;
    return v;
  }
  const LabelMapping mapped = map_to_ddx(payload->final_diagnosis, t.ddx, ctx.provider);
  v.final_diagnosis = mapped.label;
  v.remapped = mapped.remapped;
  v.winner_role = payload->winner_role;
  v.rationale = payload->rationale;
  v.confidence = parse_confidence(payload->confidence_score).value_or(Confidence::Moderate);
  v.judge = std::move(payload);
  return v;
}

}  // namespace

void OrchestratorConfig::validate() const {
  if (max_rounds < 1) throw Error(ErrorKind::InvalidConfig, "max_rounds must be >= 1");
  if (max_specialists < 1 || max_specialists > 5) {
    throw Error(ErrorKind::InvalidConfig, "max_specialists must be in [1, 5]");
  }
  if (!(consensus_threshold > 0.0 && consensus_threshold <= 1.0)) {
    throw Error(ErrorKind::InvalidConfig, "consensus_threshold must be in (0, 1]");
  }
  cf.sim_weights.validate();
  cf.score_weights.validate();
  if (cf.k < 1 || cf.candidates_per_dx < 1) throw Error(ErrorKind::InvalidConfig, "k and candidates must be >= 1");
}

ConsensusResult check_consensus(const std::vector<std::pair<std::string, std::string>>& ordered, double threshold) {
  ConsensusResult out;
  out.participants = ordered.size();
  if (ordered.empty()) return out;
  std::vector<std::pair<std::string, std::size_t>> counts;  // first-seen order
  for (const auto& [role, label] : ordered) {
    const std::string key = normalize_label(label);
    auto it = std::find_if(counts.begin(), counts.end(), [&](const auto& c) { return c.first == key; });
    if (it == counts.end()) {
      counts.emplace_back(key, 1);
    } else {
      ++it->second;
    }
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < counts.size(); ++i) {
    if (counts[i].second > counts[best].second) best = i;
  }
  out.tie_broken = std::count_if(counts.begin(), counts.end(),
                                 [&](const auto& c) { return c.second == counts[best].second; }) > 1;
  for (const auto& [role, label] : ordered) {
    if (normalize_label(label) == counts[best].first) {
      out.modal_diagnosis = label;
      break;
    }
  }
  out.fraction = static_cast<double>(counts[best].second) / static_cast<double>(ordered.size());
  out.reached = out.fraction >= threshold;
  return out;
}

LabelMapping map_to_ddx(std::string_view emitted, const DifferentialSet& ddx, const EmbeddingProvider& provider) {
  if (const auto idx = ddx.find(emitted)) return {ddx.entries[*idx].diagnosis, false};
  std::size_t best = 0;
  double best_sim = -1.0;
  const bool usable = !trim(emitted).empty();
  for (std::size_t i = 0; i < ddx.entries.size() && usable; ++i) {
    const double s = sem_sim(emitted, ddx.entries[i].diagnosis, provider);
    if (s > best_sim) {
      best_sim = s;
      best = i;
    }
  }
  return {ddx.entries[best].diagnosis, true};
}

std::map<std::string, int> count_stance_changes(const std::vector<RoundRecord>& rounds) {
  std::map<std::string, int> out;
  std::map<std::string, std::string> previous;
  for (const auto& round : rounds) {
    for (const auto& turn : round.turns) {
      auto& count = out[turn.role];
      const auto it = previous.find(turn.role);
      if (it != previous.end() && !labels_equal(it->second, turn.final_diagnosis)) ++count;
      previous[turn.role] = turn.final_diagnosis;
    }
  }
  return out;
}

Transcript run_case(const CaseRecord& case_record, PipelineContext& ctx) {
  const auto started = std::chrono::steady_clock::now();
  ctx.config.validate();
  Transcript t;
  t.case_record = case_record;
  t.asset_checksums = ctx.templates.checksums();
  t.asset_checksums["specialist_pool.json"] = ctx.pool.checksum();
  t.backend_id = ctx.client.backend_id();
  t.model_id = ctx.client.model_id();
  t.embedder_id = ctx.provider.id();

  auto finish = [&] {
    t.stance_changes = count_stance_changes(t.rounds);
    t.calls = ctx.client.stats();
    t.elapsed_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  };

  try {
    if (trim(case_record.presentation).empty()) throw Error(ErrorKind::EmptyInput, "case presentation is empty");
    t.assigned_specialists = run_triage(case_record, ctx, t);
    t.ddx = run_ddx(case_record, ctx, t);
    run_reports(case_record, t.assigned_specialists, ctx, t);

    std::vector<std::string> participants = t.assigned_specialists;
    participants.emplace_back(kIndependentClinician);
    const std::string reports_text = format_reports(t.assigned_specialists, t.reports);

    std::map<std::string, Stance> stances;
    std::vector<RoutedQuestion> pending;
    std::string summary;
    bool reached = false;

    for (int round = 0; round < ctx.config.max_rounds && !reached; ++round) {
      RoundRecord record;
      record.round = round;
      const RoundInputs inputs{case_record, t.ddx, participants, reports_text, stances, summary, pending, round};
      std::vector<SpecialistTurn> turns(participants.size());
      parallel_for(participants.size(), [&](std::size_t i) { turns[i] = run_turn(participants[i], inputs, ctx); });
      record.turns = std::move(turns);

      run_summarizer(record, summary, case_record, ctx);
      summary = record.summary_log;

      pending.clear();
      std::vector<std::pair<std::string, std::string>> electorate;
      for (const auto& turn : record.turns) {
        stances[turn.role] = Stance{turn.final_diagnosis, turn.confidence};
        pending.insert(pending.end(), turn.questions.begin(), turn.questions.end());
        if (turn.is_clinician && !ctx.config.clinician_votes) continue;
        electorate.emplace_back(turn.role, turn.final_diagnosis);
      }
      record.consensus = check_consensus(electorate, ctx.config.consensus_threshold);
      if (record.consensus.tie_broken) {
        record.warnings.push_back({"ModalTie", "tie broken toward " + record.consensus.modal_diagnosis});
      }
      reached = record.consensus.reached;
      t.rounds.push_back(std::move(record));
    }

    if (reached) {
      t.verdict = consensus_verdict(t.rounds.back());
    } else {
      t.judge_invoked = true;
      t.verdict = judge_verdict(case_record, t, ctx);
    }
  } catch (const Error& e) {
    t.status = "failed";
    t.failure = std::string(to_string(e.kind())) + ": " + e.detail();
  }
  finish();
  return t;
}

}  // namespace cfdx
