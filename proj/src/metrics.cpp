#include "cfdx/metrics.hpp"

#include <algorithm>
#include <cctype>

#include "cfdx/serialize.hpp"
#include "cfdx/text.hpp"

namespace cfdx {

bool parse_yes_no(std::string_view reply) {
  std::string_view body = trim(reply);
  if (const auto span = find_tag(body, "answer")) {
    body = trim(body.substr(span->content_begin, span->content_end - span->content_begin));
  }
  std::size_t end = 0;
  while (end < body.size() && std::isalpha(static_cast<unsigned char>(body[end]))) ++end;
  const std::string word = ascii_lower(body.substr(0, end));
  if (word == "yes") return true;
  if (word == "no") return false;
  throw Error(ErrorKind::UnparseableVerdict, "expected yes/no, got '" + std::string(body.substr(0, 40)) + "'");
}

JudgeOutcome judge_correctness(const std::string& prediction, const std::string& truth, LlmClient& judge,
                               const TemplateStore& templates, const DecodingPreset& preset) {
  if (trim(prediction).empty() || trim(truth).empty()) {
    throw Error(ErrorKind::EmptyInput, "prediction and truth must be non-empty");
  }
  const std::string prompt =
      render_prompt(templates.get("eval_judge"), {{"prediction", prediction}, {"truth", truth}}).text;
  JudgeOutcome out;
  for (int attempt = 0; attempt < 2; ++attempt) {
    const ChatResponse reply = judge.chat({{MessageRole::User, prompt}},
                                          {{"kind", "eval_judge"},
                                           {"prediction", prediction},
                                           {"truth", truth},
                                           {"attempt", std::to_string(attempt)}},
                                          preset);
    out.raw_replies.push_back(reply.text);
    try {
      out.correct = parse_yes_no(reply.text);
      return out;
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::UnparseableVerdict) throw;
    }
  }
  return out;
}

JudgeGrader::JudgeGrader(LlmClient& judge, const TemplateStore& templates, std::map<std::string, std::string> truths)
    : judge_(judge), templates_(templates), truths_(std::move(truths)) {}

std::optional<bool> JudgeGrader::operator()(const std::string& case_id, const std::string& label) {
  const auto truth = truths_.find(case_id);
  if (truth == truths_.end() || trim(label).empty()) return std::nullopt;
  const auto key = std::make_pair(truth->second, normalize_label(label));
  {
    std::lock_guard lock(mutex_);
    if (const auto it = memo_.find(key); it != memo_.end()) return it->second;
  }
  const JudgeOutcome outcome = judge_correctness(label, truth->second, judge_, templates_);
  std::lock_guard lock(mutex_);
  if (!outcome.correct) ++abstains_;
  memo_.emplace(key, outcome.correct);
  return outcome.correct;
}

std::size_t JudgeGrader::abstains() const {
  std::lock_guard lock(mutex_);
  return abstains_;
}

MetricsReport compute_metrics(const std::vector<Transcript>& transcripts, const Grader& grade) {
  if (transcripts.empty()) throw Error(ErrorKind::EmptyInput, "no transcripts to score");
  MetricsReport r;
  r.cases = transcripts.size();
  std::size_t ok = 0;
  std::size_t consensus = 0;
  std::size_t rounds = 0;
  std::size_t correct = 0;
  std::map<std::string, std::size_t> category_correct;

  for (const auto& t : transcripts) {
    if (t.status != "ok" || t.rounds.empty()) {
      ++r.failed_cases;
      continue;
    }
    ++ok;
    consensus += t.verdict.had_consensus ? 1 : 0;
    rounds += t.rounds.size();

    const std::size_t participants = t.rounds.front().turns.size();
    r.stance_opportunities += participants * (t.rounds.size() - 1);
    for (const auto& [role, changes] : t.stance_changes) r.stance_changes += static_cast<std::size_t>(changes);

    const auto verdict_ok = grade(t.case_record.id, t.verdict.final_diagnosis);
    r.per_case.emplace_back(t.case_record.id, verdict_ok);
    if (verdict_ok) {
      ++r.scored_cases;
      correct += *verdict_ok ? 1 : 0;
      const auto cat = t.case_record.metadata.find("specialty");
      if (cat != t.case_record.metadata.end()) {
        ++r.category_counts[cat->second];
        category_correct[cat->second] += *verdict_ok ? 1 : 0;
      }
    } else {
      ++r.abstained_cases;
    }

    // Trajectories: each participant's first vs last label.
    for (const auto& first : t.rounds.front().turns) {
      const SpecialistTurn* last = nullptr;
      for (const auto& turn : t.rounds.back().turns) {
        if (turn.role == first.role) last = &turn;
      }
      if (!last) continue;
      const auto initial = grade(t.case_record.id, first.final_diagnosis);
      const auto final = grade(t.case_record.id, last->final_diagnosis);
      if (!initial || !final) continue;
      if (*initial) {
        ++(*final ? r.outcome_matrix.cc : r.outcome_matrix.cw);
      } else {
        ++(*final ? r.outcome_matrix.wc : r.outcome_matrix.ww);
      }
    }

    for (const auto& round : t.rounds) {
      for (const auto& turn : round.turns) {
        for (const auto& v : turn.candidates) {
          if (!v.passed_filter) continue;
          const double dp = v.base.probability - v.probed.probability;
          auto& bucket = labels_equal(v.base.label, v.probed.label) ? r.delta_p : r.delta_p_label_changed;
          bucket[std::string(to_string(v.operation))].push_back(dp);
        }
      }
    }
  }

  if (ok > 0) {
    r.consensus_rate = static_cast<double>(consensus) / static_cast<double>(ok);
    r.avg_rounds = static_cast<double>(rounds) / static_cast<double>(ok);
  }
  if (r.scored_cases > 0) r.accuracy = static_cast<double>(correct) / static_cast<double>(r.scored_cases);
  if (r.stance_opportunities > 0) {
    r.stance_change_rate = static_cast<double>(r.stance_changes) / static_cast<double>(r.stance_opportunities);
  }
  for (const auto& [cat, n] : r.category_counts) {
    r.category_accuracy[cat] = static_cast<double>(category_correct[cat]) / static_cast<double>(n);
  }
  std::sort(r.per_case.begin(), r.per_case.end());
  for (auto* series : {&r.delta_p, &r.delta_p_label_changed}) {
    for (auto& [op, values] : *series) std::sort(values.begin(), values.end());
  }
  return r;
}

nlohmann::json metrics_to_json(const MetricsReport& r) {
  json per_case = json::object();
  for (const auto& [id, ok] : r.per_case) per_case[id] = ok;
  return json{{"cases", r.cases},
              {"failed_cases", r.failed_cases},
              {"scored_cases", r.scored_cases},
              {"abstained_cases", r.abstained_cases},
              {"accuracy", r.accuracy},
              {"consensus_rate", r.consensus_rate},
              {"avg_rounds", r.avg_rounds},
              {"stance_change_rate", r.stance_change_rate},
              {"stance_changes", r.stance_changes},
              {"stance_opportunities", r.stance_opportunities},
              {"outcome_matrix",
               {{"ww", r.outcome_matrix.ww},
                {"wc", r.outcome_matrix.wc},
                {"cw", r.outcome_matrix.cw},
                {"cc", r.outcome_matrix.cc}}},
              {"delta_p", r.delta_p},
              {"delta_p_label_changed", r.delta_p_label_changed},
              {"category_accuracy", r.category_accuracy},
              {"category_counts", r.category_counts},
              {"per_case", std::move(per_case)}};
}

}  // namespace cfdx
