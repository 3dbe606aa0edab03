#include "cfdx/cf_engine.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "cfdx/kernels.hpp"
#include "cfdx/parallel.hpp"
#include "cfdx/text.hpp"

namespace cfdx {

namespace {

bool is_seam_punct(char c) { return c == ',' || c == ';' || c == '.' || c == ':'; }

std::string_view rtrim_blank(std::string_view s) {
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

std::string_view ltrim_blank(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  return s;
}

std::string_view operation_guidance(EditOperation op) {
  switch (op) {
    case EditOperation::Negate:
      return "Rewrite the finding so that it is stated as absent or negative.";
    case EditOperation::Remove:
      return "Delete the finding.";
    case EditOperation::Replace:
      return "Swap the finding for a different value that is still clinically plausible.";
    case EditOperation::Weaken:
      return "Lower the severity or certainty of the finding.";
    case EditOperation::Intensify:
      return "Raise the severity or certainty of the finding.";
    case EditOperation::Insert:
      return "Add one new, clinically plausible finding that is not already in the case.";
  }
  return "";
}

std::string join_labels(const DifferentialSet& ddx) {
  std::string out;
  for (const auto& e : ddx.entries) {
    if (!out.empty()) out += "; ";
    out += e.diagnosis;
  }
  return out;
}

std::vector<ChatMessage> user_message(std::string text) {
  return {ChatMessage{MessageRole::User, std::move(text)}};
}

}  // namespace

std::string_view to_string(EditOperation op) {
  switch (op) {
    case EditOperation::Negate: return "Negate";
    case EditOperation::Remove: return "Remove";
    case EditOperation::Replace: return "Replace";
    case EditOperation::Weaken: return "Weaken";
    case EditOperation::Intensify: return "Intensify";
    case EditOperation::Insert: return "Insert";
  }
  return "Negate";
}

std::optional<EditOperation> parse_operation(std::string_view name) {
  const std::string lowered = ascii_lower(trim(name));
  for (EditOperation op : kAllOperations) {
    if (ascii_lower(to_string(op)) == lowered) return op;
  }
  return std::nullopt;
}

void EvidenceGroup::validate(std::string_view case_text) const {
  if (spans.empty()) throw Error(ErrorKind::NonSubstringSpan, "evidence group has no spans");
  std::size_t previous_end = 0;
  for (std::size_t i = 0; i < spans.size(); ++i) {
    const auto& s = spans[i];
    if (s.start >= s.end || s.end > case_text.size() ||
        case_text.substr(s.start, s.end - s.start) != s.excerpt) {
      throw Error(ErrorKind::NonSubstringSpan, "span '" + s.excerpt + "' does not match the case at its offsets");
    }
    if (i > 0 && s.start < previous_end) {
      throw Error(ErrorKind::NonSubstringSpan, "evidence spans overlap or are unordered");
    }
    previous_end = s.end;
  }
}

void ScoreWeights::validate() const {
  if (!(w_sig >= 0.0 && w_shift >= 0.0 && w_pre >= 0.0)) {
    throw Error(ErrorKind::InvalidConfig, "score weights must be non-negative");
  }
  if (std::abs(w_sig + w_pre - 1.0) > 1e-9) {
    throw Error(ErrorKind::InvalidConfig, "w_sig + w_pre must equal 1");
  }
}

double counterfactual_probability_gap(double p_base, double p_ce) { return std::abs(p_base - p_ce); }

double preservation_score(double sem, double edit, const SimilarityWeights& w) {
  return w.w_sim * sem + w.w_edit * edit;
}

double combined_score(double cpg, double shift, double sip, const ScoreWeights& w) {
  return w.w_sig * std::max(cpg, w.w_shift * shift) + w.w_pre * sip;
}

bool passes_filter(double sip, double edit, const FilterThresholds& t) {
  return sip >= t.sip && edit >= t.edit_sim;
}

CounterfactualVariant finish_scoring(CounterfactualVariant variant, double sem, double edit,
                                     const ProbedDiagnosis& p_base, const SimilarityWeights& sim_weights,
                                     const ScoreWeights& score_weights, const EmbeddingProvider& provider,
                                     const FilterThresholds& thresholds) {
  variant.base = p_base;
  variant.sem_sim = sem;
  variant.edit_sim = edit;
  variant.sip = preservation_score(sem, edit, sim_weights);
  variant.cpg = counterfactual_probability_gap(p_base.probability, variant.probed.probability);
  variant.diag_shift = diag_shift(p_base.label, variant.probed.label, provider);
  variant.combined = combined_score(variant.cpg, variant.diag_shift, variant.sip, score_weights);
  variant.passed_filter = passes_filter(variant.sip, variant.edit_sim, thresholds);
  return variant;
}

CounterfactualVariant score_variant(std::string_view original, CounterfactualVariant variant,
                                    const ProbedDiagnosis& p_base, const SimilarityWeights& sim_weights,
                                    const ScoreWeights& score_weights, const EmbeddingProvider& provider,
                                    const FilterThresholds& thresholds) {
  const double sem = sem_sim(original, variant.edited_text, provider);
  const double edit = edit_sim(original, variant.edited_text);
  return finish_scoring(std::move(variant), sem, edit, p_base, sim_weights, score_weights, provider,
                        thresholds);
}

RankResult rank_variants(std::vector<CounterfactualVariant> candidates, std::size_t k) {
  RankResult out;
  std::erase_if(candidates, [](const auto& v) { return !v.passed_filter; });
  std::sort(candidates.begin(), candidates.end(), [](const auto& a, const auto& b) {
    if (a.combined != b.combined) return a.combined > b.combined;
    if (a.sip != b.sip) return a.sip > b.sip;
    return a.generation_index < b.generation_index;
  });
  if (candidates.size() > k) candidates.resize(k);
  if (candidates.empty()) {
    out.warnings.push_back({"AllFiltered", "no counterfactual candidate passed the preservation filter"});
  }
  out.selected = std::move(candidates);
  return out;
}

EvidenceGroup locate_evidence(std::string_view case_text, std::string diagnosis,
                              const std::vector<std::string>& excerpts, std::string rationale) {
  EvidenceGroup group{std::move(diagnosis), {}, std::move(rationale)};
  for (const auto& raw : excerpts) {
    const std::string excerpt(trim(raw));
    if (excerpt.empty()) continue;
    std::size_t from = 0;
    std::size_t found = std::string_view::npos;
    while ((found = case_text.find(excerpt, from)) != std::string_view::npos) {
      const std::size_t end = found + excerpt.size();
      const bool overlaps = std::any_of(group.spans.begin(), group.spans.end(), [&](const auto& s) {
        return found < s.end && s.start < end;
      });
      if (!overlaps) break;
      from = found + 1;
    }
    if (found == std::string_view::npos) {
      throw Error(ErrorKind::NonSubstringSpan, "excerpt not found verbatim in case: '" + excerpt + "'");
    }
    group.spans.push_back({excerpt, found, found + excerpt.size()});
  }
  if (group.spans.empty()) throw Error(ErrorKind::NonSubstringSpan, "no evidence excerpts returned");
  std::sort(group.spans.begin(), group.spans.end(),
            [](const auto& a, const auto& b) { return a.start < b.start; });
  return group;
}

std::string splice(std::string_view text, std::size_t start, std::size_t end, std::string_view replacement) {
  const std::string_view left = text.substr(0, start);
  const std::string_view right = text.substr(end);
  if (!trim(replacement).empty()) {
    return std::string(left) + std::string(replacement) + std::string(right);
  }
  std::string_view l = rtrim_blank(left);
  std::string_view r = ltrim_blank(right);
  if (!r.empty() && (r.front() == ',' || r.front() == ';') &&
      (l.empty() || is_seam_punct(l.back()) || l.back() == '\n')) {
    r = ltrim_blank(r.substr(1));
  }
  if (!r.empty() && r.front() == '.' && !l.empty() && (l.back() == ',' || l.back() == ';')) {
    l.remove_suffix(1);
  }
  std::string out(l);
  if (!l.empty() && !r.empty() && !is_seam_punct(r.front()) && r.front() != ')' && l.back() != '\n' &&
      l.back() != '(') {
    out += ' ';
  }
  out += r;
  return out;
}

std::string insert_finding(std::string_view text, std::size_t after, std::string_view finding) {
  std::string sentence(trim(finding));
  if (!sentence.empty() && !is_seam_punct(sentence.back())) sentence += '.';
  const std::size_t stop = text.find_first_of(".\n", std::min(after, text.size()));
  if (stop == std::string_view::npos) {
    std::string out(rtrim_blank(text));
    if (!out.empty() && !is_seam_punct(out.back())) out += '.';
    return out + " " + sentence;
  }
  if (text[stop] == '\n') {
    std::string out(text.substr(0, stop));
    return out + " " + sentence + std::string(text.substr(stop));
  }
  return std::string(text.substr(0, stop + 1)) + " " + sentence + std::string(text.substr(stop + 1));
}

ProbedDiagnosis probability_from_response(const ChatResponse& response) {
  if (!response.token_logprobs || response.token_logprobs->empty()) {
    throw Error(ErrorKind::NoLogprobs, "response carries no token logprobs");
  }
  const auto& tokens = *response.token_logprobs;
  std::string joined;
  std::vector<std::size_t> offsets;
  offsets.reserve(tokens.size());
  for (const auto& t : tokens) {
    offsets.push_back(joined.size());
    joined += t.token;
  }
  auto tag = find_tag(joined, "answer");
  if (!tag) tag = find_tag(joined, "final_diagnosis");
  if (!tag) throw Error(ErrorKind::MissingTag, "no <answer> or <final_diagnosis> tag in probe reply");

  const std::string_view raw = std::string_view(joined).substr(tag->content_begin, tag->content_end - tag->content_begin);
  const std::string_view label = trim(raw);
  if (label.empty()) throw Error(ErrorKind::MissingTag, "diagnosis tag is empty");
  const std::size_t begin = static_cast<std::size_t>(label.data() - joined.data());
  const std::size_t end = begin + label.size();

  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const std::size_t t_begin = offsets[i];
    const std::size_t t_end = t_begin + tokens[i].token.size();
    if (t_begin < end && begin < t_end) {
      sum += std::min(0.0, tokens[i].logprob);
      ++count;
    }
  }
  if (count == 0) throw Error(ErrorKind::NoLogprobs, "no tokens cover the diagnosis label");
  const double mean = sum / static_cast<double>(count);
  return ProbedDiagnosis{std::string(label), std::exp(mean), mean};
}

std::vector<EditOperation> operation_schedule(std::size_t n) {
  std::vector<EditOperation> out;
  bool inserted = false;
  std::size_t i = 0;
  while (out.size() < n) {
    const EditOperation op = kAllOperations[i % kAllOperations.size()];
    ++i;
    if (op == EditOperation::Insert) {
      if (inserted) continue;
      inserted = true;
    }
    out.push_back(op);
  }
  return out;
}

EvidenceGroup extract_evidence(std::string_view case_text, const std::string& diagnosis, CfContext& ctx) {
  const auto rendered = render_prompt(ctx.templates.get("evidence"),
                                      {{"case", std::string(case_text)}, {"diagnosis", diagnosis}});
  std::string prompt = rendered.text;
  for (int attempt = 0; attempt < 2; ++attempt) {
    const ChatResponse reply = ctx.client.chat(user_message(prompt), {{"kind", "evidence"},
                                                                      {"case_id", ctx.case_id},
                                                                      {"role", ctx.role},
                                                                      {"round", std::to_string(ctx.round)},
                                                                      {"diagnosis", diagnosis},
                                                                      {"attempt", std::to_string(attempt)}});
    const auto excerpts = find_all_tags(reply.text, "evidence");
    const auto sections = parse_tagged_sections(reply.text, {"rationale"});
    const std::string rationale = sections.contains("rationale") ? sections.at("rationale") : std::string();
    try {
      return locate_evidence(case_text, diagnosis, excerpts, rationale);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::NonSubstringSpan || attempt == 1) throw;
      prompt = rendered.text + "\n\n" + ctx.templates.get("evidence_reminder").body;
    }
  }
  throw Error(ErrorKind::NonSubstringSpan, "unreachable");
}

std::string apply_edit(std::string_view case_text, const EvidenceGroup& evidence, EditOperation op,
                       CfContext& ctx, std::size_t candidate_index) {
  evidence.validate(case_text);
  std::string edited(case_text);
  RequestTags base_tags{{"kind", "edit"},
                        {"case_id", ctx.case_id},
                        {"role", ctx.role},
                        {"round", std::to_string(ctx.round)},
                        {"diagnosis", evidence.diagnosis_label},
                        {"op", std::string(to_string(op))},
                        {"candidate", std::to_string(candidate_index)}};

  if (op == EditOperation::Insert) {
    const auto& last = evidence.spans.back();
    const auto rendered = render_prompt(ctx.templates.get("edit_insert"),
                                        {{"case", std::string(case_text)},
                                         {"diagnosis", evidence.diagnosis_label},
                                         {"span", last.excerpt},
                                         {"guidance", std::string(operation_guidance(op))}});
    RequestTags tags = base_tags;
    tags["span"] = last.excerpt;
    const ChatResponse reply = ctx.client.chat(user_message(rendered.text), std::move(tags));
    const auto found = find_tag(reply.text, "inserted_finding");
    if (!found) throw Error(ErrorKind::MissingTag, "inserted_finding");
    const std::string finding(trim(std::string_view(reply.text).substr(
        found->content_begin, found->content_end - found->content_begin)));
    edited = insert_finding(case_text, last.end, finding);
  } else {
    // Right-to-left keeps earlier offsets valid.
    for (auto it = evidence.spans.rbegin(); it != evidence.spans.rend(); ++it) {
      std::string replacement;
      if (op != EditOperation::Remove) {
        const auto rendered = render_prompt(ctx.templates.get("edit"),
                                            {{"case", std::string(case_text)},
                                             {"diagnosis", evidence.diagnosis_label},
                                             {"span", it->excerpt},
                                             {"operation", std::string(to_string(op))},
                                             {"guidance", std::string(operation_guidance(op))}});
        RequestTags tags = base_tags;
        tags["span"] = it->excerpt;
        const ChatResponse reply = ctx.client.chat(user_message(rendered.text), std::move(tags));
        const auto found = find_tag(reply.text, "edited_span");
        if (!found) throw Error(ErrorKind::MissingTag, "edited_span");
        replacement = std::string(trim(std::string_view(reply.text).substr(
            found->content_begin, found->content_end - found->content_begin)));
      }
      edited = splice(edited, it->start, it->end, replacement);
    }
  }
  if (edited == case_text) {
    throw Error(ErrorKind::NoOpEdit, std::string(to_string(op)) + " left the case unchanged");
  }
  return edited;
}

ProbedDiagnosis probe_diagnosis(std::string_view case_text, const DifferentialSet& ddx, CfContext& ctx,
                                const std::optional<std::string>& hypothesis) {
  std::string prompt = render_prompt(ctx.templates.get("zero_shot"),
                                     {{"case_presentation", std::string(case_text)}})
                           .text;
  prompt += "\n" + render_prompt(ctx.templates.get("probe_candidates"), {{"candidates", join_labels(ddx)}}).text;
  RequestTags tags{{"kind", "probe"}, {"case_id", ctx.case_id}};
  if (hypothesis) {
    prompt += "\n" + render_prompt(ctx.templates.get("probe_hypothesis"), {{"hypothesis", *hypothesis}}).text;
    tags["hypothesis"] = *hypothesis;
  }
  const ChatResponse reply = ctx.client.probe(user_message(std::move(prompt)), std::move(tags));
  return probability_from_response(reply);
}

GenerationResult generate_and_rank(std::string_view case_text, const DifferentialSet& ddx,
                                   const ProbedDiagnosis& p_base, const CfConfig& config, CfContext& ctx) {
  ddx.validate();
  if (config.k < 1) throw Error(ErrorKind::InvalidConfig, "k must be >= 1");
  GenerationResult out;

  // Evidence per diagnosis; a diagnosis whose evidence cannot be located is skipped.
  std::vector<std::optional<EvidenceGroup>> evidence(ddx.entries.size());
  std::vector<std::optional<Warning>> evidence_warnings(ddx.entries.size());
  parallel_for(ddx.entries.size(), [&](std::size_t i) {
    try {
      evidence[i] = extract_evidence(case_text, ddx.entries[i].diagnosis, ctx);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::NonSubstringSpan) throw;
      evidence_warnings[i] = Warning{"NonSubstringSpan", ddx.entries[i].diagnosis + ": " + e.detail()};
    }
  });
  for (auto& w : evidence_warnings) {
    if (w) out.warnings.push_back(*w);
  }

  struct Job {
    std::size_t dx;
    EditOperation op;
    std::size_t candidate;
  };
  std::vector<Job> jobs;
  const auto schedule = operation_schedule(config.candidates_per_dx);
  for (std::size_t dx = 0; dx < ddx.entries.size(); ++dx) {
    if (!evidence[dx]) continue;
    std::array<std::size_t, kAllOperations.size()> per_op{};
    for (EditOperation op : schedule) {
      jobs.push_back({dx, op, per_op[static_cast<std::size_t>(op)]++});
    }
  }

  std::vector<std::optional<CounterfactualVariant>> drafts(jobs.size());
  std::vector<std::optional<Warning>> job_warnings(jobs.size());
  parallel_for(jobs.size(), [&](std::size_t i) {
    const Job& job = jobs[i];
    try {
      CounterfactualVariant v;
      v.generation_index = i;
      v.target_diagnosis = ddx.entries[job.dx].diagnosis;
      v.operation = job.op;
      v.evidence = *evidence[job.dx];
      v.edited_text = apply_edit(case_text, v.evidence, job.op, ctx, job.candidate);
      v.probed = probe_diagnosis(v.edited_text, ddx, ctx);
      drafts[i] = std::move(v);
    } catch (const Error& e) {
      const bool droppable = e.kind() == ErrorKind::NoOpEdit || e.kind() == ErrorKind::MissingTag ||
                             e.kind() == ErrorKind::EmptyText;
      if (!droppable) throw;
      job_warnings[i] = Warning{std::string(to_string(e.kind())),
                                ddx.entries[job.dx].diagnosis + "/" + std::string(to_string(job.op)) + ": " + e.detail()};
    }
  });
  for (auto& w : job_warnings) {
    if (w) out.warnings.push_back(*w);
  }

  std::vector<CounterfactualVariant> ready;
  for (auto& d : drafts) {
    if (d) ready.push_back(std::move(*d));
  }
  std::vector<std::string> texts;
  texts.reserve(ready.size());
  for (const auto& v : ready) texts.push_back(v.edited_text);
  const auto scores = preservation_scores(case_text, texts, ctx.provider);
  for (std::size_t i = 0; i < ready.size(); ++i) {
    out.candidates.push_back(finish_scoring(std::move(ready[i]), scores[i].sem_sim, scores[i].edit_sim, p_base,
                                            config.sim_weights, config.score_weights, ctx.provider,
                                            config.thresholds));
  }
  RankResult ranked = rank_variants(out.candidates, config.k);
  out.selected = std::move(ranked.selected);
  out.warnings.insert(out.warnings.end(), ranked.warnings.begin(), ranked.warnings.end());
  return out;
}

}  // namespace cfdx
