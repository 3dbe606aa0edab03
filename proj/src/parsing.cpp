#include "cfdx/parsing.hpp"

#include <algorithm>

#include <nlohmann/json.hpp>

#include "cfdx/prompts.hpp"
#include "cfdx/text.hpp"

namespace cfdx {

namespace {

bool tag_boundary(char c) { return c == '>' || c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '/'; }

// Position of the next "<tag" opening (with a proper boundary) at or after from.
std::size_t find_open(std::string_view text, std::string_view tag, std::size_t from) {
  const std::string needle = "<" + std::string(tag);
  for (;;) {
    const std::size_t pos = find_ci(text, needle, from);
    if (pos == std::string_view::npos) return pos;
    const std::size_t after = pos + needle.size();
    if (after < text.size() && tag_boundary(text[after]) && text[after] != '/') return pos;
    from = pos + 1;
  }
}

std::string attribute(std::string_view open_tag, std::string_view name) {
  // Accepts from="x", from='x', from=x and typographic quotes.
  std::size_t pos = 0;
  while ((pos = find_ci(open_tag, name, pos)) != std::string_view::npos) {
    const bool word_start = pos == 0 || open_tag[pos - 1] == ' ' || open_tag[pos - 1] == '\t' ||
                            open_tag[pos - 1] == '\n';
    std::size_t eq = pos + name.size();
    while (eq < open_tag.size() && open_tag[eq] == ' ') ++eq;
    if (!word_start || eq >= open_tag.size() || open_tag[eq] != '=') {
      pos += name.size();
      continue;
    }
    std::size_t v = eq + 1;
    while (v < open_tag.size() && open_tag[v] == ' ') ++v;
    if (v >= open_tag.size()) return {};
    std::string value;
    if (open_tag[v] == '"' || open_tag[v] == '\'') {
      const char quote = open_tag[v];
      const std::size_t end = open_tag.find(quote, v + 1);
      value = std::string(open_tag.substr(v + 1, end == std::string_view::npos ? std::string_view::npos
                                                                                : end - v - 1));
    } else if (open_tag.substr(v, 3) == "\xE2\x80\x9C") {  // left double quotation mark
      const std::size_t end = open_tag.find("\xE2\x80\x9D", v + 3);
      value = std::string(open_tag.substr(v + 3, end == std::string_view::npos ? std::string_view::npos
                                                                                : end - v - 3));
    } else {
      std::size_t end = v;
      while (end < open_tag.size() && open_tag[end] != ' ' && open_tag[end] != '>') ++end;
      value = std::string(open_tag.substr(v, end - v));
    }
    std::string_view trimmed = trim(value);
    if (trimmed.size() >= 2 && trimmed.front() == '[' && trimmed.back() == ']') {
      trimmed = trim(trimmed.substr(1, trimmed.size() - 2));
    }
    return std::string(trimmed);
  }
  return {};
}

std::string strip_brackets(std::string_view role) {
  role = trim(role);
  if (role.size() >= 2 && role.front() == '[' && role.back() == ']') {
    role = trim(role.substr(1, role.size() - 2));
  }
  return std::string(role);
}

bool is_none_marker(std::string_view text) {
  std::string t = ascii_lower(trim(text));
  while (!t.empty() && (t.back() == '.' || t.back() == '"')) t.pop_back();
  while (!t.empty() && t.front() == '"') t.erase(t.begin());
  return t == "none" || t == "n/a" || t.empty();
}

nlohmann::json parse_json_block(std::string_view text, std::string_view schema_name) {
  const auto block = extract_braced_block(text);
  if (!block) {
    throw Error(ErrorKind::SchemaViolation, std::string(schema_name) + ": no JSON object found");
  }
  try {
    return nlohmann::json::parse(*block);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::SchemaViolation, std::string(schema_name) + ": " + e.what());
  }
}

std::string string_field(const nlohmann::json& obj, const char* key) {
  if (!obj.contains(key) || obj[key].is_null()) return {};
  if (obj[key].is_string()) return obj[key].get<std::string>();
  return obj[key].dump();
}

std::vector<std::string> string_list(const nlohmann::json& obj, const char* key) {
  std::vector<std::string> out;
  if (!obj.contains(key) || !obj[key].is_array()) return out;
  for (const auto& v : obj[key]) out.push_back(v.is_string() ? v.get<std::string>() : v.dump());
  return out;
}

}  // namespace

std::optional<TagSpan> find_tag(std::string_view text, std::string_view tag, std::size_t from) {
  const std::size_t open = find_open(text, tag, from);
  if (open == std::string_view::npos) return std::nullopt;
  const std::size_t gt = text.find('>', open);
  if (gt == std::string_view::npos) return std::nullopt;
  TagSpan span;
  span.open_begin = open;
  span.content_begin = gt + 1;
  const std::string closer = "</" + std::string(tag) + ">";
  const std::size_t close = find_ci(text, closer, span.content_begin);
  const std::size_t reopen = find_open(text, tag, span.content_begin);
  if (close != std::string_view::npos && (reopen == std::string_view::npos || close < reopen)) {
    span.content_end = close;
    span.close_end = close + closer.size();
  } else if (reopen != std::string_view::npos) {
    // Malformed closer written as a second opening tag.
    span.content_end = reopen;
    const std::size_t reopen_gt = text.find('>', reopen);
    span.close_end = reopen_gt == std::string_view::npos ? text.size() : reopen_gt + 1;
  } else {
    span.content_end = text.size();
    span.close_end = text.size();
  }
  return span;
}

std::vector<std::string> find_all_tags(std::string_view text, std::string_view tag) {
  std::vector<std::string> out;
  std::size_t from = 0;
  while (auto span = find_tag(text, tag, from)) {
    out.emplace_back(trim(text.substr(span->content_begin, span->content_end - span->content_begin)));
    if (span->close_end <= from) break;
    from = span->close_end;
  }
  return out;
}

std::map<std::string, std::string> parse_tagged_sections(std::string_view text,
                                                         const std::set<std::string>& expected,
                                                         const std::set<std::string>& required) {
  std::map<std::string, std::string> out;
  for (const auto& tag : expected) {
    if (auto span = find_tag(text, tag)) {
      out[tag] = std::string(trim(text.substr(span->content_begin, span->content_end - span->content_begin)));
    }
  }
  for (const auto& tag : required) {
    if (!out.contains(tag)) throw Error(ErrorKind::MissingRequiredTag, tag);
  }
  return out;
}

QaLines parse_qa_lines(std::string_view text, std::string_view speaker, int round) {
  QaLines out;
  if (is_none_marker(text)) return out;
  for (std::string_view line : split_lines(text)) {
    line = trim(line);
    while (!line.empty() && (line.front() == '-' || line.front() == '*' || line.front() == '\xE2')) {
      if (line.front() == '\xE2') {
        if (line.substr(0, 3) != "\xE2\x80\xA2") break;  // bullet
        line.remove_prefix(3);
      } else {
        line.remove_prefix(1);
      }
      line = trim(line);
    }
    if (line.empty() || is_none_marker(line)) continue;

    const bool is_q = find_ci(line, "Q-TO-") == 0;
    const bool is_a = find_ci(line, "A-TO-") == 0;
    if (!is_q && !is_a) {
      out.warnings.push_back({"MalformedQaLine", std::string(line)});
      continue;
    }
    std::string_view rest = line.substr(5);
    std::string role;
    std::string_view body;
    if (!rest.empty() && rest.front() == '[') {
      const std::size_t close = rest.find(']');
      if (close == std::string_view::npos) {
        out.warnings.push_back({"MalformedQaLine", std::string(line)});
        continue;
      }
      role = strip_brackets(rest.substr(0, close + 1));
      body = rest.substr(close + 1);
      body = trim(body);
      if (!body.empty() && body.front() == ':') body.remove_prefix(1);
    } else {
      const std::size_t colon = rest.find(':');
      if (colon == std::string_view::npos) {
        out.warnings.push_back({"MalformedQaLine", std::string(line)});
        continue;
      }
      role = std::string(trim(rest.substr(0, colon)));
      body = rest.substr(colon + 1);
    }
    body = trim(body);
    if (role.empty() || body.empty()) {
      out.warnings.push_back({"MalformedQaLine", std::string(line)});
      continue;
    }
    if (is_q) {
      if (ascii_lower(role) == ascii_lower(trim(speaker))) {
        out.warnings.push_back({"SelfQuestionDropped", std::string(speaker) + ": " + std::string(body)});
        continue;
      }
      out.questions.push_back({std::string(speaker), role, round, std::string(body)});
    } else {
      out.answers.push_back({std::string(speaker), role, round, std::string(body)});
    }
  }
  return out;
}

QaLines parse_summary_qa(std::string_view summary) {
  QaLines out;
  for (const bool questions : {true, false}) {
    const std::string_view tag = questions ? "question" : "answer";
    std::size_t from = 0;
    while (auto span = find_tag(summary, tag, from)) {
      const std::string_view open_tag =
          summary.substr(span->open_begin, span->content_begin - span->open_begin);
      std::string from_role = attribute(open_tag, "from");
      std::string to_role = attribute(open_tag, "to");
      const std::string round_text = attribute(open_tag, "round");
      int round = -1;
      try {
        if (!round_text.empty()) round = std::stoi(round_text);
      } catch (const std::exception&) {
        round = -1;
      }
      if (from_role.empty()) {
        from_role = "Unknown";
        out.warnings.push_back({"MissingAttribution", std::string(tag) + " without 'from'"});
      }
      if (to_role.empty()) {
        to_role = "Unknown";
        out.warnings.push_back({"MissingAttribution", std::string(tag) + " without 'to'"});
      }
      std::string body(trim(summary.substr(span->content_begin, span->content_end - span->content_begin)));
      if (questions) {
        out.questions.push_back({from_role, to_role, round, std::move(body)});
      } else {
        out.answers.push_back({from_role, to_role, round, std::move(body)});
      }
      if (span->close_end <= from) break;
      from = span->close_end;
    }
  }
  return out;
}

std::optional<std::string_view> extract_braced_block(std::string_view text) {
  const std::size_t start = text.find('{');
  if (start == std::string_view::npos) return std::nullopt;
  int depth = 0;
  bool in_string = false;
  bool escaped = false;
  for (std::size_t i = start; i < text.size(); ++i) {
    const char c = text[i];
    if (in_string) {
      if (escaped) {
        escaped = false;
      } else if (c == '\\') {
        escaped = true;
      } else if (c == '"') {
        in_string = false;
      }
      continue;
    }
    if (c == '"') {
      in_string = true;
    } else if (c == '{') {
      ++depth;
    } else if (c == '}') {
      if (--depth == 0) return text.substr(start, i - start + 1);
    }
  }
  return std::nullopt;
}

std::string_view to_string(Confidence c) {
  switch (c) {
    case Confidence::High: return "High";
    case Confidence::Moderate: return "Moderate";
    case Confidence::Low: return "Low";
  }
  return "Low";
}

std::optional<Confidence> parse_confidence(std::string_view text) {
  const std::string t = ascii_lower(trim(text));
  // "High|Moderate|Low" echoed from the template is not an answer.
  if (t.find('|') != std::string::npos) return std::nullopt;
  if (t.rfind("high", 0) == 0) return Confidence::High;
  if (t.rfind("moderate", 0) == 0 || t.rfind("medium", 0) == 0) return Confidence::Moderate;
  if (t.rfind("low", 0) == 0) return Confidence::Low;
  return std::nullopt;
}

void DifferentialSet::validate() const {
  if (entries.size() != 3) {
    throw Error(ErrorKind::SchemaViolation,
                "differential must have exactly 3 entries, got " + std::to_string(entries.size()));
  }
  std::set<std::string> seen;
  for (const auto& e : entries) {
    const std::string norm = normalize_label(e.diagnosis);
    if (norm.empty()) throw Error(ErrorKind::SchemaViolation, "empty diagnosis label");
    if (!seen.insert(norm).second) {
      throw Error(ErrorKind::SchemaViolation, "duplicate diagnosis label '" + e.diagnosis + "'");
    }
  }
}

std::vector<std::string> DifferentialSet::labels() const {
  std::vector<std::string> out;
  for (const auto& e : entries) out.push_back(e.diagnosis);
  return out;
}

std::optional<std::size_t> DifferentialSet::find(std::string_view label) const {
  const std::string norm = normalize_label(label);
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (normalize_label(entries[i].diagnosis) == norm) return i;
  }
  return std::nullopt;
}

TriagePayload parse_triage(std::string_view text, const SpecialistPool& pool,
                           const TriageOptions& options) {
  const auto doc = parse_json_block(text, "triage");
  if (!doc.is_object() || !doc.contains("assigned_specialists") || !doc["assigned_specialists"].is_array()) {
    throw Error(ErrorKind::SchemaViolation, "triage: assigned_specialists array missing");
  }
  TriagePayload out;
  out.main_symptoms = string_list(doc, "main_symptoms");
  out.problems = string_list(doc, "problems");

  if (!doc.contains("num_agents") || !doc["num_agents"].is_number_integer()) {
    throw Error(ErrorKind::SchemaViolation, "triage: num_agents must be an integer");
  }
  const int declared = doc["num_agents"].get<int>();
  const auto& list = doc["assigned_specialists"];
  if (declared < 1 || declared > options.max_agents) {
    throw Error(ErrorKind::SchemaViolation, "triage: num_agents " + std::to_string(declared) +
                                                " outside [1, " + std::to_string(options.max_agents) + "]");
  }
  if (static_cast<std::size_t>(declared) != list.size()) {
    throw Error(ErrorKind::SchemaViolation, "triage: num_agents " + std::to_string(declared) +
                                                " != " + std::to_string(list.size()) + " assigned specialists");
  }
  for (const auto& item : list) {
    std::string name;
    std::string rationale;
    if (item.is_string()) {
      name = item.get<std::string>();
    } else if (item.is_object()) {
      name = string_field(item, "role");
      rationale = string_field(item, "rationale");
    }
    const auto role = pool.find(name);
    if (!role) {
      if (!options.drop_unknown_roles) throw Error(ErrorKind::UnknownRole, name);
      out.warnings.push_back({"UnknownRoleDropped", name});
      continue;
    }
    const bool duplicate = std::any_of(out.assigned_specialists.begin(), out.assigned_specialists.end(),
                                       [&](const auto& a) { return a.role == role->name; });
    if (duplicate) {
      out.warnings.push_back({"DuplicateRoleDropped", role->name});
      continue;
    }
    out.assigned_specialists.push_back({role->name, rationale});
  }
  out.num_agents = static_cast<int>(out.assigned_specialists.size());
  return out;
}

DifferentialSet parse_ddx(std::string_view text) {
  const auto doc = parse_json_block(text, "ddx");
  if (!doc.is_object() || !doc.contains("most_likely_diagnoses") || !doc["most_likely_diagnoses"].is_array()) {
    throw Error(ErrorKind::SchemaViolation, "ddx: most_likely_diagnoses array missing");
  }
  DifferentialSet out;
  out.case_summary = string_field(doc, "case_summary");
  for (const auto& item : doc["most_likely_diagnoses"]) {
    if (!item.is_object()) throw Error(ErrorKind::SchemaViolation, "ddx: entry is not an object");
    out.entries.push_back({std::string(trim(string_field(item, "diagnosis"))), string_field(item, "rationale")});
  }
  out.validate();
  return out;
}

JudgePayload parse_judge(std::string_view text) {
  const auto doc = parse_json_block(text, "judge");
  if (!doc.is_object()) throw Error(ErrorKind::SchemaViolation, "judge: not an object");
  JudgePayload out;
  out.final_diagnosis = std::string(trim(string_field(doc, "final_diagnosis")));
  if (out.final_diagnosis.empty()) {
    throw Error(ErrorKind::SchemaViolation, "judge: final_diagnosis missing");
  }
  if (doc.contains("had_consensus")) {
    const auto& v = doc["had_consensus"];
    out.had_consensus = v.is_boolean() ? v.get<bool>() : ascii_lower(string_field(doc, "had_consensus")) == "true";
  }
  out.winner_role = string_field(doc, "winner_role");
  out.rationale = string_field(doc, "rationale");
  out.initial_symptom_reasoning = string_field(doc, "initial_symptom_reasoning");
  out.timeline_importance = string_field(doc, "timeline_importance");
  out.primary_cause_vs_downstream = string_field(doc, "primary_cause_vs_downstream");
  out.counterfactual_evidence_summary = string_field(doc, "counterfactual_evidence_summary");
  out.confidence_score = string_field(doc, "confidence_score");
  out.validation_check = string_field(doc, "validation_check");
  return out;
}

StructuredPayload parse_structured_payload(std::string_view text, PayloadSchema schema,
                                           const SpecialistPool& pool) {
  switch (schema) {
    case PayloadSchema::Triage: return parse_triage(text, pool);
    case PayloadSchema::DDx: return parse_ddx(text);
    case PayloadSchema::Judge: return parse_judge(text);
  }
  throw Error(ErrorKind::InvalidArgument, "unknown payload schema");
}

}  // namespace cfdx
