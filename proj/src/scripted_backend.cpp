#include "cfdx/scripted_backend.hpp"

#include <fstream>

#include "cfdx/hash.hpp"
#include "cfdx/parsing.hpp"
#include "cfdx/text.hpp"

namespace cfdx {

namespace {

std::optional<ErrorKind> parse_fault(const std::string& name) {
  if (name == "rate_limited") return ErrorKind::RateLimited;
  if (name == "timeout") return ErrorKind::Timeout;
  if (name == "transport") return ErrorKind::TransportError;
  throw Error(ErrorKind::ParseError, "unknown scripted fault '" + name + "'");
}

std::string expand_tags(const std::string& body, const ChatRequest& request) {
  std::string out;
  out.reserve(body.size());
  std::size_t pos = 0;
  while (pos < body.size()) {
    const std::size_t open = body.find("${", pos);
    if (open == std::string::npos) {
      out.append(body, pos, std::string::npos);
      break;
    }
    const std::size_t close = body.find('}', open + 2);
    if (close == std::string::npos) {
      out.append(body, pos, std::string::npos);
      break;
    }
    out.append(body, pos, open - pos);
    const std::string name = body.substr(open + 2, close - open - 2);
    const auto it = request.tags.find(name);
    if (it == request.tags.end()) {
      throw Error(ErrorKind::ScriptMiss, "reply references tag '" + name +
                                             "' absent from request " + request_fingerprint(request));
    }
    out += it->second;
    pos = close + 1;
  }
  return out;
}

}  // namespace

std::size_t ScriptEntry::specificity() const {
  return tag_equals.size() + contains.size() + (equal_tags.empty() ? 0 : 1);
}

bool ScriptEntry::matches(const ChatRequest& request) const {
  for (const auto& [key, value] : tag_equals) {
    const auto it = request.tags.find(key);
    if (it == request.tags.end() || it->second != value) return false;
  }
  if (!contains.empty()) {
    const std::string prompt = request.prompt_text();
    for (const auto& needle : contains) {
      if (prompt.find(needle) == std::string::npos) return false;
    }
  }
  if (equal_tags.size() == 2) {
    const auto a = request.tags.find(equal_tags[0]);
    const auto b = request.tags.find(equal_tags[1]);
    if (a == request.tags.end() || b == request.tags.end()) return false;
    if (!labels_equal(a->second, b->second)) return false;
  }
  return true;
}

ScriptedBackend::ScriptedBackend(std::string id, Capabilities caps, std::vector<ScriptEntry> entries)
    : id_(std::move(id)), caps_(caps), entries_(std::move(entries)) {}

ScriptedBackend ScriptedBackend::from_json(const nlohmann::json& doc) {
  try {
    Capabilities caps;
    if (doc.contains("capabilities")) {
      caps.logprobs = doc["capabilities"].value("logprobs", false);
      caps.seed = doc["capabilities"].value("seed", false);
    }
    std::vector<ScriptEntry> entries;
    for (const auto& item : doc.at("entries")) {
      ScriptEntry e;
      for (const auto& [key, value] : item.at("match").items()) {
        if (key == "contains") {
          if (value.is_array()) {
            e.contains = value.get<std::vector<std::string>>();
          } else {
            e.contains.push_back(value.get<std::string>());
          }
        } else if (key == "equal_tags") {
          e.equal_tags = value.get<std::vector<std::string>>();
          if (e.equal_tags.size() != 2) {
            throw Error(ErrorKind::ParseError, "equal_tags needs exactly two tag names");
          }
        } else if (value.is_string()) {
          e.tag_equals[key] = value.get<std::string>();
        } else {
          e.tag_equals[key] = value.dump();
        }
      }
      e.reply = item.value("reply", std::string());
      if (item.contains("label_logprobs")) {
        e.label_logprobs = item["label_logprobs"].get<std::vector<double>>();
      }
      if (item.contains("tokens")) {
        std::vector<TokenLogprob> tokens;
        for (const auto& t : item["tokens"]) {
          tokens.push_back({t.at("token").get<std::string>(), t.at("logprob").get<double>()});
        }
        e.tokens = std::move(tokens);
      }
      e.finish_reason = item.value("finish_reason", std::string("stop"));
      if (item.contains("fault")) e.fault = parse_fault(item["fault"].get<std::string>());
      entries.push_back(std::move(e));
    }
    return ScriptedBackend(doc.value("id", std::string("scripted")), caps, std::move(entries));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::ParseError, std::string("malformed script: ") + e.what());
  }
}

ScriptedBackend ScriptedBackend::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::FileNotFound, path.string());
  try {
    return from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::ParseError, path.string() + ": " + e.what());
  }
}

ChatResponse ScriptedBackend::send(const ChatRequest& request) {
  return scripted_complete(request);
}

ChatResponse ScriptedBackend::scripted_complete(const ChatRequest& request) const {
  const ScriptEntry* best = nullptr;
  for (const auto& entry : entries_) {
    if (!entry.matches(request)) continue;
    if (best == nullptr || entry.specificity() > best->specificity()) best = &entry;
  }
  if (best == nullptr) {
    throw Error(ErrorKind::ScriptMiss, "no scripted reply for " + request_fingerprint(request));
  }
  if (best->fault) {
    throw Error(*best->fault, "scripted fault for " + request_fingerprint(request));
  }

  ChatResponse response;
  response.text = expand_tags(best->reply, request);
  response.finish_reason = best->finish_reason;
  if (request.want_logprobs) {
    if (best->tokens) {
      response.token_logprobs = best->tokens;
    } else if (best->label_logprobs) {
      response.token_logprobs = synthesize_tokens(response.text, *best->label_logprobs);
    }
  }
  response.usage.prompt_tokens = static_cast<int>(request.prompt_text().size() / 4);
  response.usage.completion_tokens = static_cast<int>(response.text.size() / 4);
  return response;
}

std::string request_fingerprint(const ChatRequest& request) {
  std::string out = "{";
  bool first = true;
  for (const auto& [key, value] : request.tags) {
    if (key == "span" || key == "truth" || key == "prediction") continue;
    if (!first) out += ", ";
    out += key + "=" + value;
    first = false;
  }
  out += "} prompt#" + sha256_hex(request.prompt_text()).substr(0, 12);
  return out;
}

std::vector<TokenLogprob> synthesize_tokens(const std::string& reply,
                                            const std::vector<double>& label_logprobs) {
  if (label_logprobs.empty()) {
    throw Error(ErrorKind::ParseError, "label_logprobs must not be empty");
  }
  auto tag = find_tag(reply, "answer");
  if (!tag) tag = find_tag(reply, "final_diagnosis");
  if (!tag) {
    throw Error(ErrorKind::ParseError, "label_logprobs given but reply has no answer tag");
  }
  std::size_t begin = tag->content_begin;
  std::size_t end = tag->content_end;
  const std::string_view content = trim(std::string_view(reply).substr(begin, end - begin));
  begin = static_cast<std::size_t>(content.data() - reply.data());
  end = begin + content.size();

  // Words keep their leading whitespace, like BPE pieces.
  std::vector<std::string> words;
  std::size_t i = begin;
  while (i < end) {
    std::size_t j = i;
    while (j < end && reply[j] == ' ') ++j;
    while (j < end && reply[j] != ' ') ++j;
    words.emplace_back(reply.substr(i, j - i));
    i = j;
  }
  const std::size_t n = label_logprobs.size();
  if (words.size() < n) {
    throw Error(ErrorKind::ParseError, "label '" + std::string(content) + "' has fewer words than logprobs");
  }

  std::vector<TokenLogprob> tokens;
  if (begin > 0) tokens.push_back({reply.substr(0, begin), 0.0});
  for (std::size_t k = 0; k + 1 < n; ++k) tokens.push_back({words[k], label_logprobs[k]});
  std::string tail;
  for (std::size_t k = n - 1; k < words.size(); ++k) tail += words[k];
  tokens.push_back({tail, label_logprobs[n - 1]});
  if (end < reply.size()) tokens.push_back({reply.substr(end), 0.0});
  return tokens;
}

void FaultInjectingBackend::push_fault(ErrorKind kind) {
  std::lock_guard lock(mutex_);
  faults_.push_back(kind);
}

ChatResponse FaultInjectingBackend::send(const ChatRequest& request) {
  ++attempts_;
  {
    std::lock_guard lock(mutex_);
    if (!faults_.empty()) {
      const ErrorKind kind = faults_.front();
      faults_.pop_front();
      throw Error(kind, "injected fault");
    }
  }
  return inner_.send(request);
}

}  // namespace cfdx
