#pragma once

#include <atomic>
#include <deque>
#include <filesystem>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cfdx/backend.hpp"
#include "cfdx/error.hpp"

namespace cfdx {

// One canned reply. `match` conditions are request-tag equalities plus two
// special keys: "contains" (prompt substring, string or list) and
// "equal_tags" (two tag names whose values must be equal after label
// normalization). Replies may reference tags as ${name}.
struct ScriptEntry {
  std::map<std::string, std::string> tag_equals;
  std::vector<std::string> contains;
  std::vector<std::string> equal_tags;
  std::string reply;
  std::optional<std::vector<double>> label_logprobs;
  std::optional<std::vector<TokenLogprob>> tokens;
  std::string finish_reason = "stop";
  std::optional<ErrorKind> fault;

  [[nodiscard]] std::size_t specificity() const;
  [[nodiscard]] bool matches(const ChatRequest& request) const;
};

// Deterministic test double. Immutable after load; the most specific matching
// entry wins, earlier entries break ties. Unmatched requests raise ScriptMiss.
class ScriptedBackend final : public ChatBackend {
 public:
  ScriptedBackend(std::string id, Capabilities caps, std::vector<ScriptEntry> entries);

  static ScriptedBackend from_json(const nlohmann::json& doc);
  static ScriptedBackend load(const std::filesystem::path& path);

  [[nodiscard]] std::string id() const override { return id_; }
  [[nodiscard]] Capabilities capabilities() const override { return caps_; }
  ChatResponse send(const ChatRequest& request) override;

  // Same lookup as send(), as a free function over an entry list.
  [[nodiscard]] ChatResponse scripted_complete(const ChatRequest& request) const;

  [[nodiscard]] const std::vector<ScriptEntry>& entries() const noexcept { return entries_; }

 private:
  std::string id_;
  Capabilities caps_;
  std::vector<ScriptEntry> entries_;
};

// Short identification of a request used in ScriptMiss messages and logs.
[[nodiscard]] std::string request_fingerprint(const ChatRequest& request);

// Splits `reply` into tokens so that the label inside the first <answer> or
// <final_diagnosis> tag carries the given logprobs and everything else 0.
[[nodiscard]] std::vector<TokenLogprob> synthesize_tokens(const std::string& reply,
                                                          const std::vector<double>& label_logprobs);

// Wraps another backend and raises queued faults before delegating. Used to
// exercise retry paths.
class FaultInjectingBackend final : public ChatBackend {
 public:
  explicit FaultInjectingBackend(ChatBackend& inner) : inner_(inner) {}

  void push_fault(ErrorKind kind);

  [[nodiscard]] std::string id() const override { return inner_.id(); }
  [[nodiscard]] Capabilities capabilities() const override { return inner_.capabilities(); }
  ChatResponse send(const ChatRequest& request) override;

  [[nodiscard]] std::size_t attempts() const noexcept { return attempts_.load(); }

 private:
  ChatBackend& inner_;
  std::mutex mutex_;
  std::deque<ErrorKind> faults_;
  std::atomic<std::size_t> attempts_{0};
};

}  // namespace cfdx
