#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace cfdx {

enum class MessageRole { System, User, Assistant };

std::string_view to_string(MessageRole role);

struct ChatMessage {
  MessageRole role = MessageRole::User;
  std::string content;

  bool operator==(const ChatMessage&) const = default;
};

struct TokenLogprob {
  std::string token;
  double logprob = 0.0;

  bool operator==(const TokenLogprob&) const = default;
};

struct Usage {
  int prompt_tokens = 0;
  int completion_tokens = 0;

  bool operator==(const Usage&) const = default;
};

// Routing tags (agent kind, round, role, ...). Used by the scripted backend
// and recorded in transcripts; never sent on the wire, never hashed into
// cache keys.
using RequestTags = std::map<std::string, std::string>;

struct ChatRequest {
  std::string model_id;
  std::vector<ChatMessage> messages;
  double temperature = 1.0;
  double top_p = 1.0;
  std::optional<int> top_k;
  int max_tokens = 2048;
  bool want_logprobs = false;
  std::optional<std::int64_t> seed;
  RequestTags tags;

  // Throws InvalidArgument on empty messages, a leading assistant message,
  // negative temperature, top_p outside (0,1] or non-positive max_tokens.
  void validate() const;

  [[nodiscard]] std::string prompt_text() const;
};

struct ChatResponse {
  std::string text;
  std::optional<std::vector<TokenLogprob>> token_logprobs;
  std::string finish_reason = "stop";
  Usage usage;

  bool operator==(const ChatResponse&) const = default;
};

struct Capabilities {
  bool logprobs = false;
  bool seed = false;
};

// One transport attempt. Implementations throw cfdx::Error with kinds
// Timeout, RateLimited, TransportError, ScriptMiss or Unsupported.
class ChatBackend {
 public:
  virtual ~ChatBackend() = default;

  [[nodiscard]] virtual std::string id() const = 0;
  [[nodiscard]] virtual Capabilities capabilities() const = 0;
  virtual ChatResponse send(const ChatRequest& request) = 0;
};

struct RetryPolicy {
  int max_retries = 3;
  std::chrono::milliseconds base_delay{500};
  double multiplier = 2.0;
  std::function<void(std::chrono::milliseconds)> sleep;

  // Delay before retry i (0-based); strictly increasing in i.
  [[nodiscard]] std::chrono::milliseconds delay(int retry_index) const;
};

struct CompletionResult {
  ChatResponse response;
  int retries = 0;
};

// Validates, checks capabilities, then sends with exponential backoff on
// RateLimited and Timeout. Total attempts never exceed max_retries + 1.
CompletionResult complete(const ChatRequest& request, ChatBackend& backend,
                          const RetryPolicy& policy);

}  // namespace cfdx
