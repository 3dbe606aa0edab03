#include "cfdx/backend.hpp"

#include <cmath>
#include <thread>

#include "cfdx/error.hpp"

namespace cfdx {

std::string_view to_string(MessageRole role) {
  switch (role) {
    case MessageRole::System: return "system";
    case MessageRole::User: return "user";
    case MessageRole::Assistant: return "assistant";
  }
  return "user";
}

void ChatRequest::validate() const {
  if (messages.empty()) {
    throw Error(ErrorKind::InvalidArgument, "chat request has no messages");
  }
  if (messages.front().role == MessageRole::Assistant) {
    throw Error(ErrorKind::InvalidArgument, "first message must be system or user");
  }
  if (!(temperature >= 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "temperature must be >= 0");
  }
  if (!(top_p > 0.0 && top_p <= 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "top_p must be in (0,1]");
  }
  if (max_tokens <= 0) {
    throw Error(ErrorKind::InvalidArgument, "max_tokens must be positive");
  }
}

std::string ChatRequest::prompt_text() const {
  std::string out;
  for (const auto& m : messages) {
    if (!out.empty()) out += "\n";
    out += m.content;
  }
  return out;
}

std::chrono::milliseconds RetryPolicy::delay(int retry_index) const {
  const double base = static_cast<double>(std::max<std::int64_t>(base_delay.count(), 1));
  const double factor = std::pow(std::max(multiplier, 1.5), retry_index);
  return std::chrono::milliseconds(static_cast<std::int64_t>(base * factor) + retry_index);
}

CompletionResult complete(const ChatRequest& request, ChatBackend& backend,
                          const RetryPolicy& policy) {
  request.validate();
  if (request.want_logprobs && !backend.capabilities().logprobs) {
    throw Error(ErrorKind::Unsupported,
                "backend " + backend.id() + " cannot return token logprobs");
  }
  int retries = 0;
  for (;;) {
    try {
      return CompletionResult{backend.send(request), retries};
    } catch (const Error& e) {
      const bool transient = e.kind() == ErrorKind::RateLimited || e.kind() == ErrorKind::Timeout;
      if (!transient || retries >= policy.max_retries) throw;
      const auto wait = policy.delay(retries);
      if (policy.sleep) {
        policy.sleep(wait);
      } else {
        std::this_thread::sleep_for(wait);
      }
      ++retries;
    }
  }
}

}  // namespace cfdx
