#include "cfdx/client.hpp"

#include "cfdx/error.hpp"

namespace cfdx {

LlmClient::LlmClient(ChatBackend& backend, std::string model_id, DecodingPreset preset,
                     RetryPolicy retry, std::shared_ptr<ProbabilityCache> cache,
                     std::optional<std::int64_t> seed)
    : backend_(backend),
      model_id_(std::move(model_id)),
      preset_(preset),
      retry_(std::move(retry)),
      cache_(cache ? std::move(cache) : std::make_shared<ProbabilityCache>()),
      seed_(seed) {}

ChatRequest LlmClient::make_request(std::vector<ChatMessage> messages, RequestTags tags,
                                    const DecodingPreset& preset, bool want_logprobs) const {
  ChatRequest request;
  request.model_id = model_id_;
  request.messages = std::move(messages);
  request.temperature = preset.temperature;
  request.top_p = preset.top_p;
  request.top_k = preset.top_k;
  request.max_tokens = preset.max_tokens;
  request.want_logprobs = want_logprobs;
  if (seed_forwarded()) request.seed = seed_;
  request.tags = std::move(tags);
  return request;
}

ChatResponse LlmClient::send_counted(const ChatRequest& request) {
  const auto kind_it = request.tags.find("kind");
  const std::string kind = kind_it == request.tags.end() ? "unknown" : kind_it->second;
  CompletionResult result = complete(request, backend_, retry_);
  std::lock_guard lock(mutex_);
  stats_.backend_calls += 1 + static_cast<std::size_t>(result.retries);
  stats_.retries += static_cast<std::size_t>(result.retries);
  stats_.calls_by_kind[kind] += 1;
  return std::move(result.response);
}

ChatResponse LlmClient::chat(std::vector<ChatMessage> messages, RequestTags tags,
                             std::optional<DecodingPreset> override_preset) {
  const ChatRequest request =
      make_request(std::move(messages), std::move(tags), override_preset.value_or(preset_), false);
  return send_counted(request);
}

ChatResponse LlmClient::probe(std::vector<ChatMessage> messages, RequestTags tags) {
  if (!backend_.capabilities().logprobs) {
    throw Error(ErrorKind::NoLogprobs, "backend " + backend_.id() + " does not expose token logprobs");
  }
  const ChatRequest request = make_request(std::move(messages), std::move(tags), preset_, true);
  bool executed = false;
  ChatResponse response = cache_->cached_call(make_cache_key(request), [&] {
    executed = true;
    return send_counted(request);
  });
  std::lock_guard lock(mutex_);
  if (executed) {
    ++stats_.cache_misses;
  } else {
    ++stats_.cache_hits;
  }
  return response;
}

CallStats LlmClient::stats() const {
  std::lock_guard lock(mutex_);
  return stats_;
}

}  // namespace cfdx
