#pragma once

#include <atomic>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "cfdx/backend.hpp"
#include "cfdx/cache.hpp"

namespace cfdx {

struct DecodingPreset {
  double temperature = 1.0;
  double top_p = 1.0;
  std::optional<int> top_k;
  int max_tokens = 2048;
};

struct CallStats {
  std::size_t backend_calls = 0;
  std::size_t retries = 0;
  std::size_t cache_hits = 0;
  std::size_t cache_misses = 0;
  std::map<std::string, std::size_t> calls_by_kind;
};

// Agent-facing client: applies the decoding preset and seed, retries
// transient failures, routes probability probes through the cache, and keeps
// per-client call accounting. Safe for concurrent use.
class LlmClient {
 public:
  LlmClient(ChatBackend& backend, std::string model_id, DecodingPreset preset,
            RetryPolicy retry = {}, std::shared_ptr<ProbabilityCache> cache = nullptr,
            std::optional<std::int64_t> seed = std::nullopt);

  // Uncached generation call.
  ChatResponse chat(std::vector<ChatMessage> messages, RequestTags tags,
                    std::optional<DecodingPreset> override_preset = std::nullopt);

  // Cached call requesting token logprobs. Throws NoLogprobs if the backend
  // cannot supply them.
  ChatResponse probe(std::vector<ChatMessage> messages, RequestTags tags);

  [[nodiscard]] CallStats stats() const;
  [[nodiscard]] std::string backend_id() const { return backend_.id(); }
  [[nodiscard]] const std::string& model_id() const noexcept { return model_id_; }
  [[nodiscard]] bool seed_forwarded() const { return seed_.has_value() && backend_.capabilities().seed; }
  [[nodiscard]] const std::shared_ptr<ProbabilityCache>& cache() const noexcept { return cache_; }

 private:
  ChatRequest make_request(std::vector<ChatMessage> messages, RequestTags tags,
                           const DecodingPreset& preset, bool want_logprobs) const;
  ChatResponse send_counted(const ChatRequest& request);

  ChatBackend& backend_;
  std::string model_id_;
  DecodingPreset preset_;
  RetryPolicy retry_;
  std::shared_ptr<ProbabilityCache> cache_;
  std::optional<std::int64_t> seed_;

  mutable std::mutex mutex_;
  CallStats stats_;
};

}  // namespace cfdx
