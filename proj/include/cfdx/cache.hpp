#pragma once

#include <atomic>
#include <compare>
#include <filesystem>
#include <functional>
#include <future>
#include <map>
#include <mutex>
#include <optional>
#include <string>

#include "cfdx/backend.hpp"

namespace cfdx {

inline constexpr std::string_view kCacheDigestVersion = "cfdx-cache-sha256-v1";

struct CacheKey {
  std::string model_id;
  std::string digest;

  auto operator<=>(const CacheKey&) const = default;
};

// Digest over the rendered messages and decoding parameters. Request tags are
// excluded so that identical prompts from different agents share an entry.
[[nodiscard]] CacheKey make_cache_key(const ChatRequest& request);

// Memoizes chat responses by key. Concurrent callers with the same key share a
// single in-flight computation; failed computations are not stored.
class ProbabilityCache {
 public:
  explicit ProbabilityCache(std::optional<std::filesystem::path> spill_dir = std::nullopt);

  ChatResponse cached_call(const CacheKey& key, const std::function<ChatResponse()>& thunk);

  [[nodiscard]] std::size_t hits() const noexcept { return hits_.load(); }
  [[nodiscard]] std::size_t misses() const noexcept { return misses_.load(); }
  [[nodiscard]] std::size_t size() const;

 private:
  std::optional<ChatResponse> load_spill(const CacheKey& key) const;
  void store_spill(const CacheKey& key, const ChatResponse& response) const;

  std::optional<std::filesystem::path> spill_dir_;
  mutable std::mutex mutex_;
  std::map<CacheKey, std::shared_future<ChatResponse>> entries_;
  std::atomic<std::size_t> hits_{0};
  std::atomic<std::size_t> misses_{0};
};

}  // namespace cfdx
