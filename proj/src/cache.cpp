#include "cfdx/cache.hpp"

#include <fstream>

#include "cfdx/hash.hpp"
#include "cfdx/serialize.hpp"

namespace cfdx {

CacheKey make_cache_key(const ChatRequest& request) {
  nlohmann::json canonical;
  canonical["v"] = kCacheDigestVersion;
  canonical["model"] = request.model_id;
  nlohmann::json messages = nlohmann::json::array();
  for (const auto& m : request.messages) {
    messages.push_back({std::string(to_string(m.role)), m.content});
  }
  canonical["messages"] = std::move(messages);
  canonical["temperature"] = request.temperature;
  canonical["top_p"] = request.top_p;
  canonical["top_k"] = request.top_k ? nlohmann::json(*request.top_k) : nlohmann::json();
  canonical["max_tokens"] = request.max_tokens;
  canonical["want_logprobs"] = request.want_logprobs;
  canonical["seed"] = request.seed ? nlohmann::json(*request.seed) : nlohmann::json();
  return CacheKey{request.model_id, sha256_hex(canonical.dump())};
}

ProbabilityCache::ProbabilityCache(std::optional<std::filesystem::path> spill_dir)
    : spill_dir_(std::move(spill_dir)) {
  if (spill_dir_) std::filesystem::create_directories(*spill_dir_);
}

std::size_t ProbabilityCache::size() const {
  std::lock_guard lock(mutex_);
  return entries_.size();
}

ChatResponse ProbabilityCache::cached_call(const CacheKey& key,
                                           const std::function<ChatResponse()>& thunk) {
  for (;;) {
    std::unique_lock lock(mutex_);
    if (auto it = entries_.find(key); it != entries_.end()) {
      auto pending = it->second;
      lock.unlock();
      try {
        ChatResponse value = pending.get();
        ++hits_;
        return value;
      } catch (...) {
        // The owner failed and removed the entry; compete to recompute.
        continue;
      }
    }

    std::promise<ChatResponse> promise;
    entries_.emplace(key, promise.get_future().share());
    lock.unlock();

    if (auto spilled = load_spill(key)) {
      promise.set_value(*spilled);
      ++hits_;
      return *spilled;
    }

    ++misses_;
    try {
      ChatResponse value = thunk();
      store_spill(key, value);
      promise.set_value(value);
      return value;
    } catch (...) {
      {
        std::lock_guard relock(mutex_);
        entries_.erase(key);
      }
      promise.set_exception(std::current_exception());
      throw;
    }
  }
}

std::optional<ChatResponse> ProbabilityCache::load_spill(const CacheKey& key) const {
  if (!spill_dir_) return std::nullopt;
  const auto path = *spill_dir_ / (key.digest + ".json");
  std::ifstream in(path);
  if (!in) return std::nullopt;
  try {
    const auto doc = nlohmann::json::parse(in);
    if (doc.at("model_id").get<std::string>() != key.model_id) return std::nullopt;
    return doc.at("response").get<ChatResponse>();
  } catch (const nlohmann::json::exception&) {
    return std::nullopt;
  }
}

void ProbabilityCache::store_spill(const CacheKey& key, const ChatResponse& response) const {
  if (!spill_dir_) return;
  const auto path = *spill_dir_ / (key.digest + ".json");
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp);
    out << nlohmann::json{{"model_id", key.model_id}, {"digest_version", kCacheDigestVersion},
                          {"response", response}}
               .dump();
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace cfdx
