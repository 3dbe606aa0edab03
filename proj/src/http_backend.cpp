#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include "cfdx/http_backend.hpp"

#include <algorithm>
#include <cstdlib>

#include "cfdx/error.hpp"

namespace cfdx {

namespace {

std::string credential(const std::string& env_name) {
  if (env_name.empty()) return {};
  const char* value = std::getenv(env_name.c_str());
  if (value == nullptr) {
    throw Error(ErrorKind::TransportError, "credential variable " + env_name + " is not set");
  }
  return value;
}

std::string scrub(std::string text, const std::string& secret) {
  if (secret.empty()) return text;
  std::size_t pos = 0;
  while ((pos = text.find(secret, pos)) != std::string::npos) {
    text.replace(pos, secret.size(), "***");
    pos += 3;
  }
  return text;
}

httplib::Client make_client(const std::string& origin, double timeout_seconds) {
  httplib::Client client(origin);
  const auto secs = static_cast<time_t>(timeout_seconds);
  const auto usecs = static_cast<time_t>((timeout_seconds - static_cast<double>(secs)) * 1e6);
  client.set_connection_timeout(secs, usecs);
  client.set_read_timeout(secs, usecs);
  client.set_write_timeout(secs, usecs);
  return client;
}

nlohmann::json post_json(const std::string& base_url, const std::string& path_suffix,
                         const nlohmann::json& body, const std::string& api_key_env,
                         double timeout_seconds, const std::string& who) {
  const auto [origin, prefix] = split_base_url(base_url);
  const std::string key = credential(api_key_env);
  httplib::Client client = make_client(origin, timeout_seconds);
  httplib::Headers headers;
  if (!key.empty()) headers.emplace("Authorization", "Bearer " + key);

  const auto result = client.Post(prefix + path_suffix, headers, body.dump(), "application/json");
  if (!result) {
    const auto err = result.error();
    const std::string what = httplib::to_string(err);
    if (err == httplib::Error::ConnectionTimeout || err == httplib::Error::Read) {
      throw Error(ErrorKind::Timeout, who + ": " + what);
    }
    throw Error(ErrorKind::TransportError, who + ": " + what);
  }
  if (result->status == 429) throw Error(ErrorKind::RateLimited, who + ": HTTP 429");
  if (result->status == 408 || result->status == 504) {
    throw Error(ErrorKind::Timeout, who + ": HTTP " + std::to_string(result->status));
  }
  if (result->status < 200 || result->status >= 300) {
    throw Error(ErrorKind::TransportError, who + ": HTTP " + std::to_string(result->status) + ": " +
                                               scrub(result->body.substr(0, 300), key));
  }
  try {
    return nlohmann::json::parse(result->body);
  } catch (const nlohmann::json::parse_error&) {
    throw Error(ErrorKind::TransportError, who + ": response is not JSON");
  }
}

}  // namespace

std::pair<std::string, std::string> split_base_url(const std::string& base_url) {
  const std::size_t scheme = base_url.find("://");
  const std::size_t host_start = scheme == std::string::npos ? 0 : scheme + 3;
  const std::size_t slash = base_url.find('/', host_start);
  if (slash == std::string::npos) return {base_url, ""};
  std::string prefix = base_url.substr(slash);
  while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
  return {base_url.substr(0, slash), prefix};
}

HttpChatBackend::HttpChatBackend(EndpointConfig config)
    : config_(std::move(config)),
      in_flight_(std::make_unique<std::counting_semaphore<1024>>(
          std::clamp(config_.max_in_flight, 1, 1024))) {
  if (config_.base_url.empty()) throw Error(ErrorKind::InvalidConfig, "endpoint base_url is empty");
}

nlohmann::json HttpChatBackend::request_body(const ChatRequest& request) const {
  nlohmann::json messages = nlohmann::json::array();
  for (const auto& m : request.messages) {
    messages.push_back({{"role", to_string(m.role)}, {"content", m.content}});
  }
  nlohmann::json body{{"model", request.model_id.empty() ? config_.model_id : request.model_id},
                      {"messages", std::move(messages)},
                      {"temperature", request.temperature},
                      {"top_p", request.top_p},
                      {"max_tokens", request.max_tokens}};
  if (request.top_k) body["top_k"] = *request.top_k;
  if (request.want_logprobs) body["logprobs"] = true;
  if (request.seed && config_.capabilities.seed) body["seed"] = *request.seed;
  return body;
}

ChatResponse HttpChatBackend::parse_response(const nlohmann::json& body) {
  try {
    const auto& choice = body.at("choices").at(0);
    ChatResponse out;
    const auto& content = choice.at("message").at("content");
    out.text = content.is_string() ? content.get<std::string>() : std::string();
    out.finish_reason = choice.value("finish_reason", std::string("stop"));
    if (choice.contains("logprobs") && choice["logprobs"].is_object() &&
        choice["logprobs"].contains("content") && choice["logprobs"]["content"].is_array()) {
      std::vector<TokenLogprob> tokens;
      for (const auto& t : choice["logprobs"]["content"]) {
        tokens.push_back({t.at("token").get<std::string>(), std::min(0.0, t.at("logprob").get<double>())});
      }
      out.token_logprobs = std::move(tokens);
    }
    if (body.contains("usage") && body["usage"].is_object()) {
      out.usage.prompt_tokens = body["usage"].value("prompt_tokens", 0);
      out.usage.completion_tokens = body["usage"].value("completion_tokens", 0);
    }
    return out;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::TransportError, std::string("malformed chat response: ") + e.what());
  }
}

ChatResponse HttpChatBackend::send(const ChatRequest& request) {
  if (request.want_logprobs && !config_.capabilities.logprobs) {
    throw Error(ErrorKind::Unsupported, id() + " declares no logprob support");
  }
  in_flight_->acquire();
  struct Release {
    std::counting_semaphore<1024>& sem;
    ~Release() { sem.release(); }
  } release{*in_flight_};
  const auto body = post_json(config_.base_url, "/chat/completions", request_body(request),
                              config_.api_key_env, config_.timeout_seconds, id());
  ChatResponse response = parse_response(body);
  if (response.text.empty() && response.finish_reason == "stop") {
    response.finish_reason = "empty";
  }
  return response;
}

HttpEmbeddingProvider::HttpEmbeddingProvider(std::string base_url, std::string model, std::size_t dims,
                                             std::string api_key_env, double timeout_seconds)
    : base_url_(std::move(base_url)),
      model_(std::move(model)),
      dims_(dims),
      api_key_env_(std::move(api_key_env)),
      timeout_seconds_(timeout_seconds) {}

std::vector<double> HttpEmbeddingProvider::embed_raw(std::string_view text) const {
  try {
    const auto body = post_json(base_url_, "/embeddings",
                                nlohmann::json{{"model", model_}, {"input", std::string(text)}},
                                api_key_env_, timeout_seconds_, id());
    return body.at("data").at(0).at("embedding").get<std::vector<double>>();
  } catch (const Error& e) {
    throw Error(ErrorKind::ProviderUnavailable, e.detail());
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::ProviderUnavailable, id() + ": " + e.what());
  }
}

}  // namespace cfdx
