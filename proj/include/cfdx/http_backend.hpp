#pragma once

#include <memory>
#include <semaphore>
#include <string>

#include <nlohmann/json.hpp>

#include "cfdx/backend.hpp"
#include "cfdx/client.hpp"
#include "cfdx/similarity.hpp"

namespace cfdx {

// Chat-completions style endpoint. The credential is read from the named
// environment variable at call time and never stored or logged.
struct EndpointConfig {
  std::string name = "default";
  std::string base_url;  // e.g. http://localhost:8000/v1
  std::string model_id;
  std::string api_key_env;
  Capabilities capabilities;
  DecodingPreset decoding;
  int max_in_flight = 4;
  double timeout_seconds = 120.0;
};

class HttpChatBackend final : public ChatBackend {
 public:
  explicit HttpChatBackend(EndpointConfig config);

  [[nodiscard]] std::string id() const override { return "http:" + config_.name + ":" + config_.model_id; }
  [[nodiscard]] Capabilities capabilities() const override { return config_.capabilities; }
  ChatResponse send(const ChatRequest& request) override;

  // Request body for the wire; exposed for tests.
  [[nodiscard]] nlohmann::json request_body(const ChatRequest& request) const;
  [[nodiscard]] static ChatResponse parse_response(const nlohmann::json& body);

 private:
  EndpointConfig config_;
  std::unique_ptr<std::counting_semaphore<1024>> in_flight_;
};

// OpenAI-style /embeddings endpoint behind the embedding-provider contract.
class HttpEmbeddingProvider final : public EmbeddingProvider {
 public:
  HttpEmbeddingProvider(std::string base_url, std::string model, std::size_t dims,
                        std::string api_key_env = {}, double timeout_seconds = 60.0);

  [[nodiscard]] std::string id() const override { return "http-embed:" + model_; }
  [[nodiscard]] std::size_t dims() const override { return dims_; }
  [[nodiscard]] std::vector<double> embed_raw(std::string_view text) const override;

 private:
  std::string base_url_;
  std::string model_;
  std::size_t dims_;
  std::string api_key_env_;
  double timeout_seconds_;
};

// Splits "http://host:port/v1" into ("http://host:port", "/v1").
std::pair<std::string, std::string> split_base_url(const std::string& base_url);

}  // namespace cfdx
