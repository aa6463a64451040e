#pragma once

// HTTP JSON clients for a chat-completion endpoint and an embedding endpoint
// (OpenAI-compatible request/response shapes).

#include <chrono>
#include <cstdlib>
#include <optional>
#include <random>
#include <string>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "logmill/backend.hpp"
#include "logmill/embedding.hpp"
#include "logmill/errors.hpp"

namespace logmill {

struct RemoteConfig {
  std::string base_url;  // scheme://host[:port]
  std::string chat_path = "/v1/chat/completions";
  std::string embedding_path = "/v1/embeddings";
  std::string model;
  std::string embedding_model;
  std::string api_key_env = "LOGMILL_API_KEY";
  std::optional<int> max_tokens;
  int attempts = 5;
  std::chrono::milliseconds base_delay{500};
  std::chrono::seconds timeout{120};
};

namespace detail {

class TransientFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// POSTs `body` and returns the parsed JSON reply, retrying transport errors,
// 429 and 5xx with exponential backoff plus jitter.
inline nlohmann::json post_json(const RemoteConfig& cfg, const std::string& path, const nlohmann::json& body) {
  httplib::Headers headers;
  if (const char* key = std::getenv(cfg.api_key_env.c_str()); key && *key) {
    headers.emplace("Authorization", std::string("Bearer ") + key);
  }
  const std::string payload = body.dump();
  thread_local std::mt19937 jitter_rng{std::random_device{}()};
  std::string last_error = "no attempt made";
  const int attempts = std::max(cfg.attempts, 1);
  for (int attempt = 0; attempt < attempts; ++attempt) {
    if (attempt > 0) {
      const auto delay = cfg.base_delay * (1 << (attempt - 1));
      std::uniform_int_distribution<long long> jitter(0, std::max<long long>(delay.count() / 2, 0));
      std::this_thread::sleep_for(delay + std::chrono::milliseconds(jitter(jitter_rng)));
    }
    try {
      httplib::Client client(cfg.base_url);
      client.set_connection_timeout(cfg.timeout);
      client.set_read_timeout(cfg.timeout);
      client.set_write_timeout(cfg.timeout);
      auto res = client.Post(path, headers, payload, "application/json");
      if (!res) throw TransientFailure("transport error: " + httplib::to_string(res.error()));
      if (res->status == 429 || res->status >= 500) {
        throw TransientFailure("HTTP " + std::to_string(res->status));
      }
      if (res->status != 200) {
        throw ExtractionUnavailable("HTTP " + std::to_string(res->status) + " from " + cfg.base_url + path + ": " +
                                    res->body.substr(0, 200));
      }
      try {
        return nlohmann::json::parse(res->body);
      } catch (const nlohmann::json::exception& e) {
        throw ExtractionUnavailable(std::string("malformed JSON reply: ") + e.what());
      }
    } catch (const TransientFailure& e) {
      last_error = e.what();
    }
  }
  throw ExtractionUnavailable("giving up after " + std::to_string(attempts) + " attempts: " + last_error);
}

}  // namespace detail

class RemoteChatBackend final : public ChatBackend {
 public:
  explicit RemoteChatBackend(RemoteConfig cfg) : cfg_(std::move(cfg)) {
    if (cfg_.base_url.empty()) throw Error("remote backend needs a base URL", true);
    if (cfg_.model.empty()) throw Error("remote backend needs a model name", true);
  }

  std::string complete(const std::string& prompt) override {
    nlohmann::json body{{"model", cfg_.model},
                        {"messages", nlohmann::json::array({{{"role", "user"}, {"content", prompt}}})},
                        {"temperature", 0}};
    if (cfg_.max_tokens) body["max_tokens"] = *cfg_.max_tokens;
    const auto reply = detail::post_json(cfg_, cfg_.chat_path, body);
    try {
      return reply.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
      throw ExtractionUnavailable(std::string("unexpected chat reply shape: ") + e.what());
    }
  }

  const RemoteConfig& config() const noexcept { return cfg_; }

 private:
  RemoteConfig cfg_;
};

class RemoteEmbedder final : public Embedder {
 public:
  explicit RemoteEmbedder(RemoteConfig cfg) : cfg_(std::move(cfg)) {
    if (cfg_.base_url.empty()) throw Error("remote embedder needs a base URL", true);
    if (cfg_.embedding_model.empty()) throw Error("remote embedder needs an embedding model name", true);
  }

  Embedding embed(std::string_view text) override {
    const nlohmann::json body{{"model", cfg_.embedding_model}, {"input", text}};
    const auto reply = detail::post_json(cfg_, cfg_.embedding_path, body);
    Embedding v;
    try {
      v = reply.at("data").at(0).at("embedding").get<Embedding>();
    } catch (const nlohmann::json::exception& e) {
      throw ExtractionUnavailable(std::string("unexpected embedding reply shape: ") + e.what());
    }
    if (dim_ == 0) dim_ = v.size();
    if (v.size() != dim_) throw EmbeddingDimError("embedding endpoint changed dimension");
    normalize_in_place(v);
    return v;
  }

  std::size_t dimension() const override { return dim_; }

 private:
  RemoteConfig cfg_;
  std::size_t dim_ = 0;
};

}  // namespace logmill
