#include "tmotif/llm.hpp"

#include <httplib.h>

#include <cstdlib>
#include <nlohmann/json.hpp>
#include <thread>

namespace tmotif {

Usage& Usage::operator+=(const Usage& o) {
  auto add = [](std::optional<std::uint64_t>& a, const std::optional<std::uint64_t>& b) {
    a = a && b ? std::optional<std::uint64_t>(*a + *b) : std::nullopt;
  };
  add(prompt_tokens, o.prompt_tokens);
  add(completion_tokens, o.completion_tokens);
  return *this;
}

std::string to_string(LlmError::Kind k) {
  switch (k) {
    case LlmError::Kind::Network: return "network";
    case LlmError::Kind::Auth: return "auth";
    case LlmError::Kind::Quota: return "quota";
    case LlmError::Kind::Server: return "server";
    case LlmError::Kind::BadResponse: return "bad_response";
    case LlmError::Kind::Config: return "config";
  }
  return "unknown";
}

std::string api_key_from_env(const std::string& var) {
  const char* v = std::getenv(var.c_str());
  if (!v || !*v) throw LlmError(LlmError::Kind::Config, "environment variable " + var + " is not set");
  return v;
}

struct HttpChatModel::Impl {
  std::unique_ptr<httplib::Client> client;
  std::string path;  // e.g. /v1/chat/completions
};

HttpChatModel::HttpChatModel(EndpointConfig cfg) : cfg_(std::move(cfg)), impl_(std::make_unique<Impl>()) {
  if (cfg_.base_url.empty()) throw LlmError(LlmError::Kind::Config, "endpoint base URL is empty");
  if (cfg_.model.empty()) throw LlmError(LlmError::Kind::Config, "model name is empty");
  auto scheme_end = cfg_.base_url.find("://");
  if (scheme_end == std::string::npos) throw LlmError(LlmError::Kind::Config, "endpoint URL needs a scheme");
  auto path_start = cfg_.base_url.find('/', scheme_end + 3);
  std::string origin = cfg_.base_url.substr(0, path_start);
  std::string prefix = path_start == std::string::npos ? "" : cfg_.base_url.substr(path_start);
  while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
  impl_->path = prefix + "/chat/completions";
  impl_->client = std::make_unique<httplib::Client>(origin);
  impl_->client->set_read_timeout(cfg_.timeout);
  impl_->client->set_write_timeout(cfg_.timeout);
  impl_->client->set_connection_timeout(std::chrono::seconds(10));
  if (!cfg_.api_key.empty()) impl_->client->set_bearer_token_auth(cfg_.api_key);
}

HttpChatModel::~HttpChatModel() = default;

Completion HttpChatModel::complete(const std::vector<ChatMessage>& messages, const std::vector<std::string>& stop) {
  nlohmann::json body;
  body["model"] = cfg_.model;
  body["temperature"] = 0;
  if (cfg_.max_tokens) body["max_tokens"] = *cfg_.max_tokens;
  body["messages"] = nlohmann::json::array();
  for (const auto& m : messages) body["messages"].push_back({{"role", m.role}, {"content", m.content}});
  if (!stop.empty()) body["stop"] = stop;
  const auto payload = body.dump();

  auto delay = cfg_.backoff;
  for (int attempt = 0;; ++attempt) {
    const auto start = std::chrono::steady_clock::now();
    auto res = impl_->client->Post(impl_->path, payload, "application/json");
    const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();

    std::optional<LlmError> err;
    if (!res) {
      err.emplace(LlmError::Kind::Network, "request failed: " + httplib::to_string(res.error()));
    } else if (res->status == 401 || res->status == 403) {
      throw LlmError(LlmError::Kind::Auth, "endpoint rejected credentials (HTTP " + std::to_string(res->status) + ")");
    } else if (res->status == 429) {
      err.emplace(LlmError::Kind::Quota, "rate limited (HTTP 429)");
    } else if (res->status >= 500) {
      err.emplace(LlmError::Kind::Server, "server error (HTTP " + std::to_string(res->status) + ")");
    } else if (res->status != 200) {
      throw LlmError(LlmError::Kind::BadResponse, "unexpected HTTP " + std::to_string(res->status));
    } else {
      try {
        auto j = nlohmann::json::parse(res->body);
        Completion c;
        c.text = j.at("choices").at(0).at("message").at("content").get<std::string>();
        c.latency_ms = ms;
        if (auto u = j.find("usage"); u != j.end() && u->is_object()) {
          if (u->contains("prompt_tokens")) c.usage.prompt_tokens = u->at("prompt_tokens").get<std::uint64_t>();
          if (u->contains("completion_tokens"))
            c.usage.completion_tokens = u->at("completion_tokens").get<std::uint64_t>();
        }
        return c;
      } catch (const nlohmann::json::exception& e) {
        throw LlmError(LlmError::Kind::BadResponse, std::string("malformed completion: ") + e.what());
      }
    }
    if (attempt >= cfg_.max_retries) throw *err;
    std::this_thread::sleep_for(delay);
    delay *= 2;
  }
}

}  // namespace tmotif
