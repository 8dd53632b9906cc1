#pragma once

#include <chrono>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace tmotif {

struct ChatMessage {
  std::string role;  // "system" | "user" | "assistant"
  std::string content;
};

/// Token counts; absent when the endpoint does not report them.
struct Usage {
  std::optional<std::uint64_t> prompt_tokens;
  std::optional<std::uint64_t> completion_tokens;

  std::optional<std::uint64_t> total() const {
    if (!prompt_tokens || !completion_tokens) return std::nullopt;
    return *prompt_tokens + *completion_tokens;
  }
  Usage& operator+=(const Usage& o);
};

struct Completion {
  std::string text;
  Usage usage;
  double latency_ms = 0.0;
};

class LlmError : public std::runtime_error {
 public:
  enum class Kind { Network, Auth, Quota, Server, BadResponse, Config };
  LlmError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

std::string to_string(LlmError::Kind k);

class ChatModel {
 public:
  virtual ~ChatModel() = default;
  virtual Completion complete(const std::vector<ChatMessage>& messages, const std::vector<std::string>& stop = {}) = 0;
};

struct EndpointConfig {
  std::string base_url;  // e.g. https://api.openai.com/v1
  std::string model;
  std::string api_key;
  int max_retries = 3;
  std::chrono::milliseconds backoff{500};
  std::chrono::seconds timeout{120};
  std::optional<int> max_tokens;
};

/// Reads the credential from the named environment variable.
std::string api_key_from_env(const std::string& var);

/// OpenAI-compatible /chat/completions client at temperature 0.
class HttpChatModel : public ChatModel {
 public:
  explicit HttpChatModel(EndpointConfig cfg);
  ~HttpChatModel() override;
  Completion complete(const std::vector<ChatMessage>& messages, const std::vector<std::string>& stop = {}) override;

 private:
  struct Impl;
  EndpointConfig cfg_;
  std::unique_ptr<Impl> impl_;
};

/// Scripted model for tests and dry runs: replies come from a function of the
/// conversation so far.
class ScriptedModel : public ChatModel {
 public:
  using Script = std::function<Completion(const std::vector<ChatMessage>&)>;
  explicit ScriptedModel(Script script) : script_(std::move(script)) {}
  Completion complete(const std::vector<ChatMessage>& messages, const std::vector<std::string>& = {}) override {
    ++calls_;
    return script_(messages);
  }
  std::size_t calls() const { return calls_; }

 private:
  Script script_;
  std::size_t calls_ = 0;
};

}  // namespace tmotif
