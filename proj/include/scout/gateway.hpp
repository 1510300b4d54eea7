#pragma once

#include <deque>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "scout/error.hpp"

namespace scout {

// Per-call token usage. `estimated` marks counts derived locally (chars/4)
// rather than reported by the provider.
struct Usage {
  long long input_tokens = 0;
  long long output_tokens = 0;
  bool estimated = false;

  Usage& operator+=(const Usage& other) {
    input_tokens += other.input_tokens;
    output_tokens += other.output_tokens;
    estimated = estimated || other.estimated;
    return *this;
  }

  nlohmann::json to_json() const {
    return {{"input_tokens", input_tokens},
            {"output_tokens", output_tokens},
            {"estimated", estimated}};
  }
};

struct ChatMessage {
  std::string role;
  std::string content;
};

struct ToolCall {
  std::string name;
  nlohmann::json args = nlohmann::json::object();
};

struct ChatRequest {
  std::vector<ChatMessage> messages;
  nlohmann::json tools;  // array of function schemas; empty/null = none
  double temperature = 0.0;
  long long max_output_tokens = 4096;

  // Byte-stable wire serialization (object keys are emitted sorted), so a
  // given request always serializes identically across runs.
  nlohmann::json to_json(const std::string& model) const;
};

// A backend reply carries prose, a tool call, or both.
struct ChatResponse {
  std::optional<std::string> text;
  std::optional<ToolCall> tool_call;
  Usage usage;
};

struct BackendConfig {
  std::string endpoint;  // full URL of a chat-completions endpoint
  std::string model;
  std::string auth_env;  // env var holding the credential; "" = no auth
  long timeout_ms = 30000;
  int max_retries = 3;
  long backoff_base_ms = 200;
  double backoff_multiplier = 2.0;

  void validate() const;  // throws InvalidConfig
};

// Anything that can answer a chat request: the HTTP client, the scripted
// mock, or test doubles. Implementations must be safe for concurrent calls
// from multiple episodes.
class Backend {
 public:
  virtual ~Backend() = default;
  virtual ChatResponse chat(const ChatRequest& request) = 0;
};

// Raised by backends on failure; carries the input-side usage so callers can
// keep the cost ledger complete even for failed calls.
class GatewayError : public Error {
 public:
  GatewayError(ErrorCode code, const std::string& message, Usage usage)
      : Error(code, message), usage_(usage) {}
  const Usage& usage() const { return usage_; }

 private:
  Usage usage_;
};

// ============================================================================
// Mock backend
// ============================================================================

// Replays a canned response sequence and records every request it saw.
// Responses with zero usage get a local estimate filled in.
class MockBackend : public Backend {
 public:
  MockBackend() = default;
  explicit MockBackend(std::vector<ChatResponse> script);

  void push(ChatResponse response);
  void push_text(const std::string& text);

  ChatResponse chat(const ChatRequest& request) override;

  // Next canned response without consuming a request (ScriptExhausted at
  // end of script).
  ChatResponse next();

  const std::vector<ChatRequest>& requests() const { return requests_; }
  std::size_t remaining() const;

 private:
  std::deque<ChatResponse> script_;
  std::vector<ChatRequest> requests_;
  mutable std::mutex mutex_;
};

ChatResponse mock_next(MockBackend& mock);

// ============================================================================
// HTTP backend
// ============================================================================

struct HttpResponse {
  int status = 0;
  std::string body;
};

using HttpHeaders = std::vector<std::pair<std::string, std::string>>;

// Transport seam: the real implementation speaks HTTP; tests inject scripted
// status/body sequences for fault injection. Connect/timeout-level failures
// are reported as Error(TransportError).
class Transport {
 public:
  virtual ~Transport() = default;
  virtual HttpResponse post(const std::string& endpoint, const std::string& body,
                            const HttpHeaders& headers) = 0;
};

std::shared_ptr<Transport> make_http_transport(long timeout_ms);

// Chat-completions client: request construction, tool-schema attachment,
// bounded retries with exponential backoff on transient failures (timeouts,
// 429, 5xx), and token-usage capture (provider-reported when present, local
// estimate otherwise). Auth rejections are not retried.
class HttpBackend : public Backend {
 public:
  explicit HttpBackend(BackendConfig config, std::shared_ptr<Transport> transport = nullptr);

  ChatResponse chat(const ChatRequest& request) override;

  // Test hook: replaces the real sleep between retries.
  void set_sleep_hook(std::function<void(long)> hook) { sleep_ = std::move(hook); }

  const BackendConfig& config() const { return config_; }

 private:
  BackendConfig config_;
  std::shared_ptr<Transport> transport_;
  std::function<void(long)> sleep_;
};

// Parses an OpenAI-style chat-completions response body into a ChatResponse.
// Throws Error(ProtocolError) on malformed payloads.
ChatResponse parse_chat_completion(const std::string& body, const std::string& request_body);

}  // namespace scout
