#include "scout/gateway.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <thread>

#include "httplib.h"
#include "scout/tokenize.hpp"

namespace scout {

namespace {

// Local usage estimate for a request: the serialized body, chars/4.
long long estimate_request_tokens(const std::string& body) {
  return count_tokens(body);
}

long long estimate_response_tokens(const ChatResponse& response) {
  long long total = 0;
  if (response.text) total += count_tokens(*response.text);
  if (response.tool_call) {
    total += count_tokens(response.tool_call->name);
    total += count_tokens(response.tool_call->args.dump());
  }
  return total;
}

}  // namespace

// ============================================================================
// Wire serialization
// ============================================================================

nlohmann::json ChatRequest::to_json(const std::string& model) const {
  nlohmann::json j;
  j["max_tokens"] = max_output_tokens;
  nlohmann::json msgs = nlohmann::json::array();
  for (const auto& m : messages) {
    msgs.push_back({{"content", m.content}, {"role", m.role}});
  }
  j["messages"] = std::move(msgs);
  j["model"] = model;
  j["temperature"] = temperature;
  if (tools.is_array() && !tools.empty()) {
    j["tool_choice"] = "auto";
    j["tools"] = tools;
  }
  return j;
}

void BackendConfig::validate() const {
  if (endpoint.empty()) throw Error(ErrorCode::InvalidConfig, "backend endpoint is empty");
  if (timeout_ms <= 0) throw Error(ErrorCode::InvalidConfig, "timeout_ms must be > 0");
  if (max_retries < 0) throw Error(ErrorCode::InvalidConfig, "max_retries must be >= 0");
}

ChatResponse parse_chat_completion(const std::string& body, const std::string& request_body) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(body);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ProtocolError, std::string("response is not JSON: ") + e.what());
  }

  try {
    const auto& choices = j.at("choices");
    if (!choices.is_array() || choices.empty()) {
      throw Error(ErrorCode::ProtocolError, "response has no choices");
    }
    const auto& message = choices.at(0).at("message");

    ChatResponse response;
    if (message.contains("content") && message["content"].is_string()) {
      std::string text = message["content"].get<std::string>();
      if (!text.empty()) response.text = text;
    }
    if (message.contains("tool_calls") && message["tool_calls"].is_array() &&
        !message["tool_calls"].empty()) {
      const auto& call = message["tool_calls"].at(0).at("function");
      ToolCall tc;
      tc.name = call.at("name").get<std::string>();
      if (call.contains("arguments")) {
        // Arguments arrive as a JSON-encoded string; tolerate a plain object.
        if (call["arguments"].is_string()) {
          std::string raw = call["arguments"].get<std::string>();
          tc.args = raw.empty() ? nlohmann::json::object() : nlohmann::json::parse(raw);
        } else if (call["arguments"].is_object()) {
          tc.args = call["arguments"];
        }
      }
      response.tool_call = std::move(tc);
    }
    if (!response.text && !response.tool_call) {
      throw Error(ErrorCode::ProtocolError, "response carries neither text nor a tool call");
    }

    if (j.contains("usage") && j["usage"].is_object()) {
      const auto& usage = j["usage"];
      response.usage.input_tokens = usage.value("prompt_tokens", 0LL);
      response.usage.output_tokens = usage.value("completion_tokens", 0LL);
      response.usage.estimated = false;
    } else {
      response.usage.input_tokens = estimate_request_tokens(request_body);
      response.usage.output_tokens = estimate_response_tokens(response);
      response.usage.estimated = true;
    }
    return response;
  } catch (const Error&) {
    throw;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ProtocolError, std::string("malformed chat completion: ") + e.what());
  }
}

// ============================================================================
// MockBackend
// ============================================================================

MockBackend::MockBackend(std::vector<ChatResponse> script) {
  for (auto& r : script) script_.push_back(std::move(r));
}

void MockBackend::push(ChatResponse response) {
  std::lock_guard lock(mutex_);
  script_.push_back(std::move(response));
}

void MockBackend::push_text(const std::string& text) {
  ChatResponse r;
  r.text = text;
  push(std::move(r));
}

std::size_t MockBackend::remaining() const {
  std::lock_guard lock(mutex_);
  return script_.size();
}

ChatResponse MockBackend::next() {
  std::lock_guard lock(mutex_);
  if (script_.empty()) {
    throw Error(ErrorCode::ScriptExhausted, "mock backend script is exhausted");
  }
  ChatResponse out = std::move(script_.front());
  script_.pop_front();
  return out;
}

ChatResponse MockBackend::chat(const ChatRequest& request) {
  {
    std::lock_guard lock(mutex_);
    requests_.push_back(request);
  }
  ChatResponse out = next();
  if (out.usage.input_tokens == 0 && out.usage.output_tokens == 0) {
    out.usage.input_tokens = estimate_request_tokens(request.to_json("mock").dump());
    out.usage.output_tokens = estimate_response_tokens(out);
    out.usage.estimated = true;
  }
  return out;
}

ChatResponse mock_next(MockBackend& mock) { return mock.next(); }

// ============================================================================
// HTTP transport
// ============================================================================

namespace {

class HttplibTransport final : public Transport {
 public:
  explicit HttplibTransport(long timeout_ms) : timeout_ms_(timeout_ms) {}

  HttpResponse post(const std::string& endpoint, const std::string& body,
                    const HttpHeaders& headers) override {
    // Split "http://host:port/path" into origin + path.
    auto scheme_end = endpoint.find("://");
    if (scheme_end == std::string::npos) {
      throw Error(ErrorCode::TransportError, "endpoint lacks a scheme: " + endpoint);
    }
    auto path_start = endpoint.find('/', scheme_end + 3);
    std::string origin = path_start == std::string::npos ? endpoint : endpoint.substr(0, path_start);
    std::string path = path_start == std::string::npos ? "/" : endpoint.substr(path_start);

    httplib::Client client(origin);
    client.set_connection_timeout(0, timeout_ms_ * 1000);
    client.set_read_timeout(timeout_ms_ / 1000, (timeout_ms_ % 1000) * 1000);
    client.set_write_timeout(timeout_ms_ / 1000, (timeout_ms_ % 1000) * 1000);

    httplib::Headers hdrs;
    for (const auto& [k, v] : headers) hdrs.emplace(k, v);

    auto result = client.Post(path, hdrs, body, "application/json");
    if (!result) {
      throw Error(ErrorCode::TransportError,
                  "POST " + endpoint + " failed: " + httplib::to_string(result.error()));
    }
    return HttpResponse{result->status, result->body};
  }

 private:
  long timeout_ms_;
};

}  // namespace

std::shared_ptr<Transport> make_http_transport(long timeout_ms) {
  return std::make_shared<HttplibTransport>(timeout_ms);
}

// ============================================================================
// HttpBackend
// ============================================================================

HttpBackend::HttpBackend(BackendConfig config, std::shared_ptr<Transport> transport)
    : config_(std::move(config)), transport_(std::move(transport)) {
  config_.validate();
  if (!transport_) transport_ = make_http_transport(config_.timeout_ms);
  sleep_ = [](long ms) { std::this_thread::sleep_for(std::chrono::milliseconds(ms)); };
}

ChatResponse HttpBackend::chat(const ChatRequest& request) {
  std::string body = request.to_json(config_.model).dump();
  Usage input_side{estimate_request_tokens(body), 0, true};

  HttpHeaders headers;
  if (!config_.auth_env.empty()) {
    const char* credential = std::getenv(config_.auth_env.c_str());
    if (credential == nullptr || *credential == '\0') {
      throw GatewayError(ErrorCode::AuthError,
                         "credential env var '" + config_.auth_env + "' is not set",
                         input_side);
    }
    headers.emplace_back("Authorization", std::string("Bearer ") + credential);
  }

  std::string last_failure = "no attempts made";
  for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
    if (attempt > 0) {
      long delay = static_cast<long>(static_cast<double>(config_.backoff_base_ms) *
                                     std::pow(config_.backoff_multiplier, attempt - 1));
      sleep_(delay);
    }
    HttpResponse http;
    try {
      http = transport_->post(config_.endpoint, body, headers);
    } catch (const Error& e) {
      last_failure = e.what();
      continue;  // connect/timeout failures are transient
    }

    if (http.status == 200) {
      try {
        return parse_chat_completion(http.body, body);
      } catch (const Error& e) {
        throw GatewayError(ErrorCode::ProtocolError, e.what(), input_side);
      }
    }
    if (http.status == 401 || http.status == 403) {
      throw GatewayError(ErrorCode::AuthError,
                         "endpoint rejected credentials (HTTP " + std::to_string(http.status) + ")",
                         input_side);
    }
    if (http.status == 429 || http.status >= 500) {
      last_failure = "HTTP " + std::to_string(http.status);
      continue;  // transient
    }
    throw GatewayError(ErrorCode::ProtocolError,
                       "unexpected HTTP " + std::to_string(http.status) + ": " + http.body,
                       input_side);
  }
  throw GatewayError(ErrorCode::TransportError,
                     "exhausted " + std::to_string(1 + config_.max_retries) + " attempts (" +
                         last_failure + ")",
                     input_side);
}

}  // namespace scout
