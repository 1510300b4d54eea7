#include "support/heuristic_backends.hpp"

#include <cstdio>
#include <random>
#include <regex>
#include <stdexcept>

#include "json.hpp"
#include "scout/tokenize.hpp"
#include "support/fixtures.hpp"

namespace scout::testing {
namespace {

using nlohmann::json;

std::string last_user_message(const ChatRequest& request) {
  for (auto it = request.messages.rbegin(); it != request.messages.rend(); ++it) {
    if (it->role == "user") return it->content;
  }
  return {};
}

Usage estimated_usage(const ChatRequest& request, const std::string& output) {
  Usage usage;
  usage.estimated = true;
  for (const auto& m : request.messages) usage.input_tokens += count_tokens(m.content);
  usage.output_tokens = count_tokens(output);
  return usage;
}

std::string find_vault(const std::string& text) {
  static const std::regex kVault(R"(vault (\d+))");
  std::smatch m;
  if (std::regex_search(text, m, kVault)) return m[1].str();
  return {};
}

}  // namespace

// ----------------------------------------------------------------------------
// Needle corpus
// ----------------------------------------------------------------------------

NeedleCorpus make_needle_corpus(const std::string& name, long long target_tokens,
                                int needles, unsigned seed) {
  if (needles < 1) throw std::logic_error("needle corpus needs at least one needle");

  // ~57 bytes per line under the chars/4 tokenizer.
  long long lines = std::max<long long>(target_tokens * 4 / 57, 12LL + needles * 7LL);

  std::mt19937 rng(seed);
  auto code_char = [&rng] {
    static const char kAlphabet[] = "ABCDEFGHJKMNPQRSTUVWXYZ23456789";
    return kAlphabet[rng() % (sizeof kAlphabet - 1)];
  };

  std::vector<std::string> body(static_cast<std::size_t>(lines));
  for (long long i = 0; i < lines; ++i) {
    char buf[80];
    std::snprintf(buf, sizeof buf,
                  "log entry %06lld: routine check completed, status nominal.", i + 1);
    body[static_cast<std::size_t>(i)] = buf;
  }

  NeedleCorpus corpus;
  const long long span = (lines - 10) / needles;
  if (span < 5) throw std::logic_error("needle corpus too small for needle count");

  for (int k = 0; k < needles; ++k) {
    const int vault = 1001 + k * 89;
    std::string code = "SECRET-";
    for (int c = 0; c < 6; ++c) code += code_char();

    const long long jitter = static_cast<long long>(rng() % static_cast<unsigned>(span - 3));
    const long long pos = 6 + k * span + jitter;  // 1-based needle line

    char hex[16];
    std::snprintf(hex, sizeof hex, "%08x", static_cast<unsigned>(rng()));
    body[static_cast<std::size_t>(pos - 1)] =
        "The access code for vault " + std::to_string(vault) + " is " + code + ".";
    body[static_cast<std::size_t>(pos)] =
        std::string(kSentinelPrefix) + hex + " marker line for leak auditing only.";

    Instance inst;
    inst.id = name + "_v" + std::to_string(vault);
    inst.query = "What is the access code for vault " + std::to_string(vault) + "?";
    inst.gold = code;
    corpus.instances.push_back(std::move(inst));
  }

  std::string content;
  content.reserve(static_cast<std::size_t>(lines) * 58);
  for (const auto& line : body) {
    content += line;
    content += '\n';
  }
  corpus.doc_path = write_file(name + ".txt", content);
  for (auto& inst : corpus.instances) inst.doc_path = corpus.doc_path.string();
  return corpus;
}

// ----------------------------------------------------------------------------
// Heuristic backends
// ----------------------------------------------------------------------------

std::vector<ChatRequest> RecordingBackend::requests() const {
  std::lock_guard<std::mutex> lock(mutex_);
  return requests_;
}

void RecordingBackend::record(const ChatRequest& request) {
  std::lock_guard<std::mutex> lock(mutex_);
  requests_.push_back(request);
}

ChatResponse NeedlePolicy::chat(const ChatRequest& request) {
  record(request);
  const std::string context = last_user_message(request);

  ToolCall call;
  if (context.find("Epistemic State: empty") == std::string::npos) {
    // Something is committed already: ask whether it suffices.
    call.name = "Evaluate";
    call.args = json::object();
  } else {
    // Nothing committed. Commit the hit if one is on screen, else search.
    static const std::regex kHit(R"(L(\d+): ([^\n]*) \[([^\]\s]+):(\d+)-(\d+)\])");
    std::smatch last;
    bool found = false;
    for (auto it = std::sregex_iterator(context.begin(), context.end(), kHit);
         it != std::sregex_iterator(); ++it) {
      last = *it;
      found = true;
    }
    if (found) {
      call.name = "Update";
      call.args = {{"units", json::array({{{"content", last[2].str()},
                                           {"anchor", last[3].str() + ":" + last[4].str() +
                                                          "-" + last[5].str()}}})}};
    } else {
      call.name = "Grep";
      call.args = {{"pattern", "access code for vault " + find_vault(context) + " is"},
                   {"context", 1}};
    }
  }

  ChatResponse response;
  response.usage = estimated_usage(request, call.args.dump());
  response.tool_call = std::move(call);
  return response;
}

ChatResponse NeedleDiagnosis::chat(const ChatRequest& request) {
  record(request);
  const std::string context = last_user_message(request);
  const std::string vault = find_vault(context);

  json diagnosis;
  if (context.find("access code for vault " + vault + " is") != std::string::npos) {
    diagnosis = {{"is_sufficient", true},
                 {"missing_info", json::array()},
                 {"reasoning", "The committed state quotes the access code line for vault " +
                                   vault + "."},
                 {"confidence", 0.95}};
  } else {
    diagnosis = {
        {"is_sufficient", false},
        {"missing_info",
         json::array({"The document line stating the access code for vault " + vault + "."})},
        {"reasoning", "The state does not yet contain the access code for vault " + vault + "."},
        {"confidence", 0.2}};
  }

  ChatResponse response;
  response.text = diagnosis.dump();
  response.usage = estimated_usage(request, *response.text);
  return response;
}

ChatResponse NeedleAnswer::chat(const ChatRequest& request) {
  record(request);
  const std::string context = last_user_message(request);

  static const std::regex kCode(R"(SECRET-[A-Z0-9]+)");
  std::smatch m;
  std::string answer = "unknown";
  if (std::regex_search(context, m, kCode)) answer = m[0].str();

  ChatResponse response;
  response.text = answer;
  response.usage = estimated_usage(request, answer);
  return response;
}

EpisodeBackends make_needle_backends() {
  return EpisodeBackends{std::make_shared<NeedlePolicy>(), std::make_shared<NeedleDiagnosis>(),
                         std::make_shared<NeedleAnswer>()};
}

// ----------------------------------------------------------------------------
// Fault injection
// ----------------------------------------------------------------------------

void FakeTransport::push_response(int status, std::string body) {
  std::lock_guard<std::mutex> lock(mutex_);
  script_.push_back(Item{false, HttpResponse{status, std::move(body)}, {}});
}

void FakeTransport::push_error(std::string message) {
  std::lock_guard<std::mutex> lock(mutex_);
  script_.push_back(Item{true, {}, std::move(message)});
}

HttpResponse FakeTransport::post(const std::string& /*endpoint*/, const std::string& body,
                                 const HttpHeaders& headers) {
  Item item;
  {
    std::lock_guard<std::mutex> lock(mutex_);
    ++calls_;
    bodies_.push_back(body);
    headers_.push_back(headers);
    if (script_.empty()) throw std::logic_error("FakeTransport script exhausted");
    item = std::move(script_.front());
    script_.pop_front();
  }
  if (item.is_error) throw Error(ErrorCode::TransportError, item.error);
  return item.response;
}

int FakeTransport::calls() const {
  std::lock_guard<std::mutex> lock(mutex_);
  return calls_;
}

std::vector<std::string> FakeTransport::bodies() const {
  std::lock_guard<std::mutex> lock(mutex_);
  return bodies_;
}

std::vector<HttpHeaders> FakeTransport::seen_headers() const {
  std::lock_guard<std::mutex> lock(mutex_);
  return headers_;
}

std::string completion_body(const std::string& content, long long prompt_tokens,
                            long long completion_tokens) {
  json body = {{"choices", json::array({{{"message", {{"role", "assistant"},
                                                      {"content", content}}},
                                         {"finish_reason", "stop"}}})},
               {"usage",
                {{"prompt_tokens", prompt_tokens}, {"completion_tokens", completion_tokens}}}};
  return body.dump();
}

}  // namespace scout::testing
