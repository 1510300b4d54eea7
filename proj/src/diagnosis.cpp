#include "scout/diagnosis.hpp"

#include "scout/error.hpp"

namespace scout {

namespace {

constexpr const char* kSystemPrompt =
    "You judge whether the knowledge collected so far suffices to answer a query. "
    "Reply with a single JSON object with exactly these fields: "
    "{\"is_sufficient\": bool, \"missing_info\": [string], \"reasoning\": string, "
    "\"confidence\": number between 0 and 1}. "
    "List missing_info entries only when is_sufficient is false.";

// Extracts the first balanced {...} block so prose-wrapped JSON still parses.
std::optional<std::string> first_json_object(const std::string& raw) {
  auto start = raw.find('{');
  if (start == std::string::npos) return std::nullopt;
  int depth = 0;
  bool in_string = false;
  for (std::size_t i = start; i < raw.size(); ++i) {
    char c = raw[i];
    if (in_string) {
      if (c == '\\') ++i;
      else if (c == '"') in_string = false;
      continue;
    }
    if (c == '"') in_string = true;
    else if (c == '{') ++depth;
    else if (c == '}') {
      if (--depth == 0) return raw.substr(start, i - start + 1);
    }
  }
  return std::nullopt;
}

}  // namespace

nlohmann::json GapDiagnosis::to_json() const {
  return {{"is_sufficient", is_sufficient},
          {"missing_info", missing_info},
          {"reasoning", reasoning},
          {"confidence", confidence}};
}

GapDiagnosis parse_diagnosis(const std::string& raw) {
  auto fail = [&raw](const std::string& why) -> Error {
    return Error(ErrorCode::SchemaViolation, why + "; raw output: " + raw);
  };

  nlohmann::json j;
  try {
    j = nlohmann::json::parse(raw);
  } catch (const nlohmann::json::exception&) {
    auto embedded = first_json_object(raw);
    if (!embedded) throw fail("no JSON object found");
    try {
      j = nlohmann::json::parse(*embedded);
    } catch (const nlohmann::json::exception& e) {
      throw fail(std::string("invalid JSON: ") + e.what());
    }
  }
  if (!j.is_object()) throw fail("diagnosis is not a JSON object");

  for (const char* field : {"is_sufficient", "missing_info", "reasoning", "confidence"}) {
    if (!j.contains(field)) throw fail(std::string("missing required field '") + field + "'");
  }
  if (!j["is_sufficient"].is_boolean()) throw fail("is_sufficient must be a boolean");
  if (!j["missing_info"].is_array()) throw fail("missing_info must be an array");
  if (!j["reasoning"].is_string()) throw fail("reasoning must be a string");
  if (!j["confidence"].is_number()) throw fail("confidence must be a number");

  GapDiagnosis g;
  g.is_sufficient = j["is_sufficient"].get<bool>();
  for (const auto& item : j["missing_info"]) {
    if (!item.is_string()) throw fail("missing_info entries must be strings");
    g.missing_info.push_back(item.get<std::string>());
  }
  g.reasoning = j["reasoning"].get<std::string>();
  g.confidence = j["confidence"].get<double>();

  if (g.confidence < 0.0 || g.confidence > 1.0) {
    throw fail("confidence outside [0,1]");
  }
  if (g.is_sufficient && !g.missing_info.empty()) {
    throw fail("sufficient diagnosis lists missing_info");
  }
  if (!g.is_sufficient && g.missing_info.empty()) {
    throw fail("insufficient diagnosis lists no missing_info");
  }
  return g;
}

bool is_terminal(const std::optional<GapDiagnosis>& g) {
  return g.has_value() && g->is_sufficient;
}

std::string assemble_diagnosis_prompt(const std::string& query, const EpistemicState& state) {
  return "Query: " + query + "\n\n" + render(state) +
         "\n\nDoes the epistemic state above contain enough information to answer the query?";
}

GapDiagnosis diagnose(const std::string& query, const EpistemicState& state,
                      Backend& backend, const DiagnosisOptions& options,
                      std::vector<Usage>* usage_out) {
  if (query.empty()) {
    throw Error(ErrorCode::InvalidConfig, "diagnosis query is empty");
  }

  ChatRequest request;
  request.messages.push_back({"system", kSystemPrompt});
  request.messages.push_back({"user", assemble_diagnosis_prompt(query, state)});

  std::string last_error;
  for (int attempt = 0; attempt <= options.parse_retries; ++attempt) {
    ChatResponse response;
    try {
      response = backend.chat(request);
    } catch (const GatewayError& e) {
      if (usage_out) usage_out->push_back(e.usage());
      throw;
    }
    if (usage_out) usage_out->push_back(response.usage);

    std::string raw = response.text.value_or("");
    if (raw.empty() && response.tool_call) raw = response.tool_call->args.dump();
    try {
      return parse_diagnosis(raw);
    } catch (const Error& e) {
      last_error = e.what();
      request.messages.push_back({"assistant", raw});
      request.messages.push_back(
          {"user", std::string("Your previous reply was rejected (") + e.what() +
                       "). Reply again with only the JSON object."});
    }
  }
  throw Error(ErrorCode::SchemaViolation,
              "diagnosis unparsable after " + std::to_string(options.parse_retries) +
                  " retries: " + last_error);
}

}  // namespace scout
