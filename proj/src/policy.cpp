#include "scout/policy.hpp"

#include <array>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <utility>

#include "scout/document_env.hpp"
#include "scout/error.hpp"
#include "scout/tokenize.hpp"

namespace scout {

namespace {

struct KindName {
  ActionKind kind;
  const char* name;
};

constexpr std::array<KindName, 11> kKindNames = {{
    {ActionKind::Glob, "Glob"},
    {ActionKind::Grep, "Grep"},
    {ActionKind::Read, "Read"},
    {ActionKind::Scan, "Scan"},
    {ActionKind::GetFileInfo, "GetFileInfo"},
    {ActionKind::Update, "Update"},
    {ActionKind::Evaluate, "Evaluate"},
    {ActionKind::View, "View"},
    {ActionKind::CountTokens, "CountTokens"},
    {ActionKind::TodoWrite, "TodoWrite"},
    {ActionKind::NormalizeDocument, "NormalizeDocument"},
}};

[[noreturn]] void missing(const std::string& tool, const std::string& arg,
                          const std::string& detail = "") {
  std::string msg = tool + " requires argument '" + arg + "'";
  if (!detail.empty()) msg += " (" + detail + ")";
  throw Error(ErrorCode::MissingArgument, msg);
}

std::string require_string(const nlohmann::json& args, const std::string& tool,
                           const std::string& key, bool allow_empty = false) {
  auto it = args.find(key);
  if (it == args.end() || !it->is_string()) missing(tool, key, "expected a string");
  std::string value = it->get<std::string>();
  if (value.empty() && !allow_empty) missing(tool, key, "must be non-empty");
  return value;
}

// "source" falls back to the instance's document when the call omits it.
std::string resolve_source(const nlohmann::json& args, const std::string& tool,
                           const std::string& default_doc) {
  auto it = args.find("source");
  if (it != args.end() && it->is_string() && !it->get<std::string>().empty()) {
    return it->get<std::string>();
  }
  if (default_doc.empty()) missing(tool, "source");
  return default_doc;
}

// Accepts [start, end] or {"start": a, "end": b}; yields a canonical pair.
std::pair<long, long> parse_range(const nlohmann::json& j, const std::string& tool,
                                  const std::string& key) {
  if (j.is_array() && j.size() == 2 && j[0].is_number_integer() &&
      j[1].is_number_integer()) {
    return {j[0].get<long>(), j[1].get<long>()};
  }
  if (j.is_object() && j.contains("start") && j.contains("end") &&
      j["start"].is_number_integer() && j["end"].is_number_integer()) {
    return {j["start"].get<long>(), j["end"].get<long>()};
  }
  missing(tool, key, "expected [start, end]");
}

// Normalizes the anchor argument to the canonical "doc_id:start-end" string.
// Bare "start-end" strings and {source, start, end} objects pick up the
// default document. Malformed anchors surface as AnchorOutOfRange, the same
// code the environment uses, so they become error observations downstream.
std::string canonical_anchor(const nlohmann::json& j, const std::string& default_doc) {
  if (j.is_string()) {
    Anchor anchor = Anchor::parse(j.get<std::string>());
    if (anchor.doc.value.empty()) anchor.doc.value = default_doc;
    if (anchor.doc.value.empty()) {
      throw Error(ErrorCode::AnchorOutOfRange,
                  "anchor '" + j.get<std::string>() + "' names no document");
    }
    return anchor.to_string();
  }
  if (j.is_object()) {
    Anchor anchor;
    if (j.contains("source") && j["source"].is_string()) {
      anchor.doc.value = j["source"].get<std::string>();
    } else if (j.contains("doc") && j["doc"].is_string()) {
      anchor.doc.value = j["doc"].get<std::string>();
    } else {
      anchor.doc.value = default_doc;
    }
    if (anchor.doc.value.empty() || !j.contains("start") || !j.contains("end") ||
        !j["start"].is_number_integer() || !j["end"].is_number_integer()) {
      throw Error(ErrorCode::AnchorOutOfRange,
                  "anchor object requires source, start, and end");
    }
    anchor.start_line = j["start"].get<long>();
    anchor.end_line = j["end"].get<long>();
    if (anchor.start_line < 1 || anchor.end_line < anchor.start_line) {
      throw Error(ErrorCode::AnchorOutOfRange, "anchor '" + anchor.to_string() +
                                                   "' is not a valid line range");
    }
    return anchor.to_string();
  }
  throw Error(ErrorCode::AnchorOutOfRange, "anchor must be a string or an object");
}

nlohmann::json canonical_unit(const nlohmann::json& j, const std::string& default_doc) {
  if (!j.is_object()) {
    throw Error(ErrorCode::InvalidUnit, "each unit must be an object");
  }
  if (!j.contains("content") || !j["content"].is_string() ||
      j["content"].get<std::string>().empty()) {
    throw Error(ErrorCode::InvalidUnit, "unit content must be a non-empty string");
  }
  if (!j.contains("anchor")) {
    throw Error(ErrorCode::InvalidUnit, "unit is missing its anchor");
  }
  return nlohmann::json{{"content", j["content"]},
                        {"anchor", canonical_anchor(j["anchor"], default_doc)}};
}

nlohmann::json schema_property(const std::string& type, const std::string& description) {
  return nlohmann::json{{"type", type}, {"description", description}};
}

nlohmann::json make_tool(const std::string& name, const std::string& description,
                         nlohmann::json properties, std::vector<std::string> required) {
  nlohmann::json parameters{{"type", "object"}, {"properties", std::move(properties)}};
  if (!required.empty()) parameters["required"] = required;
  return nlohmann::json{
      {"type", "function"},
      {"function",
       {{"name", name}, {"description", description}, {"parameters", parameters}}}};
}

// Elides long string values so prompts and logs stay readable.
nlohmann::json elide_strings(const nlohmann::json& j, std::size_t cap) {
  if (j.is_string()) {
    const auto& s = j.get_ref<const std::string&>();
    if (s.size() > cap) return s.substr(0, cap - 3) + "...";
    return j;
  }
  if (j.is_object() || j.is_array()) {
    nlohmann::json out = j.is_object() ? nlohmann::json::object() : nlohmann::json::array();
    if (j.is_object()) {
      for (auto it = j.begin(); it != j.end(); ++it) out[it.key()] = elide_strings(it.value(), cap);
    } else {
      for (const auto& item : j) out.push_back(elide_strings(item, cap));
    }
    return out;
  }
  return j;
}

}  // namespace

const char* action_name(ActionKind kind) {
  for (const auto& entry : kKindNames) {
    if (entry.kind == kind) return entry.name;
  }
  return "unknown";
}

ActionKind kind_from_name(const std::string& name) {
  for (const auto& entry : kKindNames) {
    if (name == entry.name) return entry.kind;
  }
  throw Error(ErrorCode::UnknownTool, "no tool named '" + name + "'");
}

bool is_forage(ActionKind kind) {
  switch (kind) {
    case ActionKind::Glob:
    case ActionKind::Grep:
    case ActionKind::Read:
    case ActionKind::Scan:
    case ActionKind::GetFileInfo:
      return true;
    default:
      return false;
  }
}

bool is_state(ActionKind kind) {
  return kind == ActionKind::Update || kind == ActionKind::View ||
         kind == ActionKind::Evaluate;
}

bool is_auxiliary(ActionKind kind) {
  return kind == ActionKind::CountTokens || kind == ActionKind::TodoWrite ||
         kind == ActionKind::NormalizeDocument;
}

std::vector<ActionKind> all_action_kinds() {
  std::vector<ActionKind> kinds;
  kinds.reserve(kKindNames.size());
  for (const auto& entry : kKindNames) kinds.push_back(entry.kind);
  return kinds;
}

nlohmann::json Action::to_json() const {
  return nlohmann::json{{"name", action_name(kind)}, {"args", args}};
}

Action Action::from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("name") || !j["name"].is_string()) {
    throw Error(ErrorCode::UnparsableAction, "action requires a 'name' field");
  }
  Action action;
  action.kind = kind_from_name(j["name"].get<std::string>());
  if (j.contains("args")) {
    if (!j["args"].is_object()) {
      throw Error(ErrorCode::UnparsableAction, "action 'args' must be an object");
    }
    action.args = j["args"];
  }
  return action;
}

Action parse_action(const nlohmann::json& call, const std::string& default_doc) {
  Action raw = Action::from_json(call);
  const nlohmann::json& args = raw.args;
  Action out;
  out.kind = raw.kind;

  switch (raw.kind) {
    case ActionKind::Glob: {
      out.args["pattern"] = require_string(args, "Glob", "pattern");
      if (args.contains("scope") && args["scope"].is_string()) {
        out.args["scope"] = args["scope"];
      }
      break;
    }
    case ActionKind::Grep: {
      out.args["pattern"] = require_string(args, "Grep", "pattern");
      out.args["source"] = resolve_source(args, "Grep", default_doc);
      if (args.contains("context") && args["context"].is_number_integer()) {
        out.args["context"] = args["context"];
      }
      if (args.contains("max_matches") && args["max_matches"].is_number_integer()) {
        out.args["max_matches"] = args["max_matches"];
      }
      if (args.contains("case_insensitive") && args["case_insensitive"].is_boolean()) {
        out.args["case_insensitive"] = args["case_insensitive"];
      }
      break;
    }
    case ActionKind::Read: {
      if (args.contains("anchor")) {
        out.args["anchor"] = canonical_anchor(args["anchor"], default_doc);
      } else if (args.contains("offset")) {
        // offset is the 1-based first line, limit the number of lines.
        if (!args["offset"].is_number_integer() || args["offset"].get<long>() < 1) {
          missing("Read", "offset", "expected a positive 1-based line number");
        }
        long offset = args["offset"].get<long>();
        long limit = 100;
        if (args.contains("limit")) {
          if (!args["limit"].is_number_integer() || args["limit"].get<long>() < 1) {
            missing("Read", "limit", "expected a positive integer");
          }
          limit = args["limit"].get<long>();
        }
        std::string doc = resolve_source(args, "Read", default_doc);
        Anchor anchor{DocumentId{doc}, offset, offset + limit - 1, {}};
        out.args["anchor"] = anchor.to_string();
      } else {
        missing("Read", "anchor", "provide an anchor or offset+limit");
      }
      if (args.contains("limit") && args.contains("anchor") &&
          args["limit"].is_number_integer() && args["limit"].get<long>() >= 1) {
        out.args["limit"] = args["limit"];
      }
      break;
    }
    case ActionKind::Scan: {
      out.args["pattern"] = require_string(args, "Scan", "pattern");
      out.args["source"] = resolve_source(args, "Scan", default_doc);
      if (args.contains("scope")) {
        auto [a, b] = parse_range(args["scope"], "Scan", "scope");
        out.args["scope"] = nlohmann::json::array({a, b});
      }
      break;
    }
    case ActionKind::GetFileInfo: {
      out.args["source"] = resolve_source(args, "GetFileInfo", default_doc);
      break;
    }
    case ActionKind::Update: {
      nlohmann::json units = nlohmann::json::array();
      if (args.contains("units")) {
        if (!args["units"].is_array() || args["units"].empty()) {
          throw Error(ErrorCode::InvalidUnit, "Update 'units' must be a non-empty array");
        }
        for (const auto& unit : args["units"]) {
          units.push_back(canonical_unit(unit, default_doc));
        }
      } else if (args.contains("content")) {
        units.push_back(canonical_unit(args, default_doc));
      } else {
        missing("Update", "units");
      }
      out.args["units"] = std::move(units);
      break;
    }
    case ActionKind::Evaluate: {
      break;
    }
    case ActionKind::View: {
      if (args.contains("E_id")) out.args["E_id"] = args["E_id"];
      break;
    }
    case ActionKind::CountTokens: {
      out.args["text"] = require_string(args, "CountTokens", "text", /*allow_empty=*/true);
      out.args["model"] =
          (args.contains("model") && args["model"].is_string())
              ? args["model"].get<std::string>()
              : std::string("chars4");
      break;
    }
    case ActionKind::TodoWrite: {
      if (!args.contains("todos") || !args["todos"].is_array()) {
        missing("TodoWrite", "todos", "expected an array");
      }
      nlohmann::json todos = nlohmann::json::array();
      for (const auto& item : args["todos"]) {
        if (item.is_string()) {
          todos.push_back({{"content", item}, {"status", "pending"}});
        } else if (item.is_object() && item.contains("content") &&
                   item["content"].is_string()) {
          std::string status = "pending";
          if (item.contains("status") && item["status"].is_string()) {
            status = item["status"].get<std::string>();
          }
          todos.push_back({{"content", item["content"]}, {"status", status}});
        } else {
          missing("TodoWrite", "todos", "items must be strings or {content, status}");
        }
      }
      out.args["todos"] = std::move(todos);
      break;
    }
    case ActionKind::NormalizeDocument: {
      out.args["source"] = resolve_source(args, "NormalizeDocument", default_doc);
      if (args.contains("max_length")) {
        if (!args["max_length"].is_number_integer() || args["max_length"].get<long>() < 0) {
          missing("NormalizeDocument", "max_length", "expected a non-negative integer");
        }
        out.args["max_length"] = args["max_length"];
      }
      break;
    }
  }
  return out;
}

nlohmann::json Step::to_json() const {
  nlohmann::json j{{"t", index},
                   {"action", action.to_json()},
                   {"observation", observation},
                   {"usage",
                    {{"input_tokens", usage.input_tokens},
                     {"output_tokens", usage.output_tokens},
                     {"estimated", usage.estimated}}},
                   {"wall_ms", wall_ms},
                   {"state_size", state_size}};
  j["g"] = g ? g->to_json() : nlohmann::json(nullptr);
  return j;
}

Step Step::from_json(const nlohmann::json& j) {
  Step step;
  if (j.contains("t") && j["t"].is_number_integer()) {
    step.index = j["t"].get<int>();
  } else if (j.contains("index") && j["index"].is_number_integer()) {
    step.index = j["index"].get<int>();
  }
  if (!j.contains("action")) {
    throw Error(ErrorCode::UnparsableAction, "step record has no action");
  }
  step.action = Action::from_json(j["action"]);
  if (j.contains("observation") && j["observation"].is_string()) {
    step.observation = j["observation"].get<std::string>();
  }
  if (j.contains("usage") && j["usage"].is_object()) {
    const auto& u = j["usage"];
    if (u.contains("input_tokens")) step.usage.input_tokens = u["input_tokens"].get<long>();
    if (u.contains("output_tokens")) step.usage.output_tokens = u["output_tokens"].get<long>();
    if (u.contains("estimated")) step.usage.estimated = u["estimated"].get<bool>();
  }
  if (j.contains("wall_ms") && j["wall_ms"].is_number()) {
    step.wall_ms = j["wall_ms"].get<double>();
  }
  if (j.contains("state_size") && j["state_size"].is_number_integer()) {
    step.state_size = j["state_size"].get<std::size_t>();
  }
  if (j.contains("g") && j["g"].is_object()) {
    const auto& gj = j["g"];
    GapDiagnosis g;
    if (gj.contains("is_sufficient")) g.is_sufficient = gj["is_sufficient"].get<bool>();
    if (gj.contains("missing_info")) {
      for (const auto& m : gj["missing_info"]) g.missing_info.push_back(m.get<std::string>());
    }
    if (gj.contains("reasoning") && gj["reasoning"].is_string()) {
      g.reasoning = gj["reasoning"].get<std::string>();
    }
    if (gj.contains("confidence") && gj["confidence"].is_number()) {
      g.confidence = gj["confidence"].get<double>();
    }
    step.g = std::move(g);
  }
  return step;
}

void Trace::append(Step step) {
  if (step.index != static_cast<int>(steps_.size())) {
    throw std::logic_error("trace indices must be contiguous: expected " +
                           std::to_string(steps_.size()) + ", got " +
                           std::to_string(step.index));
  }
  steps_.push_back(std::move(step));
}

std::string TodoList::render() const {
  if (items_.empty()) return "Todo list: (empty)";
  std::string out = "Todo list:";
  for (const auto& item : items_) {
    out += "\n- [" + item.status + "] " + item.content;
  }
  return out;
}

std::vector<nlohmann::json> tool_catalog(const std::vector<ActionKind>& kinds) {
  std::vector<nlohmann::json> tools;
  tools.reserve(kinds.size());
  for (ActionKind kind : kinds) {
    switch (kind) {
      case ActionKind::Glob:
        tools.push_back(make_tool(
            "Glob", "Find documents whose name matches a glob pattern.",
            {{"pattern", schema_property("string", "Glob pattern, e.g. '*.txt'.")},
             {"scope", schema_property("string", "Optional name prefix to search under.")}},
            {"pattern"}));
        break;
      case ActionKind::Grep:
        tools.push_back(make_tool(
            "Grep",
            "Search a document with a POSIX extended regular expression; returns "
            "matching lines with anchors.",
            {{"pattern", schema_property("string", "POSIX extended regex.")},
             {"source", schema_property("string", "Document to search.")},
             {"context",
              schema_property("integer", "Lines of context around each match.")},
             {"max_matches", schema_property("integer", "Cap on returned matches.")},
             {"case_insensitive", schema_property("boolean", "Ignore letter case.")}},
            {"pattern"}));
        break;
      case ActionKind::Read:
        tools.push_back(make_tool(
            "Read",
            "Read a contiguous line range, either by anchor or by offset+limit.",
            {{"anchor",
              schema_property("string", "Line anchor 'doc_id:start-end' (1-based, inclusive).")},
             {"offset", schema_property("integer", "1-based first line to read.")},
             {"limit", schema_property("integer", "Number of lines to read (default 100).")},
             {"source", schema_property("string", "Document for the offset form.")}},
            {}));
        break;
      case ActionKind::Scan:
        tools.push_back(make_tool(
            "Scan",
            "Lightweight sweep for a pattern; returns only anchors, not text.",
            {{"pattern", schema_property("string", "POSIX extended regex.")},
             {"source", schema_property("string", "Document to scan.")},
             {"scope", schema_property("array", "Restrict the scan to [start, end] lines.")}},
            {"pattern"}));
        break;
      case ActionKind::GetFileInfo:
        tools.push_back(make_tool(
            "GetFileInfo", "Size, line count, and token estimate for a document.",
            {{"source", schema_property("string", "Document to describe.")}}, {}));
        break;
      case ActionKind::Update:
        tools.push_back(make_tool(
            "Update",
            "Commit findings to the epistemic state. Each unit pairs a statement "
            "with the anchor that grounds it.",
            {{"units",
              nlohmann::json{{"type", "array"},
                             {"description", "Units to commit."},
                             {"items",
                              {{"type", "object"},
                               {"properties",
                                {{"content", schema_property("string", "The finding.")},
                                 {"anchor",
                                  schema_property("string",
                                                  "Grounding anchor 'doc_id:start-end'.")}}},
                               {"required", nlohmann::json::array({"content", "anchor"})}}}}}},
            {"units"}));
        break;
      case ActionKind::Evaluate:
        tools.push_back(make_tool(
            "Evaluate",
            "Judge whether the epistemic state is sufficient to answer the query.",
            nlohmann::json::object(), {}));
        break;
      case ActionKind::View:
        tools.push_back(make_tool(
            "View", "Show the current epistemic state.",
            {{"E_id", schema_property("string", "Ignored; the state is shown in full.")}},
            {}));
        break;
      case ActionKind::CountTokens:
        tools.push_back(make_tool(
            "CountTokens", "Count tokens in a text under a named tokenizer.",
            {{"text", schema_property("string", "Text to measure.")},
             {"model", schema_property("string", "Tokenizer name (default 'chars4').")}},
            {"text"}));
        break;
      case ActionKind::TodoWrite:
        tools.push_back(make_tool(
            "TodoWrite", "Replace the scratch todo list.",
            {{"todos",
              schema_property("array", "Items, as strings or {content, status} objects.")}},
            {"todos"}));
        break;
      case ActionKind::NormalizeDocument:
        tools.push_back(make_tool(
            "NormalizeDocument",
            "Re-wrap a document whose lines are too long to anchor usefully.",
            {{"source", schema_property("string", "Document to normalize.")},
             {"max_length",
              schema_property("integer", "Target maximum line length (0 = default).")}},
            {}));
        break;
    }
  }
  return tools;
}

std::string describe_action(const Action& action) {
  nlohmann::json compact = elide_strings(action.args, 60);
  return std::string(action_name(action.kind)) + compact.dump();
}

std::string render_steps(const Trace& trace, int window_steps) {
  const auto& steps = trace.steps();
  std::size_t window = std::min<std::size_t>(
      steps.size(), window_steps < 0 ? 0 : static_cast<std::size_t>(window_steps));
  std::ostringstream out;
  if (steps.empty()) {
    out << "(none yet)\n";
    return out.str();
  }
  std::size_t elided = steps.size() - window;
  if (elided > 0) {
    out << "[... " << elided << " earlier steps elided ...]\n";
  }
  for (std::size_t i = steps.size() - window; i < steps.size(); ++i) {
    const Step& step = steps[i];
    out << "[t=" << step.index << "] " << describe_action(step.action) << " -> "
        << step.observation << "\n";
  }
  return out.str();
}

std::string assemble_policy_context(const std::string& query, const Trace& trace,
                                    const EpistemicState& state,
                                    const ContextOptions& options) {
  std::size_t window = std::min<std::size_t>(
      trace.size(), options.window_steps < 0 ? 0 : static_cast<std::size_t>(options.window_steps));

  auto build = [&](std::size_t wnd) {
    std::ostringstream out;
    out << "Query: " << query << "\n\n" << render(state) << "\n\nRecent steps:\n"
        << render_steps(trace, static_cast<int>(wnd))
        << "\nRespond with exactly one tool call for the next action.";
    return out.str();
  };

  std::string text = build(window);
  while (count_tokens(text) > options.token_budget && window > 0) {
    --window;
    text = build(window);
  }
  if (count_tokens(text) > options.token_budget) {
    // Even the stepless rendering is over budget (enormous query or state):
    // cut the middle of the text rather than silently exceeding the budget.
    const std::string marker = "\n[... context truncated ...]\n";
    std::size_t keep = static_cast<std::size_t>(options.token_budget) * 4;
    keep = keep > marker.size() ? keep - marker.size() : 0;
    std::size_t half = keep / 2;
    text = text.substr(0, half) + marker + text.substr(text.size() - half);
  }
  return text;
}

namespace {

ChatRequest make_policy_request(const std::string& context,
                                const std::vector<ActionKind>& allowed) {
  ChatRequest request;
  request.temperature = 0.0;
  request.max_output_tokens = 1024;
  request.messages.push_back(
      {"system",
       "You are an information-foraging agent. Explore the documents with the "
       "provided tools, commit grounded findings with Update, and check "
       "sufficiency with Evaluate. Use exactly one tool call per turn."});
  request.messages.push_back({"user", context});
  request.tools = nlohmann::json(tool_catalog(allowed));
  return request;
}

}  // namespace

Action decide(const std::string& query, const Trace& trace, const EpistemicState& state,
              Backend& backend, const std::string& default_doc,
              const DecideOptions& options, CostLedger* ledger) {
  std::string context = assemble_policy_context(query, trace, state, options.context);
  ChatRequest request = make_policy_request(context, options.allowed);

  std::string last_fault;
  for (int attempt = 0; attempt < 2; ++attempt) {
    ChatResponse response;
    try {
      response = backend.chat(request);
    } catch (const GatewayError& err) {
      if (ledger) ledger->add(CallKind::policy, err.usage());
      throw;
    }
    if (ledger) ledger->add(CallKind::policy, response.usage);

    std::string assistant_repr;
    if (response.tool_call) {
      const ToolCall& call = *response.tool_call;
      try {
        return parse_action({{"name", call.name}, {"args", call.args}}, default_doc);
      } catch (const Error& err) {
        // A malformed call gets one correction, like a prose reply would.
        last_fault = err.what();
        assistant_repr = "[tool call] " + call.name + " " + call.args.dump();
      }
    } else {
      last_fault = "reply contained no tool call";
      assistant_repr = response.text.value_or("");
    }

    if (attempt == 0) {
      request.messages.push_back({"assistant", assistant_repr});
      request.messages.push_back(
          {"user", "Your previous reply was not a single valid tool call (" + last_fault +
                       "). Respond with exactly one tool call using the provided tools."});
    }
  }
  throw Error(ErrorCode::UnparsableAction,
              "policy failed to produce a valid tool call after one re-ask: " + last_fault);
}

ActionScript load_script(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::IoError, "cannot open script file: " + path);
  }
  ActionScript script;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::size_t first = line.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) continue;
    nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded()) {
      throw Error(ErrorCode::IoError,
                  path + ":" + std::to_string(line_no) + ": not valid JSON");
    }
    if (j.is_object() && j.contains("action") && j["action"].is_object()) {
      script.push_back(Action::from_json(j["action"]));
    } else if (j.is_object() && j.contains("name")) {
      script.push_back(Action::from_json(j));
    }
    // Header/footer records (no action payload) are part of the log format
    // and skip silently, so a trajectory file replays as-is.
  }
  return script;
}

ChatResponse ScriptBackend::chat(const ChatRequest& request) {
  requests_.push_back(request);
  long long input_estimate =
      estimate_tokens(request.to_json("script").dump().size());
  if (next_ >= script_.size()) {
    throw GatewayError(ErrorCode::ScriptExhausted,
                       "script exhausted after " + std::to_string(script_.size()) +
                           " actions",
                       Usage{input_estimate, 0, true});
  }
  const Action& action = script_[next_];
  ++next_;

  ChatResponse response;
  response.tool_call = ToolCall{action_name(action.kind), action.args};
  response.usage =
      Usage{input_estimate, estimate_tokens(action.to_json().dump().size()), true};
  return response;
}

}  // namespace scout
