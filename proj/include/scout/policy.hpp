#pragma once

#include <cstddef>
#include <deque>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "scout/cost.hpp"
#include "scout/diagnosis.hpp"
#include "scout/epistemic.hpp"
#include "scout/gateway.hpp"

namespace scout {

// The closed action vocabulary. Foraging actions touch documents and
// produce observations; Update commits to the epistemic state, View renders
// it, Evaluate refreshes the gap diagnosis; the rest are auxiliary
// conveniences.
enum class ActionKind {
  Glob,
  Grep,
  Read,
  Scan,
  GetFileInfo,
  Update,
  Evaluate,
  View,
  CountTokens,
  TodoWrite,
  NormalizeDocument,
};

const char* action_name(ActionKind kind);
ActionKind kind_from_name(const std::string& name);  // UnknownTool on miss

bool is_forage(ActionKind kind);     // Glob/Grep/Read/Scan/GetFileInfo
bool is_state(ActionKind kind);      // Update (E), View (reads E), Evaluate (g)
bool is_auxiliary(ActionKind kind);  // CountTokens / TodoWrite / NormalizeDocument

// All eleven kinds, in declaration order.
std::vector<ActionKind> all_action_kinds();

struct Action {
  ActionKind kind = ActionKind::View;
  nlohmann::json args = nlohmann::json::object();

  nlohmann::json to_json() const;  // {"name": ..., "args": {...}}
  static Action from_json(const nlohmann::json& j);
};

// Validates and canonicalizes a raw tool call. `default_doc` fills the
// "source" argument (and bare anchors) when the caller omitted it, which is
// the common case for single-document instances.
//
//  - Read accepts {"anchor": "doc:a-b" | "a-b" | {source,start,end}} or
//    0-based {"offset", "limit"}; both normalize to an anchor string.
//  - Update accepts {"units": [...]} or a single {content, anchor} pair;
//    both normalize to a units array with string anchors.
//  - Grep "line_range" and Scan "scope" accept [a,b] or {start,end}.
//
// Missing required arguments raise MissingArgument; malformed unit drafts
// raise InvalidUnit; unknown tool names raise UnknownTool.
Action parse_action(const nlohmann::json& call, const std::string& default_doc);

// One completed loop step as it lands in the procedural trace: the action
// taken, the observation that came back, and bookkeeping for the log. `g`
// carries the diagnosis produced at this step (Evaluate steps only).
struct Step {
  int index = 0;
  Action action;
  std::string observation;
  Usage usage;
  double wall_ms = 0.0;
  std::size_t state_size = 0;
  std::optional<GapDiagnosis> g;

  nlohmann::json to_json() const;
  static Step from_json(const nlohmann::json& j);
};

// Append-only procedural trace H_t. Steps must arrive with contiguous
// indices starting at 0; anything else is a programming error.
class Trace {
 public:
  void append(Step step);
  const std::vector<Step>& steps() const { return steps_; }
  std::size_t size() const { return steps_.size(); }
  bool empty() const { return steps_.empty(); }

 private:
  std::vector<Step> steps_;
};

struct TodoItem {
  std::string content;
  std::string status = "pending";
};

class TodoList {
 public:
  void replace(std::vector<TodoItem> items) { items_ = std::move(items); }
  const std::vector<TodoItem>& items() const { return items_; }
  std::string render() const;

 private:
  std::vector<TodoItem> items_;
};

// OpenAI-style function schemas for the given subset of the vocabulary,
// in vocabulary order. Feed straight into ChatRequest::tools.
std::vector<nlohmann::json> tool_catalog(const std::vector<ActionKind>& kinds);

struct ContextOptions {
  int window_steps = 20;     // most recent steps rendered verbatim
  long token_budget = 32000;  // ceiling for the assembled prompt text
};

// Renders the policy prompt: query, current epistemic state, and a window
// of recent steps (older ones collapse into an elision marker). The result
// always fits the token budget; when even the windowed form is too large,
// steps drop oldest-first and, as a last resort, the middle of the text is
// cut out.
std::string assemble_policy_context(const std::string& query, const Trace& trace,
                                    const EpistemicState& state,
                                    const ContextOptions& options = {});

// Compact one-line rendering used in prompts and logs: Name{args} with long
// string values elided.
std::string describe_action(const Action& action);

// Renders the last `window_steps` steps, one per line ("[t=k] Name{...} ->
// observation"), collapsing anything older into an elision marker. Shared by
// the policy prompt and the trace-conditioned answer path.
std::string render_steps(const Trace& trace, int window_steps);

struct DecideOptions {
  ContextOptions context;
  std::vector<ActionKind> allowed = all_action_kinds();
};

// Asks the policy backend for the next action. The model must answer with
// exactly one valid tool call; a prose reply or a malformed call earns one
// corrective re-ask, after which the episode aborts with UnparsableAction.
// Every backend call (including the re-ask) is recorded in the ledger.
Action decide(const std::string& query, const Trace& trace, const EpistemicState& state,
              Backend& backend, const std::string& default_doc,
              const DecideOptions& options = {}, CostLedger* ledger = nullptr);

// A pre-recorded action sequence, used for replay and deterministic tests.
using ActionScript = std::vector<Action>;

// Reads one action per JSONL line. Accepts bare {"name","args"} objects and
// full step records {"t", "action": {...}, ...}, so a trajectory log is
// itself a valid script; lines with neither shape (headers, footers) are
// skipped.
ActionScript load_script(const std::string& path);

// Backend that replays a script: each chat() call emits the next action as
// a tool call. Exhaustion raises ScriptExhausted. Requests are recorded for
// inspection, mirroring MockBackend.
class ScriptBackend : public Backend {
 public:
  explicit ScriptBackend(ActionScript script) : script_(std::move(script)) {}

  ChatResponse chat(const ChatRequest& request) override;
  const std::vector<ChatRequest>& requests() const { return requests_; }
  std::size_t remaining() const { return script_.size() - next_; }

 private:
  ActionScript script_;
  std::size_t next_ = 0;
  std::vector<ChatRequest> requests_;
};

}  // namespace scout
