#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "scout/cost.hpp"
#include "scout/diagnosis.hpp"
#include "scout/document_env.hpp"
#include "scout/epistemic.hpp"
#include "scout/gateway.hpp"
#include "scout/policy.hpp"

namespace scout {

// Run modes. `scout` is the full system; the rest are ablations that each
// remove exactly one ingredient:
//   react          answer conditions on the procedural trace instead of the
//                  committed state (no state decoupling at answer time)
//   no_forage      document tools unavailable; the agent works blind
//   no_file_tools  search/skim tools unavailable; only sequential Read
//   no_grounding   anchors accepted unchecked at commit time
enum class Mode { scout, react, no_forage, no_file_tools, no_grounding };

const char* to_string(Mode mode);
Mode mode_from_string(const std::string& name);  // InvalidConfig on miss

struct EpisodeConfig {
  Mode mode = Mode::scout;
  int t_max = 50;                      // loop budget T_max
  long context_budget = 32000;         // tokens for the policy prompt
  long long observation_budget = 4000; // tokens per observation
  int trace_window = 20;               // steps rendered verbatim in prompts
  unsigned seed = 0;                   // threaded through to stochastic backends
  bool aux_tools = true;               // CountTokens/TodoWrite/NormalizeDocument available
};

struct Instance {
  std::string id;
  std::string query;
  std::string doc_path;  // empty = use the environment's first document
  std::vector<std::string> choices;  // empty for free-form queries
  std::optional<std::string> gold;

  nlohmann::json to_json() const;
  static Instance from_json(const nlohmann::json& j);
};

nlohmann::json config_to_json(const EpisodeConfig& config);
EpisodeConfig config_from_json(const nlohmann::json& j);  // missing keys keep defaults

// The three backend roles an episode needs. They may all point at the same
// object; none may be null.
struct Backends {
  Backend* policy = nullptr;
  Backend* diagnosis = nullptr;
  Backend* answer = nullptr;
};

struct EpisodeResult {
  std::string instance_id;
  std::string doc_id;
  Trace trace;
  EpistemicState final_state;
  std::optional<GapDiagnosis> final_g;
  std::string answer;
  std::string terminated;  // "sufficient" | "budget_exhausted" | "error"
  CostLedger ledger;
  double cost_k = 0.0;
};

// A backend-level failure mid-episode. Carries everything accumulated up to
// the failure so the caller can still persist a (terminated = "error") log.
class EpisodeError : public Error {
 public:
  EpisodeError(const Error& cause, EpisodeResult partial)
      : Error(cause), partial_(std::move(partial)) {}
  const EpisodeResult& partial() const { return partial_; }

 private:
  EpisodeResult partial_;
};

// The action vocabulary left available under a config, in catalog order.
std::vector<ActionKind> allowed_kinds(const EpisodeConfig& config);

GroundingMode grounding_mode(const EpisodeConfig& config);

// What one executed action did: the observation fed back to the policy, plus
// the (possibly unchanged) epistemic state and diagnosis afterwards. Exactly
// one of the two may differ from the inputs, and only for Update (state) or
// Evaluate (g); every other action leaves both untouched.
struct StepOutcome {
  std::string observation;
  EpistemicState state;
  std::optional<GapDiagnosis> g;
};

// Executes one action against the environment/state. Tool-level failures
// (bad anchors, bad patterns, unknown documents, tools blocked by the mode)
// come back as "Error: ..." observations with state and g unchanged;
// backend-level failures propagate. Evaluate calls the diagnosis backend and
// records its usage in the ledger.
StepOutcome execute_action(DocumentEnv& env, const Action& action,
                           const EpistemicState& state,
                           const std::optional<GapDiagnosis>& g, TodoList& todos,
                           const std::string& query, Backend* diagnosis_backend,
                           const EpisodeConfig& config, CostLedger* ledger,
                           int step_index);

// Everything the decoupled answer call is allowed to see. The struct has no
// field that could carry trace content; state_rendering comes from
// render(E_T) and nothing else.
struct AnswerRequest {
  std::string query;
  std::string state_rendering;
  std::vector<std::string> choices;

  std::string to_text() const;  // the user-message payload sent to the backend
};

AnswerRequest make_answer_request(const std::string& query, const EpistemicState& state,
                                  const std::vector<std::string>& choices);

// Payload for the react ablation: the windowed trace rendering stands in
// where the state rendering would otherwise be. Apart from that swap the
// surrounding text matches AnswerRequest::to_text().
std::string assemble_react_answer_context(const std::string& query, const Trace& trace,
                                          const std::vector<std::string>& choices,
                                          int window_steps);

// Generates the final answer from the committed state alone. By construction
// no trace is available to this path.
std::string answer_decoupled(const std::string& query, const EpistemicState& state,
                             const std::vector<std::string>& choices, Backend& backend,
                             CostLedger* ledger);

// The undecoupled variant: the answer prompt carries the recent procedural
// trace (observations and all) in place of the state.
std::string answer_react(const std::string& query, const Trace& trace,
                         const std::vector<std::string>& choices, Backend& backend,
                         int window_steps, CostLedger* ledger);

// Runs one full episode: the forage/commit/evaluate loop until the diagnosis
// says sufficient or the step budget runs out, then the answer phase.
// Registers instance.doc_path if it is not already known to the environment.
// Backend-level failures surface as EpisodeError with the partial result.
EpisodeResult run_episode(DocumentEnv& env, const Instance& instance,
                          const EpisodeConfig& config, const Backends& backends);

}  // namespace scout
