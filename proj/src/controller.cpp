#include "scout/controller.hpp"

#include <algorithm>
#include <chrono>
#include <sstream>
#include <utility>

#include "scout/error.hpp"
#include "scout/tokenize.hpp"

namespace scout {

namespace {

// Clamp any observation to the per-observation token budget, flagging the
// cut. The environment already budgets its own results; this is the backstop
// for observations assembled here (state renderings, error text, etc.).
std::string clamp_observation(std::string text, long long budget_tokens) {
  static const std::string marker = "\n[result truncated]";
  if (budget_tokens <= 0 || count_tokens(text) <= budget_tokens) return text;
  std::size_t keep = static_cast<std::size_t>(budget_tokens) * 4;
  keep = keep > marker.size() + 4 ? keep - marker.size() - 4 : 0;
  return text.substr(0, keep) + marker;
}

std::string truncated_marker(bool truncated) {
  return truncated ? "\n[result truncated]" : "";
}

DocumentId source_of(const Action& action) {
  return DocumentId{action.args.value("source", "")};
}

std::string obs_glob(const DocumentEnv& env, const Action& action) {
  std::optional<std::string> scope;
  if (action.args.contains("scope")) scope = action.args["scope"].get<std::string>();
  auto ids = env.glob(action.args["pattern"].get<std::string>(), scope);
  if (ids.empty()) return "No documents matched.";
  std::ostringstream out;
  out << "Matched " << ids.size() << " document(s):";
  for (const auto& id : ids) out << "\n- " << id.value;
  return out.str();
}

std::string obs_grep(const DocumentEnv& env, const Action& action) {
  GrepOptions options;
  if (action.args.contains("context")) options.context = action.args["context"].get<long>();
  if (action.args.contains("max_matches")) {
    options.max_matches = action.args["max_matches"].get<long>();
  }
  if (action.args.contains("case_insensitive")) {
    options.case_insensitive = action.args["case_insensitive"].get<bool>();
  }
  GrepResult result =
      env.grep(source_of(action), action.args["pattern"].get<std::string>(), options);
  if (result.snippets.empty()) return "No matches found.";

  std::ostringstream out;
  out << "Found " << result.snippets.size() << " matching line(s):";
  for (const auto& snippet : result.snippets) {
    long line_no = snippet.anchor.start_line;
    long before = static_cast<long>(snippet.context_before.size());
    for (long i = 0; i < before; ++i) {
      out << "\nL" << (line_no - before + i) << "  " << snippet.context_before[i];
    }
    out << "\nL" << line_no << ": " << snippet.line << " [" << snippet.anchor.to_string()
        << "]";
    for (std::size_t i = 0; i < snippet.context_after.size(); ++i) {
      out << "\nL" << (line_no + 1 + static_cast<long>(i)) << "  "
          << snippet.context_after[i];
    }
  }
  out << truncated_marker(result.truncated);
  return out.str();
}

std::string obs_scan(const DocumentEnv& env, const Action& action) {
  std::optional<LineRange> scope;
  if (action.args.contains("scope")) {
    scope = LineRange{action.args["scope"][0].get<long>(), action.args["scope"][1].get<long>()};
  }
  ScanResult result =
      env.scan(source_of(action), action.args["pattern"].get<std::string>(), scope);
  if (result.anchors.empty()) return "No matches found.";
  std::ostringstream out;
  out << "Found " << result.anchors.size() << " matching location(s):";
  for (const auto& anchor : result.anchors) out << "\n- " << anchor.to_string();
  out << truncated_marker(result.truncated);
  return out.str();
}

std::string obs_read(const DocumentEnv& env, const Action& action) {
  Anchor anchor = Anchor::parse(action.args["anchor"].get<std::string>());
  std::optional<long> limit;
  if (action.args.contains("limit")) limit = action.args["limit"].get<long>();
  Observation obs = env.read(anchor, limit);

  std::ostringstream out;
  long line_no = obs.anchor.start_line;
  std::istringstream lines(obs.text);
  std::string line;
  bool first = true;
  while (std::getline(lines, line)) {
    if (!first) out << "\n";
    out << "L" << line_no++ << ": " << line;
    first = false;
  }
  out << truncated_marker(obs.truncated);
  return out.str();
}

std::string obs_file_info(const FileInfo& info) {
  return nlohmann::json{{"byte_size", info.byte_size},
                        {"estimated_tokens", info.estimated_tokens},
                        {"needs_normalization", info.needs_normalization}}
      .dump();
}

std::string render_choices(const std::vector<std::string>& choices) {
  if (choices.empty()) return "";
  std::ostringstream out;
  out << "\nOptions:\n";
  for (std::size_t i = 0; i < choices.size(); ++i) {
    const std::string& choice = choices[i];
    if (!choice.empty() && choice.front() == '(') {
      out << choice << "\n";  // already labeled
    } else {
      out << "(" << static_cast<char>('A' + i) << ") " << choice << "\n";
    }
  }
  return out.str();
}

}  // namespace

const char* to_string(Mode mode) {
  switch (mode) {
    case Mode::scout:
      return "scout";
    case Mode::react:
      return "react";
    case Mode::no_forage:
      return "no_forage";
    case Mode::no_file_tools:
      return "no_file_tools";
    case Mode::no_grounding:
      return "no_grounding";
  }
  return "unknown";
}

Mode mode_from_string(const std::string& name) {
  if (name == "scout") return Mode::scout;
  if (name == "react") return Mode::react;
  if (name == "no_forage") return Mode::no_forage;
  if (name == "no_file_tools") return Mode::no_file_tools;
  if (name == "no_grounding") return Mode::no_grounding;
  throw Error(ErrorCode::InvalidConfig, "unknown mode '" + name + "'");
}

nlohmann::json Instance::to_json() const {
  nlohmann::json j{{"id", id}, {"query", query}, {"doc_path", doc_path}};
  if (!choices.empty()) j["choices"] = choices;
  if (gold) j["gold"] = *gold;
  return j;
}

Instance Instance::from_json(const nlohmann::json& j) {
  Instance instance;
  if (!j.is_object() || !j.contains("id") || !j.contains("query")) {
    throw Error(ErrorCode::InvalidConfig, "instance requires 'id' and 'query'");
  }
  instance.id = j["id"].get<std::string>();
  instance.query = j["query"].get<std::string>();
  if (j.contains("doc_path") && j["doc_path"].is_string()) {
    instance.doc_path = j["doc_path"].get<std::string>();
  } else if (j.contains("doc") && j["doc"].is_string()) {
    instance.doc_path = j["doc"].get<std::string>();
  }
  if (j.contains("choices") && j["choices"].is_array()) {
    for (const auto& c : j["choices"]) instance.choices.push_back(c.get<std::string>());
  }
  if (j.contains("gold") && j["gold"].is_string()) {
    instance.gold = j["gold"].get<std::string>();
  }
  return instance;
}

nlohmann::json config_to_json(const EpisodeConfig& config) {
  return nlohmann::json{{"mode", to_string(config.mode)},
                        {"t_max", config.t_max},
                        {"context_budget", config.context_budget},
                        {"observation_budget", config.observation_budget},
                        {"trace_window", config.trace_window},
                        {"seed", config.seed},
                        {"aux_tools", config.aux_tools}};
}

EpisodeConfig config_from_json(const nlohmann::json& j) {
  EpisodeConfig config;
  if (!j.is_object()) return config;
  if (j.contains("mode") && j["mode"].is_string()) {
    config.mode = mode_from_string(j["mode"].get<std::string>());
  }
  if (j.contains("t_max")) config.t_max = j["t_max"].get<int>();
  if (j.contains("context_budget")) config.context_budget = j["context_budget"].get<long>();
  if (j.contains("observation_budget")) {
    config.observation_budget = j["observation_budget"].get<long long>();
  }
  if (j.contains("trace_window")) config.trace_window = j["trace_window"].get<int>();
  if (j.contains("seed")) config.seed = j["seed"].get<unsigned>();
  if (j.contains("aux_tools")) config.aux_tools = j["aux_tools"].get<bool>();
  return config;
}

std::vector<ActionKind> allowed_kinds(const EpisodeConfig& config) {
  auto blocked = [&](ActionKind kind) {
    switch (config.mode) {
      case Mode::no_forage:
        // No foraging at all: the agent may only manage state and answer.
        if (is_forage(kind)) return true;
        break;
      case Mode::no_file_tools:
        // Keep the bare Read/GetFileInfo pair; drop navigation (Glob, Grep,
        // Scan) and the convenience tools.
        if (kind == ActionKind::Glob || kind == ActionKind::Grep ||
            kind == ActionKind::Scan || is_auxiliary(kind)) {
          return true;
        }
        break;
      default:
        break;
    }
    if (!config.aux_tools && is_auxiliary(kind)) return true;
    return false;
  };

  std::vector<ActionKind> kinds;
  for (ActionKind kind : all_action_kinds()) {
    if (!blocked(kind)) kinds.push_back(kind);
  }
  return kinds;
}

GroundingMode grounding_mode(const EpisodeConfig& config) {
  return config.mode == Mode::no_grounding ? GroundingMode::off : GroundingMode::strict;
}

StepOutcome execute_action(DocumentEnv& env, const Action& action,
                           const EpistemicState& state,
                           const std::optional<GapDiagnosis>& g, TodoList& todos,
                           const std::string& query, Backend* diagnosis_backend,
                           const EpisodeConfig& config, CostLedger* ledger,
                           int step_index) {
  StepOutcome outcome;
  outcome.state = state;
  outcome.g = g;

  auto allowed = allowed_kinds(config);
  if (std::find(allowed.begin(), allowed.end(), action.kind) == allowed.end()) {
    outcome.observation = "Error: " + std::string(action_name(action.kind)) +
                          " is unavailable in mode '" + to_string(config.mode) + "'";
    return outcome;
  }

  try {
    switch (action.kind) {
      case ActionKind::Glob:
        outcome.observation = obs_glob(env, action);
        break;
      case ActionKind::Grep:
        outcome.observation = obs_grep(env, action);
        break;
      case ActionKind::Scan:
        outcome.observation = obs_scan(env, action);
        break;
      case ActionKind::Read:
        outcome.observation = obs_read(env, action);
        break;
      case ActionKind::GetFileInfo:
        outcome.observation = obs_file_info(env.get_file_info(source_of(action)));
        break;
      case ActionKind::NormalizeDocument: {
        long max_length = action.args.value("max_length", 0L);
        FileInfo info = env.normalize_document(source_of(action), max_length);
        outcome.observation =
            "Normalized " + action.args["source"].get<std::string>() + ": " + obs_file_info(info);
        break;
      }
      case ActionKind::Update: {
        std::vector<UnitDraft> drafts;
        for (const auto& unit : action.args["units"]) {
          drafts.push_back(UnitDraft{unit["content"].get<std::string>(),
                                     Anchor::parse(unit["anchor"].get<std::string>())});
        }
        EpistemicState next =
            commit(state, drafts, step_index, grounding_mode(config), &env);
        std::size_t added = next.size() - state.size();
        outcome.observation = "Committed " + std::to_string(added) + " unit(s); state now holds " +
                              std::to_string(next.size()) + ".\n" + render(next);
        outcome.state = std::move(next);
        break;
      }
      case ActionKind::Evaluate: {
        if (!diagnosis_backend) {
          throw Error(ErrorCode::InvalidConfig, "no diagnosis backend configured");
        }
        std::vector<Usage> usages;
        try {
          GapDiagnosis diagnosis =
              diagnose(query, state, *diagnosis_backend, DiagnosisOptions{}, &usages);
          if (ledger) {
            for (const auto& u : usages) ledger->add(CallKind::evaluate, u);
          }
          outcome.observation = diagnosis.to_json().dump();
          outcome.g = std::move(diagnosis);
        } catch (...) {
          if (ledger) {
            for (const auto& u : usages) ledger->add(CallKind::evaluate, u);
          }
          throw;
        }
        break;
      }
      case ActionKind::View:
        outcome.observation = render(state);
        break;
      case ActionKind::CountTokens: {
        const std::string text = action.args["text"].get<std::string>();
        const std::string model = action.args["model"].get<std::string>();
        outcome.observation =
            "Token count: " + std::to_string(count_tokens(text, model)) + " (" + model + ")";
        break;
      }
      case ActionKind::TodoWrite: {
        std::vector<TodoItem> items;
        for (const auto& item : action.args["todos"]) {
          items.push_back(TodoItem{item["content"].get<std::string>(),
                                   item["status"].get<std::string>()});
        }
        todos.replace(std::move(items));
        outcome.observation =
            "Todo list updated (" + std::to_string(todos.items().size()) + " items).";
        break;
      }
    }
  } catch (const Error& err) {
    if (!is_tool_error(err.code())) throw;
    // Tool-level failure: report it as an observation and leave E and g as
    // they were, so a bad anchor or pattern costs a step, not the episode.
    outcome.observation = std::string("Error: ") + err.what();
    outcome.state = state;
    outcome.g = g;
  }

  outcome.observation =
      clamp_observation(std::move(outcome.observation), config.observation_budget);
  return outcome;
}

namespace {

// The shared skeleton of both answer payloads: query, then whatever stands in
// for the agent's knowledge, then options and the answering instruction.
std::string answer_payload(const std::string& query, const std::string& knowledge,
                           const std::vector<std::string>& choices) {
  std::ostringstream out;
  out << "Query: " << query << "\n\n" << knowledge << "\n";
  out << render_choices(choices);
  out << "\nAnswer the query using only the information above.";
  if (!choices.empty()) out << " Reply with the best option.";
  return out.str();
}

}  // namespace

std::string AnswerRequest::to_text() const {
  return answer_payload(query, state_rendering, choices);
}

AnswerRequest make_answer_request(const std::string& query, const EpistemicState& state,
                                  const std::vector<std::string>& choices) {
  return AnswerRequest{query, render(state), choices};
}

std::string assemble_react_answer_context(const std::string& query, const Trace& trace,
                                          const std::vector<std::string>& choices,
                                          int window_steps) {
  return answer_payload(query, "Recent steps:\n" + render_steps(trace, window_steps),
                        choices);
}

namespace {

std::string run_answer(const std::string& context, Backend& backend, CostLedger* ledger) {
  ChatRequest request;
  request.temperature = 0.0;
  request.max_output_tokens = 512;
  request.messages.push_back(
      {"system", "Answer strictly from the material in the user message."});
  request.messages.push_back({"user", context});

  ChatResponse response;
  try {
    response = backend.chat(request);
  } catch (const GatewayError& err) {
    if (ledger) ledger->add(CallKind::answer, err.usage());
    throw;
  }
  if (ledger) ledger->add(CallKind::answer, response.usage);
  return response.text.value_or("");
}

}  // namespace

std::string answer_decoupled(const std::string& query, const EpistemicState& state,
                             const std::vector<std::string>& choices, Backend& backend,
                             CostLedger* ledger) {
  return run_answer(make_answer_request(query, state, choices).to_text(), backend, ledger);
}

std::string answer_react(const std::string& query, const Trace& trace,
                         const std::vector<std::string>& choices, Backend& backend,
                         int window_steps, CostLedger* ledger) {
  return run_answer(assemble_react_answer_context(query, trace, choices, window_steps),
                    backend, ledger);
}

EpisodeResult run_episode(DocumentEnv& env, const Instance& instance,
                          const EpisodeConfig& config, const Backends& backends) {
  if (!backends.policy || !backends.diagnosis || !backends.answer) {
    throw Error(ErrorCode::InvalidConfig, "an episode needs policy, diagnosis, and answer backends");
  }
  if (config.t_max < 1) {
    throw Error(ErrorCode::InvalidConfig, "t_max must be at least 1");
  }

  EpisodeResult result;
  result.instance_id = instance.id;

  DocumentId doc;
  if (!instance.doc_path.empty()) {
    doc = env.register_document(instance.doc_path).id;
  } else {
    auto ids = env.documents();
    if (!ids.empty()) doc = ids.front();
  }
  result.doc_id = doc.value;

  EpistemicState state;
  std::optional<GapDiagnosis> g;  // never evaluated yet; non-terminal
  TodoList todos;

  DecideOptions decide_options;
  decide_options.allowed = allowed_kinds(config);
  decide_options.context.window_steps = config.trace_window;
  decide_options.context.token_budget = config.context_budget;

  auto fail = [&](const Error& cause) {
    EpisodeResult partial = std::move(result);
    partial.final_state = state;
    partial.final_g = g;
    partial.terminated = "error";
    partial.cost_k = episode_cost(partial.ledger);
    return EpisodeError(cause, std::move(partial));
  };

  int t = 0;
  while (t < config.t_max && !is_terminal(g)) {
    auto started = std::chrono::steady_clock::now();
    std::size_t ledger_mark = result.ledger.size();

    Action action;
    StepOutcome outcome;
    try {
      action = decide(instance.query, result.trace, state, *backends.policy, doc.value,
                      decide_options, &result.ledger);
      outcome = execute_action(env, action, state, g, todos, instance.query,
                               backends.diagnosis, config, &result.ledger, t);
    } catch (const EpisodeError&) {
      throw;
    } catch (const Error& err) {
      throw fail(err);
    }

    state = std::move(outcome.state);
    g = std::move(outcome.g);

    Step step;
    step.index = t;
    step.action = std::move(action);
    step.observation = std::move(outcome.observation);
    for (std::size_t i = ledger_mark; i < result.ledger.size(); ++i) {
      const Usage& u = result.ledger.entries()[i].usage;
      step.usage.input_tokens += u.input_tokens;
      step.usage.output_tokens += u.output_tokens;
      step.usage.estimated = step.usage.estimated || u.estimated;
    }
    step.wall_ms = std::chrono::duration<double, std::milli>(
                       std::chrono::steady_clock::now() - started)
                       .count();
    step.state_size = state.size();
    if (step.action.kind == ActionKind::Evaluate && g) step.g = g;
    result.trace.append(std::move(step));
    ++t;
  }

  try {
    if (config.mode == Mode::react) {
      result.answer = answer_react(instance.query, result.trace, instance.choices,
                                   *backends.answer, config.trace_window, &result.ledger);
    } else {
      result.answer = answer_decoupled(instance.query, state, instance.choices,
                                       *backends.answer, &result.ledger);
    }
  } catch (const Error& err) {
    throw fail(err);
  }

  result.final_state = std::move(state);
  result.final_g = std::move(g);
  result.terminated = is_terminal(result.final_g) ? "sufficient" : "budget_exhausted";
  result.cost_k = episode_cost(result.ledger);
  return result;
}

}  // namespace scout
