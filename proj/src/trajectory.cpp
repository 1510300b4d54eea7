#include "scout/trajectory.hpp"

#include <memory>
#include <utility>

#include "scout/error.hpp"

namespace scout {

TrajectoryWriter::TrajectoryWriter(const std::string& path) : file_(path) {
  if (!file_) {
    throw Error(ErrorCode::IoError, "cannot open trajectory file for writing: " + path);
  }
  out_ = &file_;
}

void TrajectoryWriter::emit(const nlohmann::json& record) {
  (*out_) << record.dump() << "\n";
  out_->flush();
}

void TrajectoryWriter::write_header(const Instance& instance, const EpisodeConfig& config) {
  emit(nlohmann::json{{"instance_id", instance.id},
                      {"config", config_to_json(config)},
                      {"mode", to_string(config.mode)},
                      {"instance", instance.to_json()}});
}

void TrajectoryWriter::write_step(const Step& step) { emit(step.to_json()); }

void TrajectoryWriter::write_footer(const EpisodeResult& result) {
  emit(nlohmann::json{{"answer", result.answer},
                      {"terminated", result.terminated},
                      {"final_state", result.final_state.to_json()},
                      {"cost_k", result.cost_k}});
}

void TrajectoryWriter::write_episode(const Instance& instance, const EpisodeConfig& config,
                                     const EpisodeResult& result) {
  write_header(instance, config);
  for (const Step& step : result.trace.steps()) write_step(step);
  write_footer(result);
}

TrajectoryLog load_trajectory(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::IoError, "cannot open trajectory file: " + path);
  }
  TrajectoryLog log;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
    nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
      throw Error(ErrorCode::IoError,
                  path + ":" + std::to_string(line_no) + ": not a JSON record");
    }
    if (j.contains("instance_id") && j.contains("config")) {
      log.header = j;
    } else if (j.contains("t") && j.contains("action")) {
      log.steps.push_back(Step::from_json(j));
    } else if (j.contains("answer") && j.contains("terminated")) {
      log.footer = j;
    } else {
      throw Error(ErrorCode::IoError,
                  path + ":" + std::to_string(line_no) + ": unrecognized record shape");
    }
  }
  if (!log.header.is_object()) {
    throw Error(ErrorCode::IoError, path + ": no header record found");
  }
  return log;
}

Instance TrajectoryLog::instance() const {
  if (header.contains("instance") && header["instance"].is_object()) {
    return Instance::from_json(header["instance"]);
  }
  // Minimal header (foreign log): fall back to the id alone.
  Instance instance;
  instance.id = header.value("instance_id", "");
  return instance;
}

EpisodeConfig TrajectoryLog::config() const {
  return config_from_json(header.value("config", nlohmann::json::object()));
}

EpisodeResult replay_trajectory(const TrajectoryLog& log, DocumentEnv& env) {
  Instance instance = log.instance();
  EpisodeConfig config = log.config();
  // The logged actions drive the loop exactly as far as the log goes.
  config.t_max = static_cast<int>(log.steps.size());

  ActionScript script;
  MockBackend diagnosis;
  for (const Step& step : log.steps) {
    script.push_back(step.action);
    if (step.action.kind == ActionKind::Evaluate && step.g) {
      diagnosis.push_text(step.g->to_json().dump());
    }
  }
  ScriptBackend policy(std::move(script));
  MockBackend answer;
  answer.push_text(log.footer.is_object() ? log.footer.value("answer", "") : "");

  Backends backends{&policy, &diagnosis, &answer};
  return run_episode(env, instance, config, backends);
}

std::vector<std::string> compare_replay(const TrajectoryLog& log,
                                        const EpisodeResult& result) {
  std::vector<std::string> diffs;
  const auto& steps = result.trace.steps();
  if (steps.size() != log.steps.size()) {
    diffs.push_back("step count: log has " + std::to_string(log.steps.size()) +
                    ", replay has " + std::to_string(steps.size()));
  }
  std::size_t n = std::min(steps.size(), log.steps.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (steps[i].action.to_json() != log.steps[i].action.to_json()) {
      diffs.push_back("t=" + std::to_string(i) + ": action differs (" +
                      describe_action(log.steps[i].action) + " vs " +
                      describe_action(steps[i].action) + ")");
    }
    if (steps[i].observation != log.steps[i].observation) {
      diffs.push_back("t=" + std::to_string(i) + ": observation differs");
    }
    if (steps[i].state_size != log.steps[i].state_size) {
      diffs.push_back("t=" + std::to_string(i) + ": state size differs (" +
                      std::to_string(log.steps[i].state_size) + " vs " +
                      std::to_string(steps[i].state_size) + ")");
    }
  }
  if (log.has_footer()) {
    if (result.answer != log.footer.value("answer", "")) {
      diffs.push_back("answer differs");
    }
    if (log.footer.contains("final_state") &&
        result.final_state.to_json() != log.footer["final_state"]) {
      diffs.push_back("final state differs");
    }
    if (result.terminated != log.footer.value("terminated", "")) {
      diffs.push_back("termination differs (" + log.footer.value("terminated", "") +
                      " vs " + result.terminated + ")");
    }
  }
  return diffs;
}

std::vector<std::string> audit_branch_purity(const TrajectoryLog& log) {
  std::vector<std::string> violations;
  std::size_t state_size = 0;
  for (const Step& step : log.steps) {
    ActionKind kind = step.action.kind;
    bool errored = step.observation.rfind("Error:", 0) == 0;

    if (kind == ActionKind::Update && !errored) {
      if (step.state_size < state_size) {
        violations.push_back("t=" + std::to_string(step.index) +
                             ": Update shrank the state");
      }
    } else if (step.state_size != state_size) {
      violations.push_back("t=" + std::to_string(step.index) + ": " +
                           action_name(kind) + " changed the state size (" +
                           std::to_string(state_size) + " -> " +
                           std::to_string(step.state_size) + ")");
    }

    if (step.g.has_value() && kind != ActionKind::Evaluate) {
      violations.push_back("t=" + std::to_string(step.index) + ": " +
                           action_name(kind) + " recorded a diagnosis");
    }
    if (kind == ActionKind::Evaluate && !errored && !step.g.has_value()) {
      violations.push_back("t=" + std::to_string(step.index) +
                           ": Evaluate recorded no diagnosis");
    }
    state_size = step.state_size;
  }
  return violations;
}

}  // namespace scout
