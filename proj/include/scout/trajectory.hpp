#pragma once

#include <fstream>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"

#include "scout/controller.hpp"
#include "scout/policy.hpp"

namespace scout {

// Streams one episode to JSONL: a header record, one record per step, and a
// footer. Records are distinguished by shape, not by a discriminator field:
// the header carries "instance_id" + "config", steps carry "t" + "action",
// the footer carries "answer" + "terminated". A finished log doubles as a
// replay script, since each step record embeds its action.
class TrajectoryWriter {
 public:
  explicit TrajectoryWriter(std::ostream& out) : out_(&out) {}
  explicit TrajectoryWriter(const std::string& path);  // IoError on failure

  void write_header(const Instance& instance, const EpisodeConfig& config);
  void write_step(const Step& step);
  void write_footer(const EpisodeResult& result);

  // Convenience: header, every trace step, footer.
  void write_episode(const Instance& instance, const EpisodeConfig& config,
                     const EpisodeResult& result);

 private:
  void emit(const nlohmann::json& record);

  std::ofstream file_;
  std::ostream* out_ = nullptr;
};

struct TrajectoryLog {
  nlohmann::json header;
  std::vector<Step> steps;
  nlohmann::json footer;  // may be empty for a crashed run

  Instance instance() const;      // parsed out of the header
  EpisodeConfig config() const;   // parsed out of the header
  bool has_footer() const { return footer.is_object(); }
};

TrajectoryLog load_trajectory(const std::string& path);

// Re-runs a logged episode deterministically: the logged actions drive the
// policy, logged diagnoses drive Evaluate, and the logged answer drives the
// answer call. The caller supplies the environment (documents must be
// reachable); the header's config applies unless overridden.
EpisodeResult replay_trajectory(const TrajectoryLog& log, DocumentEnv& env);

// Differences between a log and a (re)run of it: step count, per-step action
// and observation, final state, answer. Empty = faithful reproduction.
std::vector<std::string> compare_replay(const TrajectoryLog& log,
                                        const EpisodeResult& result);

// Checks the single-mutation discipline across a log's step records: the
// state size may change only at a successful Update, and diagnoses may
// appear only on Evaluate steps. Returns one message per violation.
std::vector<std::string> audit_branch_purity(const TrajectoryLog& log);

}  // namespace scout
