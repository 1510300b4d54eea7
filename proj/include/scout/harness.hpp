#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "scout/controller.hpp"
#include "scout/cost.hpp"
#include "scout/gateway.hpp"

namespace scout {

// One instance per JSONL line: {id, query, doc_path, gold?, choices?}.
// Relative doc paths resolve against doc_root when given, otherwise against
// the instance file's directory.
std::vector<Instance> load_instances(const std::string& path,
                                     const std::string& doc_root = "");

// First "(X)" option label in a text, if any.
std::optional<char> extract_choice_label(const std::string& text);

// Whether an answer matches the instance's gold. Multiple-choice instances
// compare extracted option labels when both sides have one; otherwise the
// comparison is a whitespace/case/punctuation-insensitive exact match.
// No gold -> Unscorable.
bool score_answer(const std::string& answer, const Instance& instance);

// ----------------------------------------------------------------------------
// Full-context baseline
// ----------------------------------------------------------------------------

struct BaselineOptions {
  long long context_budget = 128000;  // tokens available for the document
};

struct BaselineResult {
  std::string answer;
  CostLedger ledger;
  double cost_k = 0.0;
  bool truncated = false;  // document did not fit and was middle-truncated
};

// The no-foraging reference point: the whole document goes into one prompt.
// When the document exceeds the budget (minus the prompt's own overhead) its
// token sequence is middle-truncated to fit, mirroring the usual practice of
// keeping a long document's head and tail.
BaselineResult run_full_context_baseline(DocumentEnv& env, const Instance& instance,
                                         Backend& backend,
                                         const BaselineOptions& options = {});

// ----------------------------------------------------------------------------
// Benchmark driver
// ----------------------------------------------------------------------------

// Owning bundle handed out by a backend factory; episodes hold it alive for
// their duration. The three roles may share one object.
struct EpisodeBackends {
  std::shared_ptr<Backend> policy;
  std::shared_ptr<Backend> diagnosis;
  std::shared_ptr<Backend> answer;

  Backends raw() const { return Backends{policy.get(), diagnosis.get(), answer.get()}; }
};

// Fresh backends per episode. `run` is the repetition index and `seed` the
// episode's derived seed, for factories with stochastic behavior.
using BackendFactory =
    std::function<EpisodeBackends(const Instance& instance, int run, unsigned seed)>;

struct BenchmarkOptions {
  EpisodeConfig episode;
  int runs = 1;             // repetitions over the instance set
  int threads = 1;          // parallel episodes
  std::string log_dir;      // empty = keep logs in memory only
};

struct EpisodeSummary {
  std::string instance_id;
  int run = 0;
  std::string answer;
  std::optional<bool> correct;  // nullopt when the instance has no gold
  double cost_k = 0.0;
  std::size_t steps = 0;
  std::string terminated;
  std::string error;  // backend failure message, when terminated == "error"

  nlohmann::json to_json() const;
};

struct BenchmarkReport {
  int instances = 0;
  int runs = 0;
  std::vector<EpisodeSummary> episodes;
  std::vector<double> run_accuracies;  // percent, one per run
  double accuracy = 0.0;               // mean over runs, percent
  double accuracy_stddev = 0.0;        // across runs (0 for a single run)
  double mean_cost_k = 0.0;            // over all episodes
  double token_efficiency = 0.0;       // accuracy / mean_cost_k
  int errors = 0;
  bool no_data = false;  // nothing scorable: accuracy fields are meaningless

  nlohmann::json to_json() const;
};

// Runs every instance `runs` times. Each episode gets a fresh environment
// (documents registered from its instance) and fresh backends from the
// factory. Episodes that die on a backend failure score as incorrect and
// still contribute their partial cost. An empty instance set (or one with no
// gold anywhere) yields an empty/no-data report rather than an error. With
// log_dir set, each episode's trajectory lands in "<id>_run<k>.jsonl" under
// it.
BenchmarkReport run_benchmark(const std::vector<Instance>& instances,
                              const BenchmarkOptions& options,
                              const BackendFactory& factory);

// Scores previously written trajectory logs. Gold comes from the embedded
// instance records; `extra_instances` supplies or overrides gold by id (for
// logs written without it). Logs without gold are counted but not scored.
struct ScoreReport {
  int total = 0;
  int scored = 0;
  int correct = 0;
  double accuracy = 0.0;       // percent, over scored logs
  double mean_cost_k = 0.0;    // over all logs
  double token_efficiency = 0.0;
  int errors = 0;              // logs with terminated == "error"
  bool no_data = false;        // no log was scorable

  nlohmann::json to_json() const;
};

ScoreReport score_logs(const std::vector<std::string>& log_paths,
                       const std::vector<Instance>& extra_instances = {});

// ----------------------------------------------------------------------------
// Config files
// ----------------------------------------------------------------------------

// Flat "key = value" config format ('#' comments, blank lines ignored).
// Episode keys: mode, t_max, context_budget, observation_budget,
// trace_window, seed, aux_tools. Backend keys: endpoint, model, auth_env,
// timeout_ms, max_retries, backoff_base_ms, backoff_multiplier. Harness
// keys: runs, threads, log_dir, baseline_context_budget. Unknown keys ->
// InvalidConfig.
struct HarnessConfig {
  EpisodeConfig episode;
  BackendConfig backend;
  BaselineOptions baseline;
  int runs = 1;
  int threads = 1;
  std::string log_dir;
};

HarnessConfig load_config(const std::string& path);

}  // namespace scout
