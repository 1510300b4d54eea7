#include "scout/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include "scout/error.hpp"
#include "scout/tokenize.hpp"
#include "scout/trajectory.hpp"

namespace scout {

namespace {

std::string trim(const std::string& s) {
  std::size_t first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return "";
  std::size_t last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

// Case-folded, whitespace-collapsed, trailing-punctuation-stripped form used
// for free-text answer comparison.
std::string normalize_answer(const std::string& s) {
  std::string out;
  bool pending_space = false;
  for (char c : s) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  while (!out.empty() && (out.back() == '.' || out.back() == '!')) out.pop_back();
  return out;
}

}  // namespace

std::vector<Instance> load_instances(const std::string& path,
                                     const std::string& doc_root) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::IoError, "cannot open instance file: " + path);
  }
  std::filesystem::path base =
      doc_root.empty() ? std::filesystem::path(path).parent_path()
                       : std::filesystem::path(doc_root);

  std::vector<Instance> instances;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded()) {
      throw Error(ErrorCode::IoError,
                  path + ":" + std::to_string(line_no) + ": not valid JSON");
    }
    Instance instance = Instance::from_json(j);
    if (!instance.doc_path.empty()) {
      std::filesystem::path doc(instance.doc_path);
      if (doc.is_relative()) instance.doc_path = (base / doc).string();
    }
    instances.push_back(std::move(instance));
  }
  return instances;
}

std::optional<char> extract_choice_label(const std::string& text) {
  for (std::size_t i = 0; i + 2 < text.size(); ++i) {
    if (text[i] == '(' && text[i + 2] == ')' &&
        std::isupper(static_cast<unsigned char>(text[i + 1]))) {
      return text[i + 1];
    }
  }
  return std::nullopt;
}

bool score_answer(const std::string& answer, const Instance& instance) {
  if (!instance.gold) {
    throw Error(ErrorCode::Unscorable, "instance '" + instance.id + "' has no gold answer");
  }
  const std::string& gold = *instance.gold;
  if (!instance.choices.empty()) {
    auto gold_label = extract_choice_label(gold);
    // A bare-letter gold ("C") also names a label.
    if (!gold_label && gold.size() == 1 &&
        std::isupper(static_cast<unsigned char>(gold[0]))) {
      gold_label = gold[0];
    }
    auto answer_label = extract_choice_label(answer);
    if (gold_label && answer_label) return *gold_label == *answer_label;
  }
  return normalize_answer(answer) == normalize_answer(gold);
}

// ----------------------------------------------------------------------------
// Full-context baseline
// ----------------------------------------------------------------------------

BaselineResult run_full_context_baseline(DocumentEnv& env, const Instance& instance,
                                         Backend& backend, const BaselineOptions& options) {
  DocumentId doc;
  if (!instance.doc_path.empty()) {
    doc = env.register_document(instance.doc_path).id;
  } else {
    auto ids = env.documents();
    if (ids.empty()) {
      throw Error(ErrorCode::NotFound, "baseline has no document to read");
    }
    doc = ids.front();
  }

  std::ifstream in(env.handle(doc).path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::IoError, "cannot read document: " + env.handle(doc).path.string());
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  std::string text = buf.str();

  std::ostringstream prompt_head;
  prompt_head << "Query: " << instance.query << "\n\nDocument:\n";
  std::ostringstream prompt_tail;
  if (!instance.choices.empty()) {
    prompt_tail << "\nOptions:\n";
    for (std::size_t i = 0; i < instance.choices.size(); ++i) {
      const std::string& choice = instance.choices[i];
      if (!choice.empty() && choice.front() == '(') {
        prompt_tail << choice << "\n";
      } else {
        prompt_tail << "(" << static_cast<char>('A' + i) << ") " << choice << "\n";
      }
    }
  }
  prompt_tail << "\nAnswer the query using only the document above.";
  if (!instance.choices.empty()) prompt_tail << " Reply with the best option.";

  BaselineResult result;

  // Fit the document into what the budget leaves after the fixed prompt text.
  long long overhead =
      count_tokens(prompt_head.str()) + count_tokens(prompt_tail.str());
  long long doc_budget = options.context_budget - overhead;
  if (doc_budget < 0) doc_budget = 0;
  if (count_tokens(text) > doc_budget) {
    auto tokens = tokenize(text);
    tokens = middle_truncate(tokens, static_cast<std::size_t>(doc_budget));
    text = detokenize(tokens);
    result.truncated = true;
  }

  ChatRequest request;
  request.temperature = 0.0;
  request.max_output_tokens = 512;
  request.messages.push_back(
      {"system", "Answer strictly from the material in the user message."});
  request.messages.push_back({"user", prompt_head.str() + text + prompt_tail.str()});

  ChatResponse response;
  try {
    response = backend.chat(request);
  } catch (const GatewayError& err) {
    result.ledger.add(CallKind::baseline, err.usage());
    throw;
  }
  result.ledger.add(CallKind::baseline, response.usage);
  result.answer = response.text.value_or("");
  result.cost_k = episode_cost(result.ledger);
  return result;
}

// ----------------------------------------------------------------------------
// Benchmark driver
// ----------------------------------------------------------------------------

nlohmann::json EpisodeSummary::to_json() const {
  nlohmann::json j{{"instance_id", instance_id}, {"run", run},
                   {"answer", answer},           {"cost_k", cost_k},
                   {"steps", steps},             {"terminated", terminated}};
  j["correct"] = correct ? nlohmann::json(*correct) : nlohmann::json(nullptr);
  if (!error.empty()) j["error"] = error;
  return j;
}

nlohmann::json BenchmarkReport::to_json() const {
  nlohmann::json eps = nlohmann::json::array();
  for (const auto& e : episodes) eps.push_back(e.to_json());
  return nlohmann::json{{"instances", instances},
                        {"runs", runs},
                        {"episodes", eps},
                        {"run_accuracies", run_accuracies},
                        {"accuracy", accuracy},
                        {"accuracy_stddev", accuracy_stddev},
                        {"mean_cost_k", mean_cost_k},
                        {"token_efficiency", token_efficiency},
                        {"errors", errors},
                        {"no_data", no_data}};
}

BenchmarkReport run_benchmark(const std::vector<Instance>& instances,
                              const BenchmarkOptions& options,
                              const BackendFactory& factory) {
  if (options.runs < 1 || options.threads < 1) {
    throw Error(ErrorCode::InvalidConfig, "runs and threads must both be >= 1");
  }
  if (instances.empty()) {
    // Nothing to run: an empty report, with the accuracy fields flagged as
    // meaningless rather than silently zero.
    BenchmarkReport report;
    report.runs = options.runs;
    report.no_data = true;
    return report;
  }
  if (!options.log_dir.empty()) {
    std::filesystem::create_directories(options.log_dir);
  }

  const std::size_t total = instances.size() * static_cast<std::size_t>(options.runs);
  std::vector<EpisodeSummary> episodes(total);

  auto run_one = [&](std::size_t job) {
    int run = static_cast<int>(job / instances.size());
    const Instance& instance = instances[job % instances.size()];
    unsigned seed = options.episode.seed + 10007u * static_cast<unsigned>(job);

    EpisodeSummary summary;
    summary.instance_id = instance.id;
    summary.run = run;

    EpisodeConfig config = options.episode;
    config.seed = seed;
    DocumentEnv env(EnvConfig{options.episode.observation_budget});
    EpisodeBackends backends = factory(instance, run, seed);

    EpisodeResult result;
    try {
      result = run_episode(env, instance, config, backends.raw());
    } catch (const EpisodeError& err) {
      result = err.partial();
      summary.error = err.what();
    }

    summary.answer = result.answer;
    summary.cost_k = result.cost_k;
    summary.steps = result.trace.size();
    summary.terminated = result.terminated;
    if (instance.gold) {
      // A crashed episode has no (or a partial) answer; it scores as wrong.
      summary.correct = summary.error.empty() && score_answer(result.answer, instance);
    }

    if (!options.log_dir.empty()) {
      std::filesystem::path log_path =
          std::filesystem::path(options.log_dir) /
          (instance.id + "_run" + std::to_string(run) + ".jsonl");
      TrajectoryWriter writer(log_path.string());
      writer.write_episode(instance, config, result);
    }
    episodes[job] = std::move(summary);
  };

  if (options.threads == 1) {
    for (std::size_t job = 0; job < total; ++job) run_one(job);
  } else {
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
      for (std::size_t job = next.fetch_add(1); job < total; job = next.fetch_add(1)) {
        run_one(job);
      }
    };
    std::vector<std::thread> pool;
    int n = std::min<int>(options.threads, static_cast<int>(total));
    pool.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  BenchmarkReport report;
  report.instances = static_cast<int>(instances.size());
  report.runs = options.runs;
  report.episodes = std::move(episodes);

  double cost_sum = 0.0;
  int scored_total = 0;
  for (int run = 0; run < options.runs; ++run) {
    int scored = 0;
    int correct = 0;
    for (std::size_t i = 0; i < instances.size(); ++i) {
      const EpisodeSummary& e =
          report.episodes[static_cast<std::size_t>(run) * instances.size() + i];
      cost_sum += e.cost_k;
      if (!e.error.empty()) ++report.errors;
      if (e.correct.has_value()) {
        ++scored;
        if (*e.correct) ++correct;
      }
    }
    scored_total += scored;
    report.run_accuracies.push_back(scored > 0 ? 100.0 * correct / scored : 0.0);
  }
  report.no_data = scored_total == 0;

  double mean = 0.0;
  for (double a : report.run_accuracies) mean += a;
  mean /= static_cast<double>(report.run_accuracies.size());
  double var = 0.0;
  for (double a : report.run_accuracies) var += (a - mean) * (a - mean);
  var /= static_cast<double>(report.run_accuracies.size());

  report.accuracy = mean;
  report.accuracy_stddev = std::sqrt(var);
  report.mean_cost_k = cost_sum / static_cast<double>(report.episodes.size());
  report.token_efficiency =
      report.mean_cost_k > 0.0 ? token_efficiency(report.accuracy, report.mean_cost_k) : 0.0;
  return report;
}

nlohmann::json ScoreReport::to_json() const {
  return nlohmann::json{{"total", total},
                        {"scored", scored},
                        {"correct", correct},
                        {"accuracy", accuracy},
                        {"mean_cost_k", mean_cost_k},
                        {"token_efficiency", token_efficiency},
                        {"errors", errors},
                        {"no_data", no_data}};
}

ScoreReport score_logs(const std::vector<std::string>& log_paths,
                       const std::vector<Instance>& extra_instances) {
  ScoreReport report;
  double cost_sum = 0.0;
  for (const auto& path : log_paths) {
    TrajectoryLog log = load_trajectory(path);
    Instance instance = log.instance();
    for (const Instance& extra : extra_instances) {
      if (extra.id == instance.id) {
        if (extra.gold) instance.gold = extra.gold;
        if (!extra.choices.empty()) instance.choices = extra.choices;
        break;
      }
    }
    ++report.total;
    if (log.has_footer()) {
      cost_sum += log.footer.value("cost_k", 0.0);
      if (log.footer.value("terminated", "") == "error") ++report.errors;
      if (instance.gold) {
        ++report.scored;
        if (score_answer(log.footer.value("answer", ""), instance)) ++report.correct;
      }
    } else {
      ++report.errors;  // crashed before the footer
    }
  }
  report.no_data = report.scored == 0;
  report.accuracy = report.scored > 0 ? 100.0 * report.correct / report.scored : 0.0;
  report.mean_cost_k = report.total > 0 ? cost_sum / report.total : 0.0;
  report.token_efficiency =
      report.mean_cost_k > 0.0 ? token_efficiency(report.accuracy, report.mean_cost_k) : 0.0;
  return report;
}

// ----------------------------------------------------------------------------
// Config files
// ----------------------------------------------------------------------------

HarnessConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::IoError, "cannot open config file: " + path);
  }

  HarnessConfig config;
  std::string line;
  std::size_t line_no = 0;

  auto as_long = [&](const std::string& key, const std::string& value) -> long long {
    try {
      std::size_t pos = 0;
      long long parsed = std::stoll(value, &pos);
      if (pos != value.size()) throw std::invalid_argument(value);
      return parsed;
    } catch (const std::exception&) {
      throw Error(ErrorCode::InvalidConfig,
                  path + ":" + std::to_string(line_no) + ": '" + key +
                      "' needs an integer, got '" + value + "'");
    }
  };
  auto as_bool = [&](const std::string& key, const std::string& value) -> bool {
    if (value == "true" || value == "1") return true;
    if (value == "false" || value == "0") return false;
    throw Error(ErrorCode::InvalidConfig,
                path + ":" + std::to_string(line_no) + ": '" + key +
                    "' needs true/false, got '" + value + "'");
  };

  while (std::getline(in, line)) {
    ++line_no;
    std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    std::size_t eq = stripped.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::InvalidConfig,
                  path + ":" + std::to_string(line_no) + ": expected 'key = value'");
    }
    std::string key = trim(stripped.substr(0, eq));
    std::string value = trim(stripped.substr(eq + 1));

    if (key == "mode") {
      config.episode.mode = mode_from_string(value);
    } else if (key == "t_max") {
      config.episode.t_max = static_cast<int>(as_long(key, value));
    } else if (key == "context_budget") {
      config.episode.context_budget = static_cast<long>(as_long(key, value));
    } else if (key == "observation_budget") {
      config.episode.observation_budget = as_long(key, value);
    } else if (key == "trace_window") {
      config.episode.trace_window = static_cast<int>(as_long(key, value));
    } else if (key == "seed") {
      config.episode.seed = static_cast<unsigned>(as_long(key, value));
    } else if (key == "aux_tools") {
      config.episode.aux_tools = as_bool(key, value);
    } else if (key == "endpoint") {
      config.backend.endpoint = value;
    } else if (key == "model") {
      config.backend.model = value;
    } else if (key == "auth_env") {
      config.backend.auth_env = value;
    } else if (key == "timeout_ms") {
      config.backend.timeout_ms = static_cast<long>(as_long(key, value));
    } else if (key == "max_retries") {
      config.backend.max_retries = static_cast<int>(as_long(key, value));
    } else if (key == "backoff_base_ms") {
      config.backend.backoff_base_ms = static_cast<long>(as_long(key, value));
    } else if (key == "backoff_multiplier") {
      try {
        config.backend.backoff_multiplier = std::stod(value);
      } catch (const std::exception&) {
        throw Error(ErrorCode::InvalidConfig,
                    path + ":" + std::to_string(line_no) + ": '" + key +
                        "' needs a number, got '" + value + "'");
      }
    } else if (key == "baseline_context_budget") {
      config.baseline.context_budget = as_long(key, value);
    } else if (key == "runs") {
      config.runs = static_cast<int>(as_long(key, value));
    } else if (key == "threads") {
      config.threads = static_cast<int>(as_long(key, value));
    } else if (key == "log_dir") {
      config.log_dir = value;
    } else {
      throw Error(ErrorCode::InvalidConfig,
                  path + ":" + std::to_string(line_no) + ": unknown key '" + key + "'");
    }
  }
  return config;
}

}  // namespace scout
