#include "support/fixtures.hpp"

#include <unistd.h>

#include <cstdio>
#include <fstream>
#include <map>
#include <mutex>
#include <stdexcept>

#include "json.hpp"
#include "scout/gateway.hpp"

namespace scout::testing {
namespace {

using nlohmann::json;

// Short, bibliography-flavored filler that stays clear of every pattern the
// golden trajectory greps for. Deterministic in the line number.
std::string filler_line(long n) {
  char buf[48];
  switch (n % 10) {
    case 0: std::snprintf(buf, sizeof buf, "ref [%ld]", n % 977); break;
    case 1: std::snprintf(buf, sizeof buf, "p. %ld", n % 613 + 1); break;
    case 2: std::snprintf(buf, sizeof buf, "fig. %ld", n % 89 + 1); break;
    case 3: std::snprintf(buf, sizeof buf, "sec. %ld.%ld", n % 9 + 1, n % 7 + 1); break;
    case 4: std::snprintf(buf, sizeof buf, "P%02ld notes", n % 97); break;
    case 5: return "(omitted)";
    case 6: std::snprintf(buf, sizeof buf, "rev %ld", n % 41 + 1); break;
    case 7: std::snprintf(buf, sizeof buf, "entry %ld", n % 839); break;
    case 8: return "CHI '24";
    case 9: std::snprintf(buf, sizeof buf, "data %ld", n % 509); break;
  }
  return buf;
}

// Every line the golden trajectory reads, greps, or anchors to, at its
// expected 1-based position.
const std::map<long, std::string>& pinned_lines() {
  static const std::map<long, std::string> kPinned = {
      {1, "ContextCam: Context-Aware Photography Assistance"},
      {2, "A Technical Report"},

      {430, "2.2 Supported Context Types"},
      {437,
       "ContextCam supports five types of contextual information: location, facial "
       "expression, music, screen content, and weather."},
      {438, "We focus on these types of contextual information throughout the paper."},
      {512,
       "The collected contextual information includes detector confidence scores and "
       "timestamps."},

      {1206, "3. System Design"},
      {1212, "3.1 System Overview"},
      {1216, "The architecture separates sensing from context aggregation."},
      {1217, "Each detector runs as an isolated module with a declared input contract."},
      {1219,
       "The sensor layer feeds the detectors, and the detectors feed the context "
       "selector."},
      {1222, "Modules exchange typed records over a shared bus."},
      {1226, "Detector outputs are aggregated by the pipeline before selection."},
      {1230, "The Weather detector sits at the end of this pipeline and takes location "
             "input."},
      {1234,
       "The Weather detector takes as input the Location detector's output, either "
       "lat/lon or a coarse city."},
      {1238,
       "If Location is unavailable, the Weather field is marked N/A and omitted from "
       "the context bundle."},

      {1806, "4.3 Detector Implementation"},
      {1810, "Table 4: Context detectors used in the implemented system."},
      {1813, "Location: GPS positioning with network-assisted refinement when available."},
      {1817, "Sampling occurs once per minute while the companion app is active."},
      {1821,
       "Screen Content: Capturing the text displayed on the user's current screen via "
       "accessibility APIs."},
      {1825,
       "Facial Expression: Periodically capturing the user's frontal face and "
       "classifying the expression."},
      {1829, "Expression classes follow the standard seven-category taxonomy."},
      {1833,
       "Weather: Retrieving real-time weather data for the user's location from a "
       "public API."},
      {1837,
       "Music: If music is detected in the environment, returning its song title and "
       "artist."},
      {1842, "All detectors listed in Table 4 feed their outputs downstream for "
             "selection."},

      {5510, "6.1 Privacy Controls"},
      {5519,
       "Users can disable OS-level Location permission for the companion application "
       "at any time."},
      {5527, "When the Location permission is disabled, the Location detector is not "
             "executed."},
      {5536,
       "Detectors that require Location output are automatically disabled by this "
       "dependency-based gating."},
      {5560, "Permission changes take effect at the next sampling cycle."},
      {5576,
       "By design, the system will not indirectly infer location from screen contents "
       "or application usage."},
      {5582, "This privacy guarantee holds for all dependency-based detectors."},

      {6346, "7.2 Implementation Notes and Limitations"},
      {6350,
       "The current prototype retrieves weather strictly through the location-derived "
       "coordinates."},
      {6352,
       "The prototype does not fall back to network-address-based geolocation when "
       "GPS access is unavailable."},
      {6356, "There is no way of typing a city by hand in the current build."},
      {6360, "No preconfigured fallback city is used for weather retrieval."},
      {6364,
       "If access to location has been denied, location-dependent detectors are "
       "skipped at runtime."},
      {6368,
       "These constraints bound what the system can extract when sensors or "
       "permissions are unavailable."},
  };
  return kPinned;
}

constexpr long kBodyLines = 6500;
constexpr const char* kDocName = "context_file.txt";

json unit(const std::string& content, const std::string& anchor) {
  return json{{"content", content}, {"anchor", anchor}};
}

}  // namespace

std::filesystem::path scratch_dir() {
  static const std::filesystem::path kDir = [] {
    auto dir = std::filesystem::temp_directory_path() /
               ("scout_tests_" + std::to_string(::getpid()));
    std::filesystem::create_directories(dir);
    return dir;
  }();
  return kDir;
}

std::filesystem::path write_file(const std::string& name, const std::string& content) {
  auto path = scratch_dir() / name;
  std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << content;
  if (!out.flush()) throw std::runtime_error("fixture write failed: " + path.string());
  return path;
}

std::string contextcam_text() {
  std::string out;
  out.reserve(static_cast<std::size_t>(kContextCamBytes));
  const auto& pinned = pinned_lines();
  for (long i = 1; i <= kBodyLines; ++i) {
    auto it = pinned.find(i);
    out += (it != pinned.end()) ? it->second : filler_line(i);
    out += '\n';
  }
  // Pad with fixed-width appendix rows to the exact advertised size.
  const std::string pad_row = "appendix data " + std::string(49, '.');
  long long remaining = kContextCamBytes - static_cast<long long>(out.size());
  if (remaining < 0) throw std::logic_error("contextcam fixture overflows its size budget");
  while (remaining > static_cast<long long>(pad_row.size())) {
    out += pad_row;
    out += '\n';
    remaining -= static_cast<long long>(pad_row.size()) + 1;
  }
  if (remaining > 0) {
    out += std::string(static_cast<std::size_t>(remaining) - 1, '.');
    out += '\n';
  }
  return out;
}

std::filesystem::path contextcam_path() {
  static std::once_flag flag;
  static std::filesystem::path path;
  std::call_once(flag, [] { path = write_file(kDocName, contextcam_text()); });
  return path;
}

Instance contextcam_instance() {
  Instance inst;
  inst.id = "contextcam_q1";
  inst.query =
      "If a user has disabled the OS-level Location permission for the companion "
      "application, which types of contextual information can the system still "
      "extract, at most?";
  inst.doc_path = contextcam_path().string();
  inst.choices = {
      "(A) facial expression, location, music, screen content, weather",
      "(B) facial expression, music, screen content, weather",
      "(C) facial expression, music, screen content",
      "(D) facial expression, screen content",
  };
  inst.gold = "(C) facial expression, music, screen content";
  return inst;
}

ActionScript golden_script() {
  const std::string doc = kDocName;
  ActionScript script;
  auto add = [&script](ActionKind kind, json args) {
    script.push_back(Action{kind, std::move(args)});
  };

  // t=1: size up the document before anything else.
  add(ActionKind::GetFileInfo, json{{"source", doc}});
  // t=2: lay out the investigation plan.
  add(ActionKind::TodoWrite,
      json{{"todos",
            json::array({"Find the full list of supported context types",
                         "Find how each context detector works",
                         "Find what happens when Location permission is disabled",
                         "Check whether Weather depends on Location",
                         "Check for fallbacks or indirect location inference"})}});
  // t=3: locate the supported-context-types list.
  add(ActionKind::Grep,
      json{{"pattern", "five types of contextual information|contextual information"},
           {"case_insensitive", true}});
  // t=4: locate the detector descriptions.
  add(ActionKind::Grep, json{{"pattern", "Table 4|Context detectors used|Weather:|Location:"},
                             {"case_insensitive", true}});
  // t=5: commit the two base facts in one batch.
  add(ActionKind::Update,
      json{{"units",
            json::array(
                {unit("ContextCam supports five context types: location, facial "
                      "expression, music, screen content, and weather.",
                      doc + ":437-438"),
                 unit("Detector descriptions (Table 4): Location uses GPS positioning; "
                      "Weather retrieves data for the user's location; Screen Content, "
                      "Facial Expression, and Music read the screen, camera, and "
                      "microphone.",
                      doc + ":1810-1842")})}});
  // t=6: first sufficiency check (expected: insufficient).
  add(ActionKind::Evaluate, json::object());
  // t=7: chase the permission-off policy.
  add(ActionKind::Grep,
      json{{"pattern",
            "disable OS-level|Location permission|indirectly infer location|"
            "dependency-based"},
           {"case_insensitive", true}});
  // t=8: commit the policy.
  add(ActionKind::Update,
      json{{"units",
            json::array({unit(
                "When Location permission is disabled, the Location detector is not "
                "executed, detectors requiring Location output are automatically "
                "disabled, and the system will not indirectly infer location.",
                doc + ":5519-5576")})}});
  // t=9: look for an explicit Weather-on-Location statement (misses).
  add(ActionKind::Grep,
      json{{"pattern", "Weather takes as input the Location detector|Weather is marked N/A"},
           {"case_insensitive", true}});
  // t=10: fall back to the architecture overview.
  add(ActionKind::Grep,
      json{{"pattern", "System overview|pipeline|Sensor Layer|Context Selector"},
           {"case_insensitive", true}});
  // t=11: read the overview section around the hits.
  add(ActionKind::Read, json{{"offset", 1216}, {"limit", 75}});
  // t=12: commit the dependency proof.
  add(ActionKind::Update,
      json{{"units",
            json::array({unit(
                "The Weather detector takes as input the Location detector's output; "
                "if Location is unavailable, the Weather field is marked N/A and "
                "omitted.",
                doc + ":1216-1238")})}});
  // t=13: check for location fallbacks (misses).
  add(ActionKind::Grep,
      json{{"pattern", "IP-based geolocation|manual city entry|default city"},
           {"case_insensitive", true}});
  // t=14: read the implementation-limits section instead.
  add(ActionKind::Read, json{{"offset", 6346}, {"limit", 55}});
  // t=15: commit the no-fallback evidence.
  add(ActionKind::Update,
      json{{"units",
            json::array({unit(
                "The prototype retrieves weather only through location-derived "
                "coordinates, with no network-address fallback, no manual city entry, "
                "and no preconfigured fallback city; location-dependent detectors are "
                "skipped when access is denied.",
                doc + ":6350-6368")})}});
  // t=16: confirm the remaining detectors are location-independent.
  add(ActionKind::Grep,
      json{{"pattern", "Screen Content: Capturing|Facial Expression:|Music: If music"},
           {"case_insensitive", true}});
  // t=17: commit the independence evidence.
  add(ActionKind::Update,
      json{{"units",
            json::array({unit(
                "Screen Content, Facial Expression, and Music operate on the screen, "
                "camera, and microphone and do not take Location output as input.",
                doc + ":1821-1837")})}});
  // t=18: commit the synthesis.
  add(ActionKind::Update,
      json{{"units",
            json::array({unit(
                "With Location permission disabled, Location and every detector that "
                "depends on it (including Weather) are unavailable, there is no "
                "fallback or indirect inference, so at most Screen Content, Facial "
                "Expression, and Music remain extractable.",
                doc + ":6350-6368")})}});
  // t=19: final sufficiency check (expected: sufficient).
  add(ActionKind::Evaluate, json::object());

  return script;
}

std::vector<std::string> golden_diagnoses() {
  json insufficient = {
      {"is_sufficient", false},
      {"missing_info",
       json::array(
           {"Explicit policy: what the system does when Location permission is off.",
            "Explicit dependency: does Weather consume Location output or can it run "
            "independently?",
            "At-most check: any fallback (network-based or manual city) or indirect "
            "inference that could still provide Weather or Location."})},
      {"reasoning",
       "The supported context types and detector descriptions are committed, but the "
       "permission-off behavior, the Weather-Location dependency, and possible "
       "fallback paths are all unverified."},
      {"confidence", 0.4},
  };
  json sufficient = {
      {"is_sufficient", true},
      {"missing_info", json::array()},
      {"reasoning",
       "The policy disables Location and cascades to Weather; the privacy guarantee "
       "forbids indirect inference; no fallback exists; the remaining independent "
       "contexts are Screen Content, Facial Expression, and Music."},
      {"confidence", 0.96},
  };
  return {insufficient.dump(), sufficient.dump()};
}

std::string golden_answer() { return "(C) facial expression, music, and screen content"; }

std::vector<std::string> golden_unit_anchors() {
  const std::string doc = kDocName;
  return {
      doc + ":437-438",   doc + ":1810-1842", doc + ":5519-5576", doc + ":1216-1238",
      doc + ":6350-6368", doc + ":1821-1837", doc + ":6350-6368",
  };
}

EpisodeResult run_golden_episode(DocumentEnv& env) {
  Instance inst = contextcam_instance();
  ScriptBackend policy(golden_script());
  MockBackend diagnosis;
  for (const auto& d : golden_diagnoses()) diagnosis.push_text(d);
  MockBackend answer;
  answer.push_text(golden_answer());
  EpisodeConfig config;
  Backends backends{&policy, &diagnosis, &answer};
  return run_episode(env, inst, config, backends);
}

}  // namespace scout::testing
