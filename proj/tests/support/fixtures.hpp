#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "scout/controller.hpp"
#include "scout/document_env.hpp"
#include "scout/error.hpp"
#include "scout/policy.hpp"

namespace scout::testing {

// Runs `fn` and reports the ErrorCode it threw, or nullopt if it returned.
template <typename Fn>
std::optional<ErrorCode> thrown_code(Fn&& fn) {
  try {
    std::forward<Fn>(fn)();
    return std::nullopt;
  } catch (const Error& e) {
    return e.code();
  }
}

// Per-process scratch root for files the tests write; created on first use.
std::filesystem::path scratch_dir();

// Writes `content` to scratch_dir()/name (creating parent directories) and
// returns the full path.
std::filesystem::path write_file(const std::string& name, const std::string& content);

// ----------------------------------------------------------------------------
// ContextCam fixture
// ----------------------------------------------------------------------------
// A synthetic stand-in for the long technical paper behind the worked
// multi-hop example: every evidence line the golden trajectory touches sits
// at its expected position, the file size is exact, and no other line
// matches any of the golden search patterns.

inline constexpr long long kContextCamBytes = 100352;  // 98 KiB exactly

std::string contextcam_text();
std::filesystem::path contextcam_path();  // written once per process

Instance contextcam_instance();

// The 19-step golden action sequence (minimal arguments, as a policy would
// emit them; canonicalization fills in the rest).
ActionScript golden_script();

// Raw JSON for the two Evaluate calls, in order: the mid-episode
// insufficient diagnosis and the final sufficient one.
std::vector<std::string> golden_diagnoses();

std::string golden_answer();

// The 7 expected unit anchors, in commit order.
std::vector<std::string> golden_unit_anchors();

// Runs the golden episode in `env` (scripted policy, mocked diagnosis and
// answer) and returns the result.
EpisodeResult run_golden_episode(DocumentEnv& env);

}  // namespace scout::testing
