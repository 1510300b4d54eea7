#pragma once

#include <stdexcept>
#include <string>

namespace scout {

// Every failure mode the runtime can report. Tool-level codes (the first
// group) are recoverable inside an episode: the controller turns them into
// error observations so the policy can react. Backend/plumbing codes (the
// second group) abort the episode.
enum class ErrorCode {
  // Tool-level (recoverable as error observations)
  NotFound,
  InvalidDocument,
  InvalidPattern,
  AnchorOutOfRange,
  UnknownTokenizer,
  UngroundedUnit,
  InvalidUnit,
  UnknownTool,
  MissingArgument,

  // Backend / plumbing (abort the episode)
  BackendError,
  SchemaViolation,
  UnparsableAction,
  ScriptExhausted,
  TransportError,
  AuthError,
  ProtocolError,
  EpisodeFailure,

  // Config / harness
  InvalidConfig,
  Unscorable,
  DivisionByZero,
  IoError,
};

const char* to_string(ErrorCode code);

// True for codes the episode loop converts into error observations instead of
// aborting (bad patterns, unknown docs, ungrounded commits, ...).
bool is_tool_error(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace scout
