#include "scout/error.hpp"

namespace scout {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NotFound: return "NotFound";
    case ErrorCode::InvalidDocument: return "InvalidDocument";
    case ErrorCode::InvalidPattern: return "InvalidPattern";
    case ErrorCode::AnchorOutOfRange: return "AnchorOutOfRange";
    case ErrorCode::UnknownTokenizer: return "UnknownTokenizer";
    case ErrorCode::UngroundedUnit: return "UngroundedUnit";
    case ErrorCode::InvalidUnit: return "InvalidUnit";
    case ErrorCode::UnknownTool: return "UnknownTool";
    case ErrorCode::MissingArgument: return "MissingArgument";
    case ErrorCode::BackendError: return "BackendError";
    case ErrorCode::SchemaViolation: return "SchemaViolation";
    case ErrorCode::UnparsableAction: return "UnparsableAction";
    case ErrorCode::ScriptExhausted: return "ScriptExhausted";
    case ErrorCode::TransportError: return "TransportError";
    case ErrorCode::AuthError: return "AuthError";
    case ErrorCode::ProtocolError: return "ProtocolError";
    case ErrorCode::EpisodeFailure: return "EpisodeFailure";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::Unscorable: return "Unscorable";
    case ErrorCode::DivisionByZero: return "DivisionByZero";
    case ErrorCode::IoError: return "IoError";
  }
  return "UnknownError";
}

bool is_tool_error(ErrorCode code) {
  switch (code) {
    case ErrorCode::NotFound:
    case ErrorCode::InvalidDocument:
    case ErrorCode::InvalidPattern:
    case ErrorCode::AnchorOutOfRange:
    case ErrorCode::UnknownTokenizer:
    case ErrorCode::UngroundedUnit:
    case ErrorCode::InvalidUnit:
    case ErrorCode::UnknownTool:
    case ErrorCode::MissingArgument:
      return true;
    default:
      return false;
  }
}

}  // namespace scout
