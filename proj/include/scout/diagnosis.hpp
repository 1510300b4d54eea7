#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "scout/epistemic.hpp"
#include "scout/gateway.hpp"

namespace scout {

// Structured sufficiency verdict:
//   is_sufficient true  -> missing_info must be empty
//   is_sufficient false -> missing_info must be nonempty
//   confidence in [0,1] (advisory; termination keys on is_sufficient only)
struct GapDiagnosis {
  bool is_sufficient = false;
  std::vector<std::string> missing_info;
  std::string reasoning;
  double confidence = 0.0;

  nlohmann::json to_json() const;
};

// Strict parse of the fixed schema {is_sufficient, missing_info, reasoning,
// confidence}. All four fields are required; unknown fields are ignored;
// invariant breaches (sufficient with gaps listed, confidence outside [0,1])
// are rejected. The JSON object may be embedded in surrounding prose.
// Throws Error(SchemaViolation) carrying the raw text.
GapDiagnosis parse_diagnosis(const std::string& raw);

// Loop-guard helper: true iff a diagnosis exists and is sufficient. The
// "never evaluated" initial marker (nullopt) is non-terminal.
bool is_terminal(const std::optional<GapDiagnosis>& g);

struct DiagnosisOptions {
  int parse_retries = 2;  // re-asks with an error-explaining prompt
};

// The prompt is assembled from exactly (query, render(state)) — trace content
// never reaches the diagnosis call.
std::string assemble_diagnosis_prompt(const std::string& query, const EpistemicState& state);

// Invokes the backend with the constrained prompt and parses the schema,
// re-asking up to the retry budget on unparsable output. Records one usage
// entry per attempt through `usage_out` (summed) when given.
GapDiagnosis diagnose(const std::string& query, const EpistemicState& state,
                      Backend& backend, const DiagnosisOptions& options = {},
                      std::vector<Usage>* usage_out = nullptr);

}  // namespace scout
