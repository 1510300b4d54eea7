#include "scout/cost.hpp"

#include "scout/error.hpp"

namespace scout {

const char* to_string(CallKind kind) {
  switch (kind) {
    case CallKind::policy:
      return "policy";
    case CallKind::evaluate:
      return "evaluate";
    case CallKind::answer:
      return "answer";
    case CallKind::baseline:
      return "baseline";
  }
  return "unknown";
}

double episode_cost(const CostLedger& ledger) {
  long long in = 0;
  long long out = 0;
  for (const auto& entry : ledger.entries()) {
    in += entry.usage.input_tokens;
    out += entry.usage.output_tokens;
  }
  return static_cast<double>(in + out) / 1000.0;
}

double token_efficiency(double accuracy_percent, double mean_cost_k) {
  if (mean_cost_k <= 0.0) {
    throw Error(ErrorCode::DivisionByZero,
                "token efficiency undefined for non-positive cost " +
                    std::to_string(mean_cost_k));
  }
  return accuracy_percent / mean_cost_k;
}

}  // namespace scout
