#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "scout/gateway.hpp"

namespace scout {

enum class CallKind { policy, evaluate, answer, baseline };

const char* to_string(CallKind kind);

struct LedgerEntry {
  CallKind kind;
  Usage usage;
};

// Append-only record of every backend call made during one episode (one
// entry per call, failed calls included with their input side). An episode
// is single-threaded, so the ledger needs no locking; episodes never share
// a ledger.
class CostLedger {
 public:
  void add(CallKind kind, Usage usage) { entries_.push_back({kind, usage}); }
  const std::vector<LedgerEntry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }

 private:
  std::vector<LedgerEntry> entries_;
};

// (sum of input tokens + sum of output tokens) / 1000, over all entries.
double episode_cost(const CostLedger& ledger);

// accuracy_percent / mean_cost_k. Zero or negative cost -> DivisionByZero.
double token_efficiency(double accuracy_percent, double mean_cost_k);

// Keeps the first floor(max_len/2) and last floor(max_len/2) elements of an
// over-long sequence; sequences within the cap pass through unchanged. Note
// an odd cap yields one element fewer than the cap.
template <typename T>
std::vector<T> middle_truncate(const std::vector<T>& tokens, std::size_t max_len) {
  if (tokens.size() <= max_len) return tokens;
  std::size_t half = max_len / 2;
  std::vector<T> out;
  out.reserve(2 * half);
  out.insert(out.end(), tokens.begin(), tokens.begin() + half);
  out.insert(out.end(), tokens.end() - half, tokens.end());
  return out;
}

}  // namespace scout
