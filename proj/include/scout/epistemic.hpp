#pragma once

#include <string>
#include <vector>

#include "json.hpp"
#include "scout/document_env.hpp"

namespace scout {

// Commit-time grounding policy. In strict mode every committed anchor must
// resolve to a nonempty span of its document; off accepts anchors unchecked
// (the "w/o grounding" ablation).
enum class GroundingMode { strict, off };

// A distilled statement plus the anchor locating its source span.
struct EpistemicUnit {
  std::string content;
  Anchor anchor;
  int committed_at = 0;

  bool equivalent(const EpistemicUnit& other) const {
    return content == other.content && anchor.same_span(other.anchor);
  }
};

struct UnitDraft {
  std::string content;
  Anchor anchor;
};

// The decoupled knowledge state: an ordered, append-committed collection of
// units. A state value is immutable; commit() produces a new value sharing
// nothing mutable with the old one. The state id is a deterministic digest of
// the commit history, so identical histories give identical ids.
class EpistemicState {
 public:
  EpistemicState() = default;

  const std::vector<EpistemicUnit>& units() const { return units_; }
  std::size_t size() const { return units_.size(); }
  bool empty() const { return units_.empty(); }
  const std::string& state_id() const { return state_id_; }

  // JSON array of {index, content, anchor, committed_at}; the persisted form
  // inside trajectory logs.
  nlohmann::json to_json() const;
  static EpistemicState from_json(const nlohmann::json& j);

  friend EpistemicState commit(const EpistemicState& state,
                               const std::vector<UnitDraft>& drafts, int step,
                               GroundingMode mode, const DocumentEnv* env);

 private:
  std::vector<EpistemicUnit> units_;
  std::string state_id_ = "s0000000000000000";
};

// Appends one or more units (exact duplicates are silently dropped). Prior
// units are never rewritten. `step` must be >= the last committed_at. Under
// strict mode each new anchor must resolve against `env` (UngroundedUnit
// otherwise); empty content -> InvalidUnit.
EpistemicState commit(const EpistemicState& state, const std::vector<UnitDraft>& drafts,
                      int step, GroundingMode mode, const DocumentEnv* env);

// Deterministic textual rendering: index, content, serialized anchor per
// unit, in commit order. The empty state renders as a fixed sentinel.
std::string render(const EpistemicState& state);

// True iff read(unit.anchor) succeeds and returns nonempty text.
bool validate_grounding(const EpistemicUnit& unit, const DocumentEnv& env);

}  // namespace scout
