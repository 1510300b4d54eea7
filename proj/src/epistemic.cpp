#include "scout/epistemic.hpp"

#include <algorithm>

#include "scout/error.hpp"

namespace scout {

namespace {

constexpr const char* kEmptyStateSentinel = "Epistemic State: empty (no units committed)";

std::uint64_t fnv1a(const std::string& data, std::uint64_t hash) {
  for (unsigned char c : data) {
    hash ^= c;
    hash *= 1099511628211ULL;
  }
  return hash;
}

std::string hex16(std::uint64_t value) {
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[i] = digits[value & 0xf];
    value >>= 4;
  }
  return out;
}

// The state id is a digest of the unit sequence: equal states get equal ids.
std::string compute_state_id(const std::vector<EpistemicUnit>& units) {
  if (units.empty()) return "s0000000000000000";
  std::uint64_t hash = 14695981039346656037ULL;
  for (const auto& unit : units) {
    hash = fnv1a(unit.content, hash);
    hash = fnv1a(unit.anchor.to_string(), hash);
  }
  return "s" + hex16(hash);
}

std::string trimmed(const std::string& s) {
  auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

}  // namespace

EpistemicState commit(const EpistemicState& state, const std::vector<UnitDraft>& drafts,
                      int step, GroundingMode mode, const DocumentEnv* env) {
  if (step < 0) {
    throw Error(ErrorCode::InvalidUnit, "commit step must be >= 0");
  }
  if (!state.units_.empty() && step < state.units_.back().committed_at) {
    throw Error(ErrorCode::InvalidUnit, "commit step precedes the last committed step");
  }

  EpistemicState next = state;
  bool added = false;

  for (const auto& draft : drafts) {
    if (trimmed(draft.content).empty()) {
      throw Error(ErrorCode::InvalidUnit, "unit content is empty");
    }
    EpistemicUnit unit{draft.content, draft.anchor, step};

    if (mode == GroundingMode::strict) {
      if (env == nullptr) {
        throw Error(ErrorCode::UngroundedUnit, "strict grounding requires an environment");
      }
      if (!validate_grounding(unit, *env)) {
        throw Error(ErrorCode::UngroundedUnit,
                    "anchor " + unit.anchor.to_string() + " does not resolve");
      }
    }

    bool duplicate = std::any_of(next.units_.begin(), next.units_.end(),
                                 [&](const EpistemicUnit& u) { return u.equivalent(unit); });
    if (duplicate) continue;

    next.units_.push_back(std::move(unit));
    added = true;
  }

  if (added) next.state_id_ = compute_state_id(next.units_);
  return next;
}

std::string render(const EpistemicState& state) {
  if (state.empty()) return kEmptyStateSentinel;
  std::string out = "Epistemic State (" + std::to_string(state.size()) + " unit" +
                    (state.size() == 1 ? "" : "s") + "):";
  for (std::size_t i = 0; i < state.units().size(); ++i) {
    const auto& unit = state.units()[i];
    out += "\n[" + std::to_string(i + 1) + "] " + unit.content + " (" +
           unit.anchor.to_string() + ")";
  }
  return out;
}

bool validate_grounding(const EpistemicUnit& unit, const DocumentEnv& env) {
  try {
    return !env.read(unit.anchor).text.empty();
  } catch (const Error&) {
    return false;
  }
}

nlohmann::json EpistemicState::to_json() const {
  nlohmann::json arr = nlohmann::json::array();
  for (std::size_t i = 0; i < units_.size(); ++i) {
    arr.push_back({{"index", i},
                   {"content", units_[i].content},
                   {"anchor", units_[i].anchor.to_string()},
                   {"committed_at", units_[i].committed_at}});
  }
  return arr;
}

EpistemicState EpistemicState::from_json(const nlohmann::json& j) {
  EpistemicState state;
  for (const auto& item : j) {
    EpistemicUnit unit;
    unit.content = item.at("content").get<std::string>();
    unit.anchor = Anchor::parse(item.at("anchor").get<std::string>());
    unit.committed_at = item.at("committed_at").get<int>();
    state.units_.push_back(std::move(unit));
  }
  state.state_id_ = compute_state_id(state.units_);
  return state;
}

}  // namespace scout
