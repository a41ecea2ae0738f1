#include "genclass/rewards.hpp"

#include "genclass/errors.hpp"
#include "genclass/util.hpp"

namespace genclass {

const char* to_string(RewardMode mode) {
  return mode == RewardMode::Reasoning ? "reasoning" : "direct";
}

RewardMode reward_mode_from_name(const std::string& name) {
  if (name == "reasoning") return RewardMode::Reasoning;
  if (name == "direct") return RewardMode::Direct;
  throw Error(ErrorKind::Validation, "unknown reward mode: " + name);
}

namespace {

bool matches(const std::string& candidate, const std::string& gold,
             const MatchConfig& match) {
  std::string a = trim(candidate);
  std::string b = trim(gold);
  if (match.case_fold) return to_lower(a) == to_lower(b);
  return a == b;
}

}  // namespace

int format_reward(const std::string& response, RewardMode mode) {
  if (mode == RewardMode::Direct) return 1;
  return parse_tagged(response) ? 1 : 0;
}

int accuracy_reward(const std::string& response, const std::string& gold,
                    RewardMode mode, const LabelSchema& schema,
                    const MatchConfig& match) {
  if (!schema.has_label(gold)) {
    throw Error(ErrorKind::UnknownLabel, "gold is not a schema label: " + gold);
  }
  if (mode == RewardMode::Reasoning) {
    auto parts = parse_tagged(response);
    if (!parts) return 0;  // parse precedes match
    return matches(parts->answer, gold, match) ? 1 : 0;
  }
  std::string trimmed = trim(response);
  if (match.direct_accept_bare && matches(trimmed, gold, match)) return 1;
  if (match.direct_accept_category_line) {
    std::string canonical = "Category: " + gold;
    if (matches(trimmed, canonical, match)) return 1;
  }
  return 0;
}

RewardBreakdown total_reward(const std::string& response, const std::string& gold,
                             RewardMode mode, const LabelSchema& schema,
                             const MatchConfig& match) {
  RewardBreakdown breakdown;
  breakdown.accuracy_reward = accuracy_reward(response, gold, mode, schema, match);
  if (mode == RewardMode::Reasoning) {
    breakdown.format_reward = format_reward(response, mode);
    breakdown.total = breakdown.format_reward + breakdown.accuracy_reward;
  } else {
    breakdown.format_reward = format_reward(response, mode);
    breakdown.total = breakdown.accuracy_reward;
  }
  return breakdown;
}

}  // namespace genclass
