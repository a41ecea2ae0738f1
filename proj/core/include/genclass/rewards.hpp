#pragma once

#include <string>

#include "genclass/inference.hpp"
#include "genclass/types.hpp"

namespace genclass {

enum class RewardMode { Reasoning, Direct };

const char* to_string(RewardMode mode);
RewardMode reward_mode_from_name(const std::string& name);

struct RewardBreakdown {
  int format_reward = 0;
  int accuracy_reward = 0;
  int total = 0;

  bool operator==(const RewardBreakdown&) const = default;
};

/// Reasoning mode: 1 iff the response parses under the canonical tag layout.
/// Direct mode has no format constraint and always scores 1.
int format_reward(const std::string& response, RewardMode mode);

/// Reasoning mode: 1 iff the tagged answer matches gold; an unparseable
/// response scores 0 even when gold appears verbatim inside. Direct mode:
/// 1 iff the whole trimmed response is gold (or its "Category: gold" line,
/// per the match config).
int accuracy_reward(const std::string& response, const std::string& gold,
                    RewardMode mode, const LabelSchema& schema,
                    const MatchConfig& match = {});

/// format + accuracy in reasoning mode (totals 0..2); accuracy alone in
/// direct mode (totals 0..1).
RewardBreakdown total_reward(const std::string& response, const std::string& gold,
                             RewardMode mode, const LabelSchema& schema,
                             const MatchConfig& match = {});

}  // namespace genclass
