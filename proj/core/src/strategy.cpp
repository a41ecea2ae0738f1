#include "genclass/strategy.hpp"

#include <algorithm>

#include "genclass/errors.hpp"

namespace genclass {

size_t StrategyId::shot_count() const {
  switch (kind) {
    case StrategyKind::NShot: return static_cast<size_t>(n);
    case StrategyKind::Fixed3Shot:
    case StrategyKind::Similar3Shot: return 3;
    case StrategyKind::Definition1Shot: return 1;
    default: return 0;
  }
}

bool StrategyId::uses_sampled_shots() const {
  return kind == StrategyKind::NShot || kind == StrategyKind::Definition1Shot;
}

std::string StrategyId::name() const {
  switch (kind) {
    case StrategyKind::ZeroShot: return "zero_shot";
    case StrategyKind::NShot: return std::to_string(n) + "_shot";
    case StrategyKind::Fixed3Shot: return "fixed_3_shot";
    case StrategyKind::Similar3Shot: return "similar_3_shot";
    case StrategyKind::Definition: return "definition";
    case StrategyKind::Definition1Shot: return "definition_1_shot";
    case StrategyKind::Numerical: return "numerical";
    case StrategyKind::Uncertainty: return "uncertainty";
    case StrategyKind::Ppl: return "ppl";
  }
  return "unknown";
}

StrategyId strategy_from_name(const std::string& name) {
  std::string s = name;
  std::replace(s.begin(), s.end(), '-', '_');

  if (s == "zero_shot") return StrategyId::zero_shot();
  if (s == "fixed_3_shot" || s == "fix_3_shot") return StrategyId::fixed_3_shot();
  if (s == "similar_3_shot") return StrategyId::similar_3_shot();
  if (s == "definition" || s == "category_definition") return StrategyId::definition();
  if (s == "definition_1_shot" || s == "definition_with_1_shot")
    return StrategyId::definition_1_shot();
  if (s == "numerical") return StrategyId::numerical();
  if (s == "uncertainty") return StrategyId::uncertainty();
  if (s == "ppl") return StrategyId::ppl();

  if (s.size() > 5 && s.ends_with("_shot")) {
    std::string head = s.substr(0, s.size() - 5);
    if (head == "1" || head == "3" || head == "5") {
      return StrategyId::n_shot(head[0] - '0');
    }
    throw Error(ErrorKind::Validation, "n_shot count must be 1, 3 or 5: " + name);
  }
  throw Error(ErrorKind::Validation, "unknown strategy: " + name);
}

const char* to_string(ParseMode mode) {
  switch (mode) {
    case ParseMode::CategoryText: return "category_text";
    case ParseMode::CategoryNumeric: return "category_numeric";
    case ParseMode::TaggedReasoning: return "tagged_reasoning";
    case ParseMode::Direct: return "direct";
  }
  return "unknown";
}

}  // namespace genclass
