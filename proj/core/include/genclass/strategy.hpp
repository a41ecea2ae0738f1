#pragma once

#include <cstddef>
#include <string>

namespace genclass {

// The strategy pool. NShot carries its own count; everything else is fixed.
enum class StrategyKind {
  ZeroShot,
  NShot,
  Fixed3Shot,
  Similar3Shot,
  Definition,
  Definition1Shot,
  Numerical,
  Uncertainty,
  Ppl,  // inference-time only
};

enum class ParseMode { CategoryText, CategoryNumeric, TaggedReasoning, Direct };

struct StrategyId {
  StrategyKind kind = StrategyKind::ZeroShot;
  int n = 0;  // shot count for NShot; 1, 3 or 5

  static StrategyId zero_shot() { return {StrategyKind::ZeroShot, 0}; }
  static StrategyId n_shot(int n) { return {StrategyKind::NShot, n}; }
  static StrategyId fixed_3_shot() { return {StrategyKind::Fixed3Shot, 0}; }
  static StrategyId similar_3_shot() { return {StrategyKind::Similar3Shot, 0}; }
  static StrategyId definition() { return {StrategyKind::Definition, 0}; }
  static StrategyId definition_1_shot() { return {StrategyKind::Definition1Shot, 0}; }
  static StrategyId numerical() { return {StrategyKind::Numerical, 0}; }
  static StrategyId uncertainty() { return {StrategyKind::Uncertainty, 0}; }
  static StrategyId ppl() { return {StrategyKind::Ppl, 0}; }

  bool operator==(const StrategyId&) const = default;

  // Shots required in the rendered prompt.
  size_t shot_count() const;
  // Whether shots are drawn per example (n_shot, definition_1_shot) or
  // retrieved (similar_3_shot), as opposed to fixed/none.
  bool uses_sampled_shots() const;
  bool uses_retrieved_shots() const { return kind == StrategyKind::Similar3Shot; }
  bool needs_definitions() const {
    return kind == StrategyKind::Definition || kind == StrategyKind::Definition1Shot;
  }
  bool inference_only() const { return kind == StrategyKind::Ppl; }

  ParseMode parse_mode() const {
    return kind == StrategyKind::Numerical ? ParseMode::CategoryNumeric
                                           : ParseMode::CategoryText;
  }

  std::string name() const;
};

// Parses canonical names ("zero_shot", "3_shot", "fixed_3_shot", ...); '-' is
// accepted wherever '_' appears. Throws Error{Validation} on unknown names and
// on n_shot counts outside {1,3,5}.
StrategyId strategy_from_name(const std::string& name);

const char* to_string(ParseMode mode);

}  // namespace genclass
