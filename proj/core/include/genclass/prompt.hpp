#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "genclass/strategy.hpp"
#include "genclass/templates.hpp"
#include "genclass/types.hpp"

namespace genclass {

enum class ShotSource { None, Random, Fixed, Retrieved };

/// In-context exemplars for one prompt, in render order.
struct ShotContext {
  std::vector<std::pair<Example, std::string>> shots;  // (example, label)
  ShotSource source = ShotSource::None;

  static ShotContext none() { return {}; }
};

// Uncertainty prompts differ between corpus construction (uncertain fallback
// in the format line) and inference (original classes only).
enum class RenderTime { Training, Inference };

// Standard prompts demand "Category: xxx"; the variants close with the
// tagged-output or bare-answer instruction instead and parse accordingly.
enum class PromptVariant { Standard, TaggedReasoning, Direct };

inline constexpr const char* kDirectInstruction = "Please output your answer.";
inline constexpr const char* kReasoningInstruction =
    "Please output your answer in the format: <reason> reasoning process here "
    "</reason> <answer> answer here </answer>.";

struct PromptRecord {
  StrategyId strategy;
  std::string text;
  ParseMode expected_parse_mode = ParseMode::CategoryText;
  std::string target_example_id;
};

/// n distinct examples drawn uniformly without replacement under a seeded
/// generator; exclude_id never appears. Deterministic in (train order, n,
/// seed, exclude_id).
ShotContext sample_shots(const Dataset& train, size_t n, uint64_t seed,
                         const std::optional<std::string>& exclude_id = std::nullopt);

/// The given training examples, in the given order, for every test case.
ShotContext select_fixed_shots(const Dataset& train,
                               const std::vector<std::string>& ids);

std::string render_prompt_text(StrategyId strategy, const LabelSchema& schema,
                               const Example& example, const ShotContext& context,
                               const PromptTemplate& templates,
                               RenderTime time = RenderTime::Inference,
                               PromptVariant variant = PromptVariant::Standard,
                               const std::string* closing_override = nullptr);

PromptRecord render_prompt(StrategyId strategy, const LabelSchema& schema,
                           const Example& example, const ShotContext& context,
                           const PromptTemplate& templates,
                           RenderTime time = RenderTime::Inference,
                           PromptVariant variant = PromptVariant::Standard);

/// Canonical SFT target: "Category: <label>", numeric index for the numerical
/// strategy. Exactly the string the category parser accepts.
std::string render_sft_target(const Example& example, const LabelSchema& schema,
                              StrategyId strategy);
std::string render_sft_target_for_label(const std::string& gold,
                                        const LabelSchema& schema,
                                        StrategyId strategy);

// "[a, b, c]" for text prompts, "a: 0, b: 1, c: 2" for the numerical one.
std::string render_category_list(const LabelSchema& schema, bool numeric);

}  // namespace genclass
