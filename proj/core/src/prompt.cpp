#include "genclass/prompt.hpp"

#include <algorithm>
#include <numeric>
#include <set>

#include "genclass/errors.hpp"
#include "genclass/rng.hpp"
#include "genclass/util.hpp"

namespace genclass {

namespace {

std::vector<std::pair<std::string, std::string>> slot_values(const Example& ex) {
  std::vector<std::pair<std::string, std::string>> values;
  values.reserve(ex.slots.size());
  for (const auto& [name, text] : ex.slots) values.emplace_back(name, text);
  return values;
}

const std::string& format_instruction_for(StrategyId strategy, RenderTime time,
                                          const PromptTemplate& t) {
  if (strategy.kind == StrategyKind::Numerical) return t.format_instruction_numeric;
  if (strategy.kind == StrategyKind::Uncertainty && time == RenderTime::Training)
    return t.format_instruction_uncertain;
  return t.format_instruction;
}

}  // namespace

ShotContext sample_shots(const Dataset& train, size_t n, uint64_t seed,
                         const std::optional<std::string>& exclude_id) {
  std::vector<size_t> candidates;
  candidates.reserve(train.examples.size());
  for (size_t i = 0; i < train.examples.size(); ++i) {
    if (exclude_id && train.examples[i].id == *exclude_id) continue;
    candidates.push_back(i);
  }
  if (n > candidates.size()) {
    throw Error(ErrorKind::InsufficientExamples,
                "requested " + std::to_string(n) + " shots from " +
                    std::to_string(candidates.size()) + " available examples");
  }

  SplitMix64 rng(seed);
  // Partial Fisher-Yates: the first n slots end up uniform without replacement.
  for (size_t i = 0; i < n; ++i) {
    size_t j = i + static_cast<size_t>(rng.bounded(candidates.size() - i));
    std::swap(candidates[i], candidates[j]);
  }

  ShotContext context;
  context.source = ShotSource::Random;
  context.shots.reserve(n);
  for (size_t i = 0; i < n; ++i) {
    const Example& ex = train.examples[candidates[i]];
    context.shots.emplace_back(ex, ex.gold);
  }
  return context;
}

ShotContext select_fixed_shots(const Dataset& train,
                               const std::vector<std::string>& ids) {
  std::set<std::string> seen;
  for (const auto& id : ids) {
    if (!seen.insert(id).second) {
      throw Error(ErrorKind::DuplicateId, "duplicate fixed-shot id: " + id);
    }
  }
  ShotContext context;
  context.source = ShotSource::Fixed;
  context.shots.reserve(ids.size());
  for (const auto& id : ids) {
    const Example* ex = train.find(id);
    if (!ex) throw Error(ErrorKind::UnknownId, "fixed-shot id not in train set: " + id);
    context.shots.emplace_back(*ex, ex->gold);
  }
  return context;
}

std::string render_category_list(const LabelSchema& schema, bool numeric) {
  std::string out;
  if (!numeric) out += "[";
  for (size_t i = 0; i < schema.labels.size(); ++i) {
    if (i > 0) out += ", ";
    out += schema.labels[i];
    if (numeric) out += ": " + std::to_string(i);
  }
  if (!numeric) out += "]";
  return out;
}

std::string render_prompt_text(StrategyId strategy, const LabelSchema& schema,
                               const Example& example, const ShotContext& context,
                               const PromptTemplate& templates, RenderTime time,
                               PromptVariant variant,
                               const std::string* closing_override) {
  if (context.shots.size() != strategy.shot_count()) {
    throw Error(ErrorKind::ShotCountMismatch,
                strategy.name() + " needs " + std::to_string(strategy.shot_count()) +
                    " shots, got " + std::to_string(context.shots.size()));
  }
  if (strategy.needs_definitions()) {
    if (!schema.has_definitions()) {
      throw Error(ErrorKind::MissingDefinitions,
                  strategy.name() + " requires a definition for every label");
    }
    if (templates.definition_block.empty()) {
      throw Error(ErrorKind::MissingDefinitions,
                  "template set has no definition_block");
    }
  }

  std::vector<std::string> sections;
  sections.push_back(templates.task_header);

  bool numeric = strategy.kind == StrategyKind::Numerical;
  sections.push_back(render_placeholders(
      templates.categories_line,
      {{"categories", render_category_list(schema, numeric)}}));

  if (variant == PromptVariant::Standard) {
    sections.push_back(format_instruction_for(strategy, time, templates));
  }

  if (strategy.needs_definitions()) {
    std::string block = templates.definitions_header;
    for (const auto& label : schema.labels) {
      if (!block.empty()) block += "\n";
      block += render_placeholders(templates.definition_block,
                                   {{"label", label},
                                    {"definition", schema.definitions.at(label)}});
    }
    sections.push_back(std::move(block));
  }

  for (size_t i = 0; i < context.shots.size(); ++i) {
    const auto& [shot, label] = context.shots[i];
    auto values = slot_values(shot);
    values.emplace_back("index", std::to_string(i + 1));
    values.emplace_back("label", label);
    sections.push_back(render_placeholders(templates.example_block, values));
  }

  sections.push_back(
      render_placeholders(templates.current_case_block, slot_values(example)));

  if (closing_override) {
    sections.push_back(*closing_override);
  } else {
    switch (variant) {
      case PromptVariant::Standard:
        sections.push_back(templates.request_line);
        break;
      case PromptVariant::TaggedReasoning:
        sections.push_back(kReasoningInstruction);
        break;
      case PromptVariant::Direct:
        sections.push_back(kDirectInstruction);
        break;
    }
  }

  std::string text;
  for (size_t i = 0; i < sections.size(); ++i) {
    if (i > 0) text += "\n\n";
    text += sections[i];
  }
  return text;
}

PromptRecord render_prompt(StrategyId strategy, const LabelSchema& schema,
                           const Example& example, const ShotContext& context,
                           const PromptTemplate& templates, RenderTime time,
                           PromptVariant variant) {
  PromptRecord record;
  record.strategy = strategy;
  record.text =
      render_prompt_text(strategy, schema, example, context, templates, time, variant);
  switch (variant) {
    case PromptVariant::Standard:
      record.expected_parse_mode = strategy.parse_mode();
      break;
    case PromptVariant::TaggedReasoning:
      record.expected_parse_mode = ParseMode::TaggedReasoning;
      break;
    case PromptVariant::Direct:
      record.expected_parse_mode = ParseMode::Direct;
      break;
  }
  record.target_example_id = example.id;
  return record;
}

std::string render_sft_target_for_label(const std::string& gold,
                                        const LabelSchema& schema,
                                        StrategyId strategy) {
  if (strategy.kind == StrategyKind::Numerical) {
    auto index = schema.index_of(gold);
    if (!index) throw Error(ErrorKind::UnknownLabel, "not a schema label: " + gold);
    return "Category: " + std::to_string(*index);
  }
  bool known = schema.has_label(gold) ||
               (strategy.kind == StrategyKind::Uncertainty && schema.uncertain_label &&
                gold == *schema.uncertain_label);
  if (!known) throw Error(ErrorKind::UnknownLabel, "not a schema label: " + gold);
  return "Category: " + gold;
}

std::string render_sft_target(const Example& example, const LabelSchema& schema,
                              StrategyId strategy) {
  return render_sft_target_for_label(example.gold, schema, strategy);
}

}  // namespace genclass
