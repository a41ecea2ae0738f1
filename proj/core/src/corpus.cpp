#include "genclass/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "genclass/errors.hpp"
#include "genclass/rng.hpp"
#include "genclass/util.hpp"

namespace genclass {

const char* to_string(ReasonOrder order) {
  switch (order) {
    case ReasonOrder::ClassThenReason: return "class_then_reason";
    case ReasonOrder::ReasonThenClass: return "reason_then_class";
    case ReasonOrder::ThinkReasonClass: return "think_reason_class";
  }
  return "unknown";
}

ReasonOrder reason_order_from_name(const std::string& name) {
  if (name == "class_then_reason") return ReasonOrder::ClassThenReason;
  if (name == "reason_then_class") return ReasonOrder::ReasonThenClass;
  if (name == "think_reason_class") return ReasonOrder::ThinkReasonClass;
  throw Error(ErrorKind::Validation, "unknown reasoning order: " + name);
}

std::vector<TrainingRecord> build_sft_corpus(const Dataset& train,
                                             const LabelSchema& schema,
                                             StrategyId strategy, uint64_t seed,
                                             const PromptTemplate& templates,
                                             const CorpusOptions& options) {
  if (strategy.inference_only()) {
    throw Error(ErrorKind::Validation,
                "ppl is an inference-time strategy; no corpus to build");
  }
  if (strategy.uses_retrieved_shots() && options.embeddings == nullptr) {
    throw Error(ErrorKind::Config, "similar_3_shot needs an embedding store");
  }

  // Fixed shots are chosen once and shared by every record.
  ShotContext fixed_context;
  if (strategy.kind == StrategyKind::Fixed3Shot) {
    if (!options.fixed_shot_ids.empty()) {
      if (options.fixed_shot_ids.size() != 3) {
        throw Error(ErrorKind::Config, "fixed_3_shot needs exactly 3 ids");
      }
      fixed_context = select_fixed_shots(train, options.fixed_shot_ids);
    } else {
      fixed_context = sample_shots(train, 3, mix_seed(seed, fnv1a("fixed_shots")));
      fixed_context.source = ShotSource::Fixed;
    }
  }

  std::vector<TrainingRecord> records;
  records.reserve(train.examples.size());
  for (size_t i = 0; i < train.examples.size(); ++i) {
    const Example& example = train.examples[i];

    ShotContext context;
    if (strategy.kind == StrategyKind::Fixed3Shot) {
      context = fixed_context;
    } else if (strategy.uses_sampled_shots()) {
      context = sample_shots(train, strategy.shot_count(), mix_seed(seed, i),
                             example.id);
    } else if (strategy.uses_retrieved_shots()) {
      const auto* query = options.embeddings->vector_of(example.id);
      if (!query) {
        throw Error(ErrorKind::UnknownId,
                    "no embedding for training example: " + example.id);
      }
      auto ranked = top_k(*options.embeddings, *query, 3, example.id);
      context.source = ShotSource::Retrieved;
      for (const auto& [id, score] : ranked) {
        const Example* shot = train.find(id);
        if (!shot) {
          throw Error(ErrorKind::UnknownId, "embedding id not in train set: " + id);
        }
        context.shots.emplace_back(*shot, shot->gold);
      }
    }

    TrainingRecord record;
    record.example_id = example.id;
    record.strategy = strategy.name();
    record.prompt = render_prompt_text(strategy, schema, example, context,
                                       templates, RenderTime::Training);
    record.target = render_sft_target(example, schema, strategy);
    if (options.token_counter) {
      record.token_length =
          options.token_counter(record.prompt) + options.token_counter(record.target);
    }
    records.push_back(std::move(record));
  }
  return records;
}

std::pair<Dataset, RelabelReport> relabel_uncertain(
    const Dataset& train, const LabelSchema& schema,
    const std::map<std::string, Prediction>& preds_m1,
    const std::map<std::string, Prediction>& preds_m2, double cap_fraction) {
  if (!schema.uncertain_label) {
    throw Error(ErrorKind::MissingUncertainLabel,
                "schema reserves no uncertain label");
  }
  if (!train.examples.empty() && (preds_m1.empty() || preds_m2.empty())) {
    throw Error(ErrorKind::MissingPrediction, "both prediction sets are required");
  }

  struct Qualified {
    std::string id;
    const Prediction* m1;
    const Prediction* m2;
  };
  std::vector<Qualified> qualified;

  auto wrong = [](const Prediction& p, const std::string& gold) {
    // A format failure is not a gold prediction either.
    return !p.format_ok || !p.parsed_label || *p.parsed_label != gold;
  };

  for (const auto& example : train.examples) {
    auto it1 = preds_m1.find(example.id);
    auto it2 = preds_m2.find(example.id);
    if (it1 == preds_m1.end() || it2 == preds_m2.end()) {
      throw Error(ErrorKind::MissingPrediction,
                  "no prediction pair for example: " + example.id);
    }
    if (wrong(it1->second, example.gold) && wrong(it2->second, example.gold)) {
      qualified.push_back({example.id, &it1->second, &it2->second});
    }
  }

  size_t cap = static_cast<size_t>(
      std::floor(cap_fraction * static_cast<double>(train.examples.size())));

  std::vector<std::string> relabeled_ids;
  if (qualified.size() <= cap) {
    for (const auto& q : qualified) relabeled_ids.push_back(q.id);
  } else {
    // Over the cap: keep the lowest mean-confidence examples.
    struct Ranked {
      std::string id;
      double mean_confidence;
    };
    std::vector<Ranked> ranked;
    ranked.reserve(qualified.size());
    for (const auto& q : qualified) {
      if (!q.m1->confidence || !q.m2->confidence) {
        throw Error(ErrorKind::MissingConfidence,
                    "over-cap selection needs confidences; missing for: " + q.id);
      }
      ranked.push_back({q.id, (*q.m1->confidence + *q.m2->confidence) / 2.0});
    }
    std::sort(ranked.begin(), ranked.end(), [](const Ranked& a, const Ranked& b) {
      if (a.mean_confidence != b.mean_confidence) {
        return a.mean_confidence < b.mean_confidence;
      }
      return a.id < b.id;
    });
    for (size_t i = 0; i < cap; ++i) relabeled_ids.push_back(ranked[i].id);
  }

  Dataset relabeled = train;
  std::set<std::string> relabel_set(relabeled_ids.begin(), relabeled_ids.end());
  for (auto& example : relabeled.examples) {
    if (relabel_set.contains(example.id)) {
      example.gold = *schema.uncertain_label;
    }
  }

  RelabelReport report;
  report.n_qualified = qualified.size();
  report.n_relabeled = relabeled_ids.size();
  report.relabeled_ids = relabeled_ids;
  report.cap_fraction = cap_fraction;
  return {std::move(relabeled), report};
}

std::string reasoning_instruction_for(ReasonOrder order) {
  switch (order) {
    case ReasonOrder::ReasonThenClass:
      return "Please output your answer in the format: <reason> reasoning process "
             "here </reason> <answer> answer here </answer>.";
    case ReasonOrder::ClassThenReason:
      return "Please output your answer in the format: <answer> answer here "
             "</answer> <reason> reasoning process here </reason>.";
    case ReasonOrder::ThinkReasonClass:
      return "Please output your answer in the format: <think> thinking process "
             "here </think> <reason> reasoning process here </reason> <answer> "
             "answer here </answer>.";
  }
  return {};
}

std::vector<TrainingRecord> build_reasoning_corpus(
    const std::vector<ReasonTriple>& triples, ReasonOrder order,
    const LabelSchema& schema, const Dataset* dataset,
    const PromptTemplate* templates, const TokenCounter& counter) {
  std::string instruction = reasoning_instruction_for(order);

  std::vector<TrainingRecord> records;
  records.reserve(triples.size());
  for (const auto& triple : triples) {
    if (!schema.has_label(triple.class_label)) {
      throw Error(ErrorKind::UnknownLabel,
                  "triple class not in schema: " + triple.class_label);
    }
    if (order == ReasonOrder::ThinkReasonClass && !triple.think) {
      throw Error(ErrorKind::Validation,
                  "think component missing for example: " + triple.example_id);
    }

    std::string target;
    switch (order) {
      case ReasonOrder::ReasonThenClass:
        target = "<reason>" + triple.reason + "</reason> <answer>" +
                 triple.class_label + "</answer>";
        break;
      case ReasonOrder::ClassThenReason:
        target = "<answer>" + triple.class_label + "</answer> <reason>" +
                 triple.reason + "</reason>";
        break;
      case ReasonOrder::ThinkReasonClass:
        target = "<think>" + *triple.think + "</think> <reason>" + triple.reason +
                 "</reason> <answer>" + triple.class_label + "</answer>";
        break;
    }

    TrainingRecord record;
    record.example_id = triple.example_id;
    record.strategy = to_string(order);
    record.target = std::move(target);

    if (dataset && templates) {
      const Example* example = dataset->find(triple.example_id);
      if (!example) {
        throw Error(ErrorKind::UnknownId,
                    "triple example not in dataset: " + triple.example_id);
      }
      record.prompt = render_prompt_text(StrategyId::zero_shot(), schema, *example,
                                         ShotContext::none(), *templates,
                                         RenderTime::Training,
                                         PromptVariant::TaggedReasoning, &instruction);
    } else {
      record.prompt = instruction;
    }
    if (counter) {
      record.token_length = counter(record.prompt) + counter(record.target);
    }
    records.push_back(std::move(record));
  }
  return records;
}

std::vector<Pack> pack_records(const std::vector<TrainingRecord>& records,
                               size_t max_len, PackMode mode) {
  if (max_len == 0) throw Error(ErrorKind::Config, "max_len must be positive");

  std::vector<Pack> packs;
  Pack current;
  current.mode = mode;
  current.max_len = max_len;

  auto flush = [&] {
    if (!current.segments.empty()) {
      packs.push_back(std::move(current));
      current = Pack{};
      current.mode = mode;
      current.max_len = max_len;
    }
  };

  for (const auto& record : records) {
    if (!record.token_length) {
      throw Error(ErrorKind::MissingTokenLength,
                  "record lacks token_length: " + record.example_id);
    }
    size_t length = *record.token_length;
    if (length > max_len) {
      throw Error(ErrorKind::RecordExceedsMaxLen,
                  "record " + record.example_id + " has length " +
                      std::to_string(length) + " > max_len " +
                      std::to_string(max_len));
    }
    if (current.total_length + length > max_len) flush();
    current.segments.push_back({record.example_id, current.total_length, length});
    current.total_length += length;
  }
  flush();
  return packs;
}

}  // namespace genclass
