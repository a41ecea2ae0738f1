#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "genclass/prompt.hpp"
#include "genclass/retrieval.hpp"
#include "genclass/strategy.hpp"
#include "genclass/types.hpp"

namespace genclass {

/// One SFT pair. `strategy` holds the canonical strategy name, or the
/// reasoning-order name for reasoning corpora.
struct TrainingRecord {
  std::string prompt;
  std::string target;
  std::string example_id;
  std::string strategy;
  std::optional<size_t> token_length;
};

struct ReasonTriple {
  std::string example_id;
  std::optional<std::string> think;
  std::string reason;
  std::string class_label;
};

enum class ReasonOrder { ClassThenReason, ReasonThenClass, ThinkReasonClass };

const char* to_string(ReasonOrder order);
ReasonOrder reason_order_from_name(const std::string& name);

enum class PackMode { Standard, Neat };

struct PackSegment {
  std::string example_id;
  size_t offset = 0;
  size_t length = 0;
};

/// One packed sequence. Segment boundaries are sufficient to materialize a
/// block-diagonal attention mask; `cross_attending` is true for standard
/// packs (no mask intended) and false for neat ones.
struct Pack {
  PackMode mode = PackMode::Standard;
  size_t max_len = 0;
  std::vector<PackSegment> segments;
  size_t total_length = 0;

  bool cross_attending() const { return mode == PackMode::Standard; }
};

struct RelabelReport {
  size_t n_qualified = 0;
  size_t n_relabeled = 0;
  std::vector<std::string> relabeled_ids;
  double cap_fraction = 0.0;
};

using TokenCounter = std::function<size_t(const std::string&)>;

struct CorpusOptions {
  // Fixed-shot ids; when empty, 3 ids are drawn once from the seed.
  std::vector<std::string> fixed_shot_ids;
  // Required for similar_3_shot: vectors for every training example.
  const EmbeddingStore* embeddings = nullptr;
  // When set, fills token_length with counter(prompt) + counter(target).
  TokenCounter token_counter;
};

/// One record per training example under the given strategy. Sampled and
/// retrieved shot pools exclude the record's own example; fixed shots stay
/// identical across all records.
std::vector<TrainingRecord> build_sft_corpus(const Dataset& train,
                                             const LabelSchema& schema,
                                             StrategyId strategy, uint64_t seed,
                                             const PromptTemplate& templates,
                                             const CorpusOptions& options = {});

/// Relabels examples both reference models got wrong to the schema's
/// uncertain label, capped at floor(cap_fraction * |train|). Over the cap,
/// the qualified examples with the lowest mean confidence win; ties break by
/// ascending id.
std::pair<Dataset, RelabelReport> relabel_uncertain(
    const Dataset& train, const LabelSchema& schema,
    const std::map<std::string, Prediction>& preds_m1,
    const std::map<std::string, Prediction>& preds_m2, double cap_fraction = 0.10);

/// Tagged SFT targets in the requested component order; every target parses
/// back with the matching expected order. When a dataset and templates are
/// given, prompts carry the full rendered layout with the tag instruction;
/// otherwise the prompt is the instruction line alone.
std::vector<TrainingRecord> build_reasoning_corpus(
    const std::vector<ReasonTriple>& triples, ReasonOrder order,
    const LabelSchema& schema, const Dataset* dataset = nullptr,
    const PromptTemplate* templates = nullptr,
    const TokenCounter& counter = nullptr);

// The tag-format instruction for prompts ("<reason> ... </reason>
// <answer> ... </answer>" permuted to the requested order).
std::string reasoning_instruction_for(ReasonOrder order);

/// Order-preserving packing: a record joins the current pack iff it fits,
/// else a new pack opens. Records are never split.
std::vector<Pack> pack_records(const std::vector<TrainingRecord>& records,
                               size_t max_len, PackMode mode);

}  // namespace genclass
