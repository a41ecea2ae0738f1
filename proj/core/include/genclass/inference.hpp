#pragma once

#include <optional>
#include <string>
#include <vector>

#include "genclass/backend.hpp"
#include "genclass/corpus.hpp"
#include "genclass/prompt.hpp"
#include "genclass/strategy.hpp"
#include "genclass/types.hpp"

namespace genclass {

/// Label-matching knobs shared by parsers and rewards. Matching trims
/// surrounding whitespace and is case-sensitive unless case_fold is set.
struct MatchConfig {
  bool case_fold = false;
  // Direct-mode accepted answer surfaces.
  bool direct_accept_bare = true;
  bool direct_accept_category_line = true;
};

/// Parsers never throw on model output; every string maps to a parsed label
/// or an in-band format failure (nullopt).
///
/// Category parsing scans for the first line starting (after trimming) with
/// "Category:"; the remainder must be a schema label (text mode) or an
/// integer index in range (numeric mode). `allow_uncertain` admits the
/// schema's uncertain label; corpus round-trips need it, inference never
/// sets it.
std::optional<std::string> parse_category(const std::string& text,
                                          const LabelSchema& schema,
                                          ParseMode mode,
                                          const MatchConfig& match = {},
                                          bool allow_uncertain = false);

struct TaggedParts {
  std::optional<std::string> think;
  std::string reason;
  std::string answer;
};

/// Accepts exactly one block per tag, properly closed, in the expected order,
/// with only whitespace outside the blocks. The default order is the
/// canonical reason-before-answer layout.
std::optional<TaggedParts> parse_tagged(
    const std::string& text, ReasonOrder order = ReasonOrder::ReasonThenClass);

/// Direct-mode parse: the whole trimmed response as a bare label or a
/// "Category: <label>" line, per the match config.
std::optional<std::string> parse_direct(const std::string& text,
                                        const LabelSchema& schema,
                                        const MatchConfig& match = {});

/// Generate once and parse under the record's expected mode. Backend errors
/// propagate; format failures land in the Prediction.
Prediction classify_generate(Backend& backend, const PromptRecord& prompt,
                             const LabelSchema& schema, const DecodeParams& params,
                             const MatchConfig& match = {});

struct PplScore {
  std::string label;
  double nll_mean = 0.0;
  double ppl = 0.0;  // exp(nll_mean)
};

/// exp(-mean(logprobs)). Throws on an empty sequence.
double compute_ppl(const std::vector<double>& token_logprobs);

/// Scores every label's canonical "Category: <label>" continuation against
/// the base prompt and returns the argmin-perplexity label; ties break by
/// ascending label index. format_ok is always true.
Prediction classify_ppl(Backend& backend, const std::string& base_prompt,
                        const LabelSchema& schema,
                        const std::string& example_id = {});

std::vector<PplScore> score_labels_ppl(Backend& backend,
                                       const std::string& base_prompt,
                                       const LabelSchema& schema);

}  // namespace genclass
