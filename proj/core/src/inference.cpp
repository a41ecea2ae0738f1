#include "genclass/inference.hpp"

#include <charconv>
#include <cmath>

#include "genclass/errors.hpp"
#include "genclass/util.hpp"

namespace genclass {

namespace {

constexpr std::string_view kCategoryPrefix = "Category:";

bool labels_equal(std::string_view a, std::string_view b, const MatchConfig& match) {
  std::string ta = trim(a);
  std::string tb = trim(b);
  if (match.case_fold) return to_lower(ta) == to_lower(tb);
  return ta == tb;
}

std::optional<std::string> match_label(std::string_view payload,
                                       const LabelSchema& schema,
                                       const MatchConfig& match,
                                       bool allow_uncertain) {
  for (const auto& label : schema.labels) {
    if (labels_equal(payload, label, match)) return label;
  }
  if (allow_uncertain && schema.uncertain_label &&
      labels_equal(payload, *schema.uncertain_label, match)) {
    return *schema.uncertain_label;
  }
  return std::nullopt;
}

std::optional<std::string> match_numeric(std::string_view payload,
                                         const LabelSchema& schema) {
  std::string_view digits = trim_view(payload);
  if (digits.empty()) return std::nullopt;
  size_t value = 0;
  auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), value);
  if (ec != std::errc{} || ptr != digits.data() + digits.size()) return std::nullopt;
  if (value >= schema.labels.size()) return std::nullopt;
  return schema.labels[value];
}

// Position of a tag token that must occur exactly once, else nullopt.
std::optional<size_t> find_unique(const std::string& text, std::string_view token) {
  size_t first = text.find(token);
  if (first == std::string::npos) return std::nullopt;
  if (text.find(token, first + token.size()) != std::string::npos) return std::nullopt;
  return first;
}

bool whitespace_only(std::string_view s) { return trim_view(s).empty(); }

}  // namespace

std::optional<std::string> parse_category(const std::string& text,
                                          const LabelSchema& schema,
                                          ParseMode mode, const MatchConfig& match,
                                          bool allow_uncertain) {
  size_t pos = 0;
  while (pos <= text.size()) {
    size_t eol = text.find('\n', pos);
    std::string_view line(text.data() + pos,
                          (eol == std::string::npos ? text.size() : eol) - pos);
    std::string_view trimmed = trim_view(line);
    if (trimmed.starts_with(kCategoryPrefix)) {
      // Only the first matching line counts; later ones are ignored.
      std::string_view payload = trimmed.substr(kCategoryPrefix.size());
      if (mode == ParseMode::CategoryNumeric) return match_numeric(payload, schema);
      return match_label(payload, schema, match, allow_uncertain);
    }
    if (eol == std::string::npos) break;
    pos = eol + 1;
  }
  return std::nullopt;
}

std::optional<TaggedParts> parse_tagged(const std::string& text, ReasonOrder order) {
  struct Tag {
    std::string_view open, close;
  };
  static constexpr Tag kThink{"<think>", "</think>"};
  static constexpr Tag kReason{"<reason>", "</reason>"};
  static constexpr Tag kAnswer{"<answer>", "</answer>"};

  std::vector<Tag> sequence;
  switch (order) {
    case ReasonOrder::ReasonThenClass: sequence = {kReason, kAnswer}; break;
    case ReasonOrder::ClassThenReason: sequence = {kAnswer, kReason}; break;
    case ReasonOrder::ThinkReasonClass: sequence = {kThink, kReason, kAnswer}; break;
  }

  // Every tag token must appear exactly once and in the expected order, with
  // nothing but whitespace between and around the blocks.
  std::vector<std::pair<size_t, size_t>> spans;  // payload [begin, end)
  size_t cursor = 0;
  for (const Tag& tag : sequence) {
    auto open = find_unique(text, tag.open);
    auto close = find_unique(text, tag.close);
    if (!open || !close || *close < *open + tag.open.size()) return std::nullopt;
    if (*open < cursor) return std::nullopt;
    if (!whitespace_only(std::string_view(text).substr(cursor, *open - cursor))) {
      return std::nullopt;
    }
    spans.emplace_back(*open + tag.open.size(), *close);
    cursor = *close + tag.close.size();
  }
  if (!whitespace_only(std::string_view(text).substr(cursor))) return std::nullopt;

  // Stray tags from other layouts would have failed find_unique only if
  // duplicated; reject any unexpected tag token explicitly.
  if (order != ReasonOrder::ThinkReasonClass &&
      (text.find(kThink.open) != std::string::npos ||
       text.find(kThink.close) != std::string::npos)) {
    return std::nullopt;
  }

  TaggedParts parts;
  size_t i = 0;
  if (order == ReasonOrder::ThinkReasonClass) {
    parts.think = text.substr(spans[0].first, spans[0].second - spans[0].first);
    i = 1;
  }
  if (order == ReasonOrder::ClassThenReason) {
    parts.answer = text.substr(spans[0].first, spans[0].second - spans[0].first);
    parts.reason = text.substr(spans[1].first, spans[1].second - spans[1].first);
  } else {
    parts.reason = text.substr(spans[i].first, spans[i].second - spans[i].first);
    parts.answer = text.substr(spans[i + 1].first, spans[i + 1].second - spans[i + 1].first);
  }
  return parts;
}

std::optional<std::string> parse_direct(const std::string& text,
                                        const LabelSchema& schema,
                                        const MatchConfig& match) {
  std::string_view trimmed = trim_view(text);
  if (match.direct_accept_bare) {
    if (auto label = match_label(trimmed, schema, match, false)) return label;
  }
  if (match.direct_accept_category_line && trimmed.starts_with(kCategoryPrefix)) {
    if (auto label = match_label(trimmed.substr(kCategoryPrefix.size()), schema,
                                 match, false)) {
      return label;
    }
  }
  return std::nullopt;
}

namespace {

// Mean logprob over the tokens that spell the emitted label; falls back to
// the whole sequence when no token aligns.
std::optional<double> confidence_from(const GenerationResult& result,
                                      const std::string& label_surface) {
  if (!result.token_logprobs || result.token_logprobs->empty()) return std::nullopt;
  double label_sum = 0.0;
  size_t label_count = 0;
  double total_sum = 0.0;
  for (const auto& [token, logprob] : *result.token_logprobs) {
    total_sum += logprob;
    std::string t = trim(token);
    if (!t.empty() && label_surface.find(t) != std::string::npos) {
      label_sum += logprob;
      ++label_count;
    }
  }
  if (label_count > 0) return label_sum / static_cast<double>(label_count);
  return total_sum / static_cast<double>(result.token_logprobs->size());
}

}  // namespace

Prediction classify_generate(Backend& backend, const PromptRecord& prompt,
                             const LabelSchema& schema, const DecodeParams& params,
                             const MatchConfig& match) {
  GenerationResult result = backend.generate(prompt.text, params);

  Prediction prediction;
  prediction.example_id = prompt.target_example_id;
  prediction.raw_output = result.text;

  std::optional<std::string> parsed;
  std::string label_surface;
  switch (prompt.expected_parse_mode) {
    case ParseMode::CategoryText:
      parsed = parse_category(result.text, schema, ParseMode::CategoryText, match);
      if (parsed) label_surface = *parsed;
      break;
    case ParseMode::CategoryNumeric:
      parsed = parse_category(result.text, schema, ParseMode::CategoryNumeric, match);
      if (parsed) {
        label_surface = std::to_string(*schema.index_of(*parsed));
      }
      break;
    case ParseMode::TaggedReasoning: {
      auto parts = parse_tagged(result.text);
      if (parts) {
        for (const auto& label : schema.labels) {
          if (labels_equal(parts->answer, label, match)) {
            parsed = label;
            label_surface = label;
            break;
          }
        }
      }
      break;
    }
    case ParseMode::Direct:
      parsed = parse_direct(result.text, schema, match);
      if (parsed) label_surface = *parsed;
      break;
  }

  prediction.format_ok = parsed.has_value();
  prediction.parsed_label = parsed;
  if (parsed) prediction.confidence = confidence_from(result, label_surface);
  return prediction;
}

double compute_ppl(const std::vector<double>& token_logprobs) {
  if (token_logprobs.empty()) {
    throw Error(ErrorKind::EmptySequence, "compute_ppl over empty sequence");
  }
  double sum = 0.0;
  for (double lp : token_logprobs) sum += lp;
  return std::exp(-sum / static_cast<double>(token_logprobs.size()));
}

std::vector<PplScore> score_labels_ppl(Backend& backend,
                                       const std::string& base_prompt,
                                       const LabelSchema& schema) {
  if (!backend.supports_scoring()) {
    throw Error(ErrorKind::ScoringUnsupported,
                "backend cannot score continuations: " + backend.id());
  }
  std::vector<PplScore> scores;
  scores.reserve(schema.labels.size());
  for (const auto& label : schema.labels) {
    std::string continuation = "Category: " + label;
    auto logprobs = backend.score_continuation(base_prompt, continuation);
    if (logprobs.empty()) {
      throw Error(ErrorKind::EmptySequence, "backend scored zero tokens");
    }
    double sum = 0.0;
    for (const auto& tl : logprobs) sum += tl.logprob;
    double nll_mean = -sum / static_cast<double>(logprobs.size());
    scores.push_back({label, nll_mean, std::exp(nll_mean)});
  }
  return scores;
}

Prediction classify_ppl(Backend& backend, const std::string& base_prompt,
                        const LabelSchema& schema, const std::string& example_id) {
  std::vector<PplScore> scores = score_labels_ppl(backend, base_prompt, schema);
  if (scores.empty()) {
    throw Error(ErrorKind::Validation, "schema has no labels to score");
  }
  size_t best = 0;
  for (size_t i = 1; i < scores.size(); ++i) {
    if (scores[i].ppl < scores[best].ppl) best = i;  // ties keep the earliest
  }
  Prediction prediction;
  prediction.example_id = example_id;
  prediction.raw_output = "Category: " + scores[best].label;
  prediction.format_ok = true;
  prediction.parsed_label = scores[best].label;
  prediction.confidence = -scores[best].nll_mean;
  return prediction;
}

}  // namespace genclass
