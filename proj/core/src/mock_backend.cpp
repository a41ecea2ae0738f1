#include "genclass/mock_backend.hpp"

#include <cmath>
#include <filesystem>

#include <json.hpp>

#include "genclass/errors.hpp"
#include "genclass/rng.hpp"
#include "genclass/util.hpp"

namespace genclass {

namespace {

void check_logprobs(const std::vector<double>& values, const std::string& where) {
  for (double v : values) {
    if (v > 0.0) {
      throw Error(ErrorKind::Validation,
                  "scripted logprob above 0 in " + where);
    }
  }
}

std::vector<TokenLogprob> zip_tokens(const std::string& text,
                                     const std::vector<double>& values) {
  std::vector<std::string> tokens = whitespace_tokens(text);
  // The scripted array is authoritative; synthesize token texts when the
  // whitespace split disagrees with its length.
  std::vector<TokenLogprob> out;
  out.reserve(values.size());
  for (size_t i = 0; i < values.size(); ++i) {
    std::string token = i < tokens.size() ? tokens[i] : "·" + std::to_string(i);
    out.push_back({std::move(token), values[i]});
  }
  return out;
}

}  // namespace

MockBackend MockBackend::from_json_text(const std::string& text, std::string id) {
  nlohmann::json j = nlohmann::json::parse(text, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded()) throw Error(ErrorKind::Io, "malformed mock script JSON");

  MockBackend mock;
  mock.id_ = std::move(id);
  mock.default_reply = j.value("default_reply", std::string{});
  if (j.contains("uniform_vocab_size")) {
    size_t v = j["uniform_vocab_size"].get<size_t>();
    if (v == 0) throw Error(ErrorKind::Validation, "uniform_vocab_size must be positive");
    mock.uniform_vocab_size = v;
  }
  if (j.contains("rules")) {
    for (const auto& rj : j["rules"]) {
      Rule rule;
      rule.if_contains = rj.value("if_contains", std::string{});
      if (rj.contains("reply")) rule.reply = rj["reply"].get<std::string>();
      if (rj.contains("error")) rule.error = rj["error"].get<std::string>();
      if (rj.contains("reply_logprobs")) {
        rule.reply_logprobs = rj["reply_logprobs"].get<std::vector<double>>();
        check_logprobs(*rule.reply_logprobs, "reply_logprobs");
      }
      if (rj.contains("logprobs")) {
        for (const auto& [key, values] : rj["logprobs"].items()) {
          auto parsed = values.get<std::vector<double>>();
          if (parsed.empty()) {
            throw Error(ErrorKind::Validation, "empty logprob array for key: " + key);
          }
          check_logprobs(parsed, "logprobs[" + key + "]");
          rule.logprobs.emplace_back(key, std::move(parsed));
        }
      }
      mock.rules.push_back(std::move(rule));
    }
  }
  return mock;
}

MockBackend MockBackend::from_file(const std::string& path) {
  return from_json_text(read_file(path),
                        std::filesystem::path(path).stem().string());
}

GenerationResult MockBackend::generate(const std::string& prompt,
                                       const DecodeParams& params) {
  if (prompt.empty()) {
    throw Error(ErrorKind::Validation, "generate called with empty prompt");
  }
  if (params.temperature < 0.0) {
    throw Error(ErrorKind::Validation, "temperature must be non-negative");
  }
  // Scripted replies ignore the remaining decode settings.
  for (const auto& rule : rules) {
    if (prompt.find(rule.if_contains) == std::string::npos) continue;
    if (rule.error) {
      throw Error(ErrorKind::BackendApi, "scripted backend error: " + *rule.error);
    }
    if (!rule.reply) continue;
    GenerationResult result;
    result.text = *rule.reply;
    if (rule.reply_logprobs) {
      result.token_logprobs = zip_tokens(result.text, *rule.reply_logprobs);
    }
    return result;
  }
  GenerationResult result;
  result.text = default_reply;
  return result;
}

std::vector<TokenLogprob> MockBackend::score_continuation(
    const std::string& prompt, const std::string& continuation) {
  if (continuation.empty()) {
    throw Error(ErrorKind::Validation, "score_continuation with empty continuation");
  }
  // Scripted scores win; the longest key contained in the continuation
  // disambiguates overlapping labels.
  for (const auto& rule : rules) {
    if (prompt.find(rule.if_contains) == std::string::npos) continue;
    const std::vector<double>* best = nullptr;
    size_t best_len = 0;
    for (const auto& [key, values] : rule.logprobs) {
      if (key.size() >= best_len && continuation.find(key) != std::string::npos) {
        if (best == nullptr || key.size() > best_len) {
          best = &values;
          best_len = key.size();
        }
      }
    }
    if (best) return zip_tokens(continuation, *best);
  }

  std::vector<std::string> tokens = whitespace_tokens(continuation);
  if (tokens.empty()) tokens.push_back(continuation);

  if (uniform_vocab_size) {
    double lp = -std::log(static_cast<double>(*uniform_vocab_size));
    std::vector<TokenLogprob> out;
    out.reserve(tokens.size());
    for (auto& t : tokens) out.push_back({std::move(t), lp});
    return out;
  }

  // Hash fallback keeps scoring total and deterministic.
  SplitMix64 rng(mix_seed(fnv1a(prompt), fnv1a(continuation)));
  std::vector<TokenLogprob> out;
  out.reserve(tokens.size());
  for (auto& t : tokens) {
    out.push_back({std::move(t), -8.0 * rng.uniform()});
  }
  return out;
}

}  // namespace genclass
