#pragma once

#include <optional>
#include <string>
#include <vector>

#include "genclass/backend.hpp"

namespace genclass {

/// Scripted backend: a pure function of (prompt, params, script). Script files
/// are JSON:
///   {"rules": [{"if_contains": str, "reply": str?, "error": str?,
///               "reply_logprobs": [real]?, "logprobs": {key: [real]}?}, ...],
///    "default_reply": str, "uniform_vocab_size": int?}
/// Rules are matched in order by substring on the prompt. Scoring resolves a
/// matching rule's logprobs entry whose key occurs in the continuation
/// (longest key wins); with "uniform_vocab_size" set, every whitespace token
/// scores ln(1/V); otherwise a deterministic hash of (prompt, continuation)
/// supplies negative logprobs, so scoring is total.
class MockBackend : public Backend {
 public:
  struct Rule {
    std::string if_contains;
    std::optional<std::string> reply;
    std::optional<std::string> error;  // scripted failure injection
    std::optional<std::vector<double>> reply_logprobs;
    std::vector<std::pair<std::string, std::vector<double>>> logprobs;
  };

  static MockBackend from_file(const std::string& path);
  static MockBackend from_json_text(const std::string& text, std::string id = "mock");

  MockBackend() = default;

  std::string id() const override { return id_; }
  GenerationResult generate(const std::string& prompt,
                            const DecodeParams& params) override;
  bool supports_scoring() const override { return true; }
  std::vector<TokenLogprob> score_continuation(
      const std::string& prompt, const std::string& continuation) override;

  std::vector<Rule> rules;
  std::string default_reply;
  std::optional<size_t> uniform_vocab_size;

 private:
  std::string id_ = "mock";
};

}  // namespace genclass
