#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace genclass {

struct TokenLogprob {
  std::string token;
  double logprob = 0.0;
};

enum class FinishReason { Stop, Length, Error };

struct GenerationResult {
  std::string text;
  std::optional<std::vector<TokenLogprob>> token_logprobs;
  FinishReason finish_reason = FinishReason::Stop;
};

struct DecodeParams {
  size_t max_new_tokens = 32;
  double temperature = 0.0;
  std::vector<std::string> stop_sequences;
  std::optional<uint64_t> seed;
};

/// Uniform contract for text generation and teacher-forced continuation
/// scoring. Implementations must be safe for concurrent calls.
class Backend {
 public:
  virtual ~Backend() = default;

  virtual std::string id() const = 0;

  // Throws Error with kind Transport/Timeout/BackendApi; never returns a
  // partial result.
  virtual GenerationResult generate(const std::string& prompt,
                                    const DecodeParams& params) = 0;

  virtual bool supports_scoring() const = 0;

  // One logprob per continuation token under the backend's tokenization,
  // conditioned on prompt + preceding continuation tokens. Throws
  // Error{ScoringUnsupported} when the backend cannot score.
  virtual std::vector<TokenLogprob> score_continuation(
      const std::string& prompt, const std::string& continuation) = 0;
};

using BackendPtr = std::shared_ptr<Backend>;

}  // namespace genclass
