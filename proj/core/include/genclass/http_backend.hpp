#pragma once

#include <memory>
#include <string>

#include "genclass/backend.hpp"

namespace genclass {

struct HttpBackendConfig {
  std::string base_url;               // e.g. "http://localhost:8000"
  std::string model;
  std::string chat_path = "/v1/chat/completions";
  std::string completions_path = "/v1/completions";
  std::string api_key_env = "OPENAI_API_KEY";  // bearer token source; may be unset
  int timeout_seconds = 60;
  int max_retries = 3;                // transport failures only
  int retry_backoff_ms = 200;         // doubles per attempt
  bool request_logprobs = true;
};

/// OpenAI-compatible client. Generation goes through the chat-completions
/// endpoint; scoring through the completions endpoint with echoed logprobs.
/// Scoring availability is probed once and cached; a provider that omits
/// logprobs surfaces as ScoringUnsupported, never as fabricated zeros.
class HttpBackend : public Backend {
 public:
  explicit HttpBackend(HttpBackendConfig config);
  ~HttpBackend() override;

  std::string id() const override;
  GenerationResult generate(const std::string& prompt,
                            const DecodeParams& params) override;
  bool supports_scoring() const override;
  std::vector<TokenLogprob> score_continuation(
      const std::string& prompt, const std::string& continuation) override;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace genclass
