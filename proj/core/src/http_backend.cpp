#include "genclass/http_backend.hpp"

#include <chrono>
#include <cstdlib>
#include <mutex>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "genclass/errors.hpp"

namespace genclass {

using nlohmann::json;

struct HttpBackend::Impl {
  HttpBackendConfig config;
  std::string api_key;
  mutable std::mutex probe_mutex;
  mutable int scoring_state = -1;  // -1 unknown, 0 no, 1 yes

  explicit Impl(HttpBackendConfig cfg) : config(std::move(cfg)) {
    if (!config.api_key_env.empty()) {
      if (const char* key = std::getenv(config.api_key_env.c_str())) api_key = key;
    }
  }

  httplib::Client make_client() const {
    httplib::Client client(config.base_url);
    client.set_connection_timeout(config.timeout_seconds, 0);
    client.set_read_timeout(config.timeout_seconds, 0);
    client.set_write_timeout(config.timeout_seconds, 0);
    if (!api_key.empty()) client.set_bearer_token_auth(api_key);
    return client;
  }

  // POSTs the payload, retrying transport failures with exponential backoff.
  // API error payloads are final.
  json post_json(const std::string& path, const json& payload) const {
    std::string body = payload.dump();
    int backoff_ms = config.retry_backoff_ms;
    int attempts = 1 + std::max(0, config.max_retries);
    for (int attempt = 1;; ++attempt) {
      httplib::Client client = make_client();
      auto result = client.Post(path, body, "application/json");
      if (!result) {
        auto err = result.error();
        bool timeout = err == httplib::Error::ConnectionTimeout ||
                       err == httplib::Error::Read || err == httplib::Error::Write;
        if (attempt < attempts) {
          std::this_thread::sleep_for(std::chrono::milliseconds(backoff_ms));
          backoff_ms *= 2;
          continue;
        }
        throw Error(timeout ? ErrorKind::Timeout : ErrorKind::Transport,
                    "request to " + config.base_url + path +
                        " failed: " + httplib::to_string(err));
      }
      if (result->status < 200 || result->status >= 300) {
        throw Error(ErrorKind::BackendApi,
                    "backend returned HTTP " + std::to_string(result->status) +
                        ": " + result->body);
      }
      json parsed = json::parse(result->body, nullptr, /*allow_exceptions=*/false);
      if (parsed.is_discarded()) {
        throw Error(ErrorKind::BackendApi, "backend returned malformed JSON");
      }
      return parsed;
    }
  }
};

HttpBackend::HttpBackend(HttpBackendConfig config)
    : impl_(std::make_unique<Impl>(std::move(config))) {}

HttpBackend::~HttpBackend() = default;

std::string HttpBackend::id() const {
  return "http:" + impl_->config.base_url + "#" + impl_->config.model;
}

GenerationResult HttpBackend::generate(const std::string& prompt,
                                       const DecodeParams& params) {
  if (prompt.empty()) {
    throw Error(ErrorKind::Validation, "generate called with empty prompt");
  }
  if (params.temperature < 0.0) {
    throw Error(ErrorKind::Validation, "temperature must be non-negative");
  }
  json payload = {
      {"model", impl_->config.model},
      {"messages", json::array({json{{"role", "user"}, {"content", prompt}}})},
      {"temperature", params.temperature},
      {"max_tokens", params.max_new_tokens},
  };
  if (!params.stop_sequences.empty()) payload["stop"] = params.stop_sequences;
  if (params.seed) payload["seed"] = *params.seed;
  if (impl_->config.request_logprobs) payload["logprobs"] = true;

  json response = impl_->post_json(impl_->config.chat_path, payload);
  if (!response.contains("choices") || response["choices"].empty()) {
    throw Error(ErrorKind::BackendApi, "backend response has no choices");
  }
  const json& choice = response["choices"][0];

  GenerationResult result;
  result.text = choice.value("message", json::object()).value("content", std::string{});

  std::string finish = choice.value("finish_reason", "stop");
  result.finish_reason = finish == "length" ? FinishReason::Length
                         : finish == "stop" ? FinishReason::Stop
                                            : FinishReason::Error;

  if (choice.contains("logprobs") && choice["logprobs"].is_object() &&
      choice["logprobs"].contains("content")) {
    std::vector<TokenLogprob> logprobs;
    for (const auto& entry : choice["logprobs"]["content"]) {
      double lp = entry.value("logprob", 0.0);
      // Some servers emit tiny positive values from float error.
      logprobs.push_back({entry.value("token", std::string{}), std::min(lp, 0.0)});
    }
    if (!logprobs.empty()) result.token_logprobs = std::move(logprobs);
  }
  return result;
}

bool HttpBackend::supports_scoring() const {
  std::lock_guard<std::mutex> lock(impl_->probe_mutex);
  if (impl_->scoring_state >= 0) return impl_->scoring_state == 1;
  try {
    json payload = {
        {"model", impl_->config.model},
        {"prompt", "probe"},
        {"max_tokens", 0},
        {"echo", true},
        {"logprobs", 0},
    };
    json response = impl_->post_json(impl_->config.completions_path, payload);
    bool ok = response.contains("choices") && !response["choices"].empty() &&
              response["choices"][0].contains("logprobs") &&
              response["choices"][0]["logprobs"].is_object();
    impl_->scoring_state = ok ? 1 : 0;
  } catch (const Error&) {
    impl_->scoring_state = 0;
  }
  return impl_->scoring_state == 1;
}

std::vector<TokenLogprob> HttpBackend::score_continuation(
    const std::string& prompt, const std::string& continuation) {
  if (continuation.empty()) {
    throw Error(ErrorKind::Validation, "score_continuation with empty continuation");
  }
  json payload = {
      {"model", impl_->config.model},
      {"prompt", prompt + continuation},
      {"max_tokens", 0},
      {"echo", true},
      {"logprobs", 0},
  };
  json response = impl_->post_json(impl_->config.completions_path, payload);
  if (!response.contains("choices") || response["choices"].empty()) {
    throw Error(ErrorKind::BackendApi, "backend response has no choices");
  }
  const json& choice = response["choices"][0];
  if (!choice.contains("logprobs") || !choice["logprobs"].is_object()) {
    throw Error(ErrorKind::ScoringUnsupported,
                "backend did not return echoed logprobs");
  }
  const json& lp = choice["logprobs"];
  if (!lp.contains("tokens") || !lp.contains("token_logprobs") ||
      !lp.contains("text_offset")) {
    throw Error(ErrorKind::ScoringUnsupported,
                "backend logprobs lack tokens/token_logprobs/text_offset");
  }

  const json& tokens = lp["tokens"];
  const json& values = lp["token_logprobs"];
  const json& offsets = lp["text_offset"];
  size_t n = std::min({tokens.size(), values.size(), offsets.size()});
  size_t boundary = prompt.size();

  std::vector<TokenLogprob> out;
  for (size_t i = 0; i < n; ++i) {
    if (offsets[i].get<size_t>() < boundary) continue;  // prompt tokens
    if (values[i].is_null()) {
      throw Error(ErrorKind::ScoringUnsupported,
                  "backend returned null logprob inside continuation");
    }
    out.push_back({tokens[i].get<std::string>(),
                   std::min(values[i].get<double>(), 0.0)});
  }
  if (out.empty()) {
    throw Error(ErrorKind::ScoringUnsupported,
                "no continuation tokens in echoed logprobs");
  }
  return out;
}

}  // namespace genclass
