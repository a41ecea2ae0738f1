#pragma once

#include <memory>
#include <optional>
#include <string>

#include "genclass/inference.hpp"
#include "genclass/types.hpp"

namespace genclass {

struct RewardServiceConfig {
  std::string bind_address = "127.0.0.1";
  int port = 8711;  // 0 = pick a free port
  // Gold labels are validated against the schema when one is configured.
  std::optional<LabelSchema> schema;
  MatchConfig match;
};

/// Stateless scoring endpoint for RL rollouts:
///   POST /v1/reward        {"response","gold","mode"} -> breakdown
///   POST /v1/reward/batch  arrays of the same
///   GET  /healthz
/// Responses are byte-identical to the library calls on the same inputs.
class RewardService {
 public:
  explicit RewardService(RewardServiceConfig config);
  ~RewardService();

  RewardService(const RewardService&) = delete;
  RewardService& operator=(const RewardService&) = delete;

  // Binds and serves on a background thread; returns the bound port.
  int start();
  void stop();
  bool running() const;
  int port() const;

  // Serves on the calling thread until stop() (CLI entry point).
  void run_blocking();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace genclass
