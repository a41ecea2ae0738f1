#include "genclass/reward_service.hpp"

#include <atomic>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "genclass/errors.hpp"
#include "genclass/rewards.hpp"

namespace genclass {

using ordered_json = nlohmann::ordered_json;

struct RewardService::Impl {
  RewardServiceConfig config;
  httplib::Server server;
  std::thread thread;
  std::atomic<int> bound_port{0};
  std::atomic<bool> serving{false};

  explicit Impl(RewardServiceConfig cfg) : config(std::move(cfg)) { set_routes(); }

  // Wide schema for library-equivalence: any label is accepted when no
  // schema is configured.
  const LabelSchema& effective_schema(const std::string& gold,
                                      LabelSchema& scratch) const {
    if (config.schema) return *config.schema;
    scratch.labels = {gold};
    return scratch;
  }

  ordered_json score_one(const ordered_json& body) const {
    if (!body.contains("response") || !body.contains("gold")) {
      throw Error(ErrorKind::Validation, "request needs response and gold");
    }
    std::string response = body["response"].get<std::string>();
    std::string gold = body["gold"].get<std::string>();
    RewardMode mode = reward_mode_from_name(body.value("mode", "reasoning"));

    LabelSchema scratch;
    const LabelSchema& schema = effective_schema(gold, scratch);
    RewardBreakdown breakdown =
        total_reward(response, gold, mode, schema, config.match);

    ordered_json out;
    out["format_reward"] = breakdown.format_reward;
    out["accuracy_reward"] = breakdown.accuracy_reward;
    out["total"] = breakdown.total;
    return out;
  }

  void set_routes() {
    server.Get("/healthz", [](const httplib::Request&, httplib::Response& res) {
      res.set_content("ok", "text/plain");
    });

    server.Post("/v1/reward", [this](const httplib::Request& req,
                                     httplib::Response& res) {
      handle(req, res, [this](const ordered_json& body) { return score_one(body); });
    });

    server.Post("/v1/reward/batch", [this](const httplib::Request& req,
                                           httplib::Response& res) {
      handle(req, res, [this](const ordered_json& body) {
        if (!body.is_array()) {
          throw Error(ErrorKind::Validation, "batch body must be a JSON array");
        }
        ordered_json out = ordered_json::array();
        for (const auto& item : body) out.push_back(score_one(item));
        return out;
      });
    });
  }

  template <typename Fn>
  void handle(const httplib::Request& req, httplib::Response& res, Fn&& fn) {
    ordered_json body = ordered_json::parse(req.body, nullptr, false);
    if (body.is_discarded()) {
      res.status = 400;
      res.set_content(R"({"error":"malformed JSON"})", "application/json");
      return;
    }
    try {
      res.set_content(fn(body).dump(), "application/json");
    } catch (const Error& e) {
      res.status = 400;
      ordered_json err;
      err["error"] = e.what();
      err["kind"] = to_string(e.kind());
      res.set_content(err.dump(), "application/json");
    }
  }
};

RewardService::RewardService(RewardServiceConfig config)
    : impl_(std::make_unique<Impl>(std::move(config))) {}

RewardService::~RewardService() { stop(); }

int RewardService::start() {
  int port = impl_->config.port;
  if (port == 0) {
    port = impl_->server.bind_to_any_port(impl_->config.bind_address);
    if (port <= 0) throw Error(ErrorKind::Io, "reward service failed to bind");
  } else if (!impl_->server.bind_to_port(impl_->config.bind_address, port)) {
    throw Error(ErrorKind::Io,
                "reward service failed to bind port " + std::to_string(port));
  }
  impl_->bound_port = port;
  impl_->serving = true;
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return port;
}

void RewardService::stop() {
  if (!impl_) return;
  if (impl_->serving.exchange(false)) {
    impl_->server.stop();
    if (impl_->thread.joinable()) impl_->thread.join();
  }
}

bool RewardService::running() const { return impl_->serving; }

int RewardService::port() const { return impl_->bound_port; }

void RewardService::run_blocking() {
  int port = impl_->config.port;
  impl_->bound_port = port;
  impl_->serving = true;
  if (!impl_->server.listen(impl_->config.bind_address, port)) {
    impl_->serving = false;
    throw Error(ErrorKind::Io,
                "reward service failed to listen on " + impl_->config.bind_address +
                    ":" + std::to_string(port));
  }
}

}  // namespace genclass
