#include "coact/http_env.hpp"

#include "httplib.h"
#include "json.hpp"

#include "coact/actions.hpp"
#include "coact/png.hpp"
#include "coact/util.hpp"

namespace coact {

using nlohmann::json;

struct HttpEnvironment::Impl {
  explicit Impl(const HttpEnvConfig& config) : client(config.base_url) {
    client.set_connection_timeout(
        std::chrono::duration<double>(config.connect_timeout_s));
  }
  httplib::Client client;
};

namespace {

// One operation in flight per session; overlap is a caller bug.
class FlightGuard {
 public:
  explicit FlightGuard(std::mutex& mutex) : lock_(mutex, std::try_to_lock) {
    if (!lock_.owns_lock())
      throw ProtocolError("overlapping operation on one environment session");
  }

 private:
  std::unique_lock<std::mutex> lock_;
};

json expect_json(const httplib::Result& res, const char* op) {
  if (!res)
    throw EnvError(EnvErrorKind::transport,
                   std::string(op) + ": " + httplib::to_string(res.error()));
  if (res->status >= 500)
    throw EnvError(EnvErrorKind::transport,
                   std::string(op) + ": server error " +
                       std::to_string(res->status) + " " + res->body);
  json body = json::parse(res->body, nullptr, false);
  if (body.is_discarded())
    throw EnvError(EnvErrorKind::transport,
                   std::string(op) + ": non-JSON response");
  return body;
}

}  // namespace

HttpEnvironment::HttpEnvironment(HttpEnvConfig config)
    : config_(std::move(config)), impl_(std::make_unique<Impl>(config_)) {}

HttpEnvironment::~HttpEnvironment() = default;

std::pair<ExecResult, Observation> HttpEnvironment::execute_script(
    const CodeAction& action, double timeout_s) {
  FlightGuard guard(in_flight_);
  if (action.source.empty()) throw ProtocolError("empty script source");
  json req = {{"language", language_name(action.language)},
              {"code", action.source},
              {"timeout_s", timeout_s},
              {"session_id", config_.session_id}};
  // Allow the HTTP read to outlast the script.
  impl_->client.set_read_timeout(std::chrono::duration<double>(timeout_s + 30));
  auto res = impl_->client.Post("/execute", req.dump(), "application/json");
  json body = expect_json(res, "execute");
  if (res->status != 200)
    throw EnvError(EnvErrorKind::transport,
                   "execute rejected: " + std::to_string(res->status) + " " +
                       body.value("error", ""));
  ExecResult result;
  result.exit_code = body.at("exit_code").get<int>();
  result.stdout_text = body.at("stdout").get<std::string>();
  result.stderr_text = body.at("stderr").get<std::string>();
  result.timed_out = body.at("timed_out").get<bool>();
  result.stdout_truncated = body.value("stdout_truncated", false);
  result.stderr_truncated = body.value("stderr_truncated", false);
  result.duration_s = body.value("duration_s", 0.0);

  Observation obs;
  obs.screenshot_png = base64_decode(body.value("screenshot", ""));
  if (auto dims = png_dimensions(std::span<const uint8_t>(obs.screenshot_png))) {
    obs.width = dims->width;
    obs.height = dims->height;
  }
  // Execution output always rides along as observation text.
  obs.text = result.stdout_text;
  obs.captured_at = monotonic_seconds();
  return {std::move(result), std::move(obs)};
}

Observation HttpEnvironment::perform_action(const GuiAction& action) {
  FlightGuard guard(in_flight_);
  if (action.is_terminate())
    throw ProtocolError("terminate is not dispatchable");
  json req = gui_action_to_json(action);
  req["session_id"] = config_.session_id;
  auto res = impl_->client.Post("/action", req.dump(), "application/json");
  json body = expect_json(res, "action");
  if (res->status != 200)
    throw EnvError(EnvErrorKind::bad_action,
                   "action rejected: " + std::to_string(res->status) + " " +
                       body.value("error", ""));
  Observation obs;
  obs.screenshot_png = base64_decode(body.value("screenshot", ""));
  if (auto dims = png_dimensions(std::span<const uint8_t>(obs.screenshot_png))) {
    obs.width = dims->width;
    obs.height = dims->height;
  }
  obs.captured_at = monotonic_seconds();
  return obs;
}

Observation HttpEnvironment::capture_screenshot() {
  FlightGuard guard(in_flight_);
  auto res = impl_->client.Get("/screenshot");
  if (!res)
    throw EnvError(EnvErrorKind::transport,
                   std::string("screenshot: ") + httplib::to_string(res.error()));
  if (res->status != 200)
    throw EnvError(EnvErrorKind::transport,
                   "screenshot: status " + std::to_string(res->status));
  Observation obs;
  obs.screenshot_png.assign(res->body.begin(), res->body.end());
  auto dims = png_dimensions(std::span<const uint8_t>(obs.screenshot_png));
  if (!dims)
    throw EnvError(EnvErrorKind::transport, "screenshot: body is not a PNG");
  obs.width = dims->width;
  obs.height = dims->height;
  obs.captured_at = monotonic_seconds();
  return obs;
}

void HttpEnvironment::reset(const std::string& snapshot_id) {
  FlightGuard guard(in_flight_);
  json req = {{"snapshot_id", snapshot_id},
              {"session_id", config_.session_id}};
  auto res = impl_->client.Post("/reset", req.dump(), "application/json");
  json body = expect_json(res, "reset");
  if (res->status == 404)
    throw EnvError(EnvErrorKind::unknown_snapshot,
                   "unknown snapshot: " + snapshot_id);
  if (res->status != 200)
    throw EnvError(EnvErrorKind::transport,
                   "reset rejected: " + std::to_string(res->status));
}

}  // namespace coact
