#pragma once

#include <memory>
#include <mutex>

#include "coact/env.hpp"

namespace coact {

struct HttpEnvConfig {
  std::string base_url;  // e.g. http://127.0.0.1:8800
  std::string session_id = "default";
  ScreenSize screen{1920, 1080};
  double connect_timeout_s = 5.0;
};

// Client side of the interp-service wire protocol. Issues exactly one HTTP
// request per operation (no hidden retries) and rejects overlapping
// in-flight operations on one session.
class HttpEnvironment : public EnvironmentSession {
 public:
  explicit HttpEnvironment(HttpEnvConfig config);
  ~HttpEnvironment() override;

  std::string session_id() const override { return config_.session_id; }
  ScreenSize screen() const override { return config_.screen; }
  ScriptDialect script_dialect() const override {
    return ScriptDialect::posix;
  }

  std::pair<ExecResult, Observation> execute_script(const CodeAction& action,
                                                    double timeout_s) override;
  Observation perform_action(const GuiAction& action) override;
  Observation capture_screenshot() override;
  void reset(const std::string& snapshot_id) override;

 private:
  struct Impl;
  HttpEnvConfig config_;
  std::unique_ptr<Impl> impl_;
  std::mutex in_flight_;
};

}  // namespace coact
