#pragma once

#include <atomic>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <string>

#include "coact/types.hpp"

namespace httplib {
class Server;
}

namespace coact {

// Seam for input injection and screen capture. The default driver reports
// no display: /action answers 501 and screenshots are a rendered
// placeholder, which keeps /execute usable on headless CI machines.
class DisplayDriver {
 public:
  virtual ~DisplayDriver() = default;
  virtual bool available() const = 0;
  virtual void inject(const GuiAction& action) = 0;
  virtual std::vector<uint8_t> screenshot_png() = 0;
};

class NullDisplay : public DisplayDriver {
 public:
  bool available() const override { return false; }
  void inject(const GuiAction&) override {}
  std::vector<uint8_t> screenshot_png() override;
};

// Runs one script as a child process in its own process group: the whole
// tree is killed on timeout. Environment scrubbed to a fixed allowlist;
// HOME and TMPDIR point into the workdir.
ExecResult run_subprocess(Language language, const std::string& source,
                          const std::filesystem::path& workdir,
                          double timeout_s, size_t max_output_bytes);

struct InterpServiceConfig {
  std::filesystem::path workdir;
  size_t max_output_bytes = 32 * 1024;
  // snapshot id -> (relative path -> file content); "blank" is built in.
  std::map<std::string, std::map<std::string, std::string>> snapshots;
};

class InterpService {
 public:
  explicit InterpService(InterpServiceConfig config,
                         std::shared_ptr<DisplayDriver> display = nullptr);
  ~InterpService();

  // Registers all endpoint handlers on the server.
  void attach(httplib::Server& server);

 private:
  struct Session {
    std::filesystem::path workdir;
    std::atomic<bool> busy{false};
  };

  Session& session_for(const std::string& session_id);

  InterpServiceConfig config_;
  std::shared_ptr<DisplayDriver> display_;
  std::mutex sessions_mutex_;
  std::map<std::string, std::unique_ptr<Session>> sessions_;
};

// Runs the service on the given port until the process is stopped.
int serve_interp(const InterpServiceConfig& config, const std::string& host,
                 int port);

}  // namespace coact
