#include "coact/interp_service.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <fstream>
#include <thread>

#include "httplib.h"
#include "json.hpp"

#include "coact/actions.hpp"
#include "coact/png.hpp"
#include "coact/util.hpp"

namespace coact {

using nlohmann::json;

std::vector<uint8_t> NullDisplay::screenshot_png() {
  // Deterministic placeholder raster.
  Raster img = Raster::filled(320, 200, 40, 40, 40);
  img.fill_rect(40, 90, 240, 20, 120, 120, 120);
  return encode_png(img);
}

ExecResult run_subprocess(Language language, const std::string& source,
                          const std::filesystem::path& workdir,
                          double timeout_s, size_t max_output_bytes) {
  std::filesystem::create_directories(workdir);
  std::string ext = language == Language::python ? ".py" : ".sh";
  std::filesystem::path script =
      workdir / ("script_" + md5_hex(source).substr(0, 12) + ext);
  {
    std::ofstream out(script, std::ios::trunc);
    out << source;
  }

  int out_pipe[2], err_pipe[2];
  if (pipe(out_pipe) != 0 || pipe(err_pipe) != 0)
    throw std::runtime_error("pipe failed");

  auto start = std::chrono::steady_clock::now();
  pid_t pid = fork();
  if (pid < 0) throw std::runtime_error("fork failed");
  if (pid == 0) {
    setpgid(0, 0);
    dup2(out_pipe[1], STDOUT_FILENO);
    dup2(err_pipe[1], STDERR_FILENO);
    close(out_pipe[0]);
    close(out_pipe[1]);
    close(err_pipe[0]);
    close(err_pipe[1]);
    if (chdir(workdir.c_str()) != 0) _exit(126);

    std::string home = "HOME=" + workdir.string();
    std::string tmp = "TMPDIR=" + workdir.string();
    const char* path = std::getenv("PATH");
    std::string path_var =
        std::string("PATH=") + (path ? path : "/usr/bin:/bin");
    std::string lang_var = "LANG=C.UTF-8";
    char* envp[] = {path_var.data(), home.data(), tmp.data(), lang_var.data(),
                    nullptr};
    const char* interp = language == Language::python ? "python3" : "bash";
    execle("/usr/bin/env", "env", interp, script.c_str(),
           static_cast<char*>(nullptr), envp);
    _exit(127);
  }

  setpgid(pid, pid);
  close(out_pipe[1]);
  close(err_pipe[1]);
  fcntl(out_pipe[0], F_SETFL, O_NONBLOCK);
  fcntl(err_pipe[0], F_SETFL, O_NONBLOCK);

  ExecResult result;
  std::string out_buf, err_buf;
  bool out_open = true, err_open = true;
  auto deadline = start + std::chrono::duration_cast<
                              std::chrono::steady_clock::duration>(
                              std::chrono::duration<double>(timeout_s));

  auto drain = [&](int fd, std::string& buf, bool& open_flag) {
    char chunk[4096];
    for (;;) {
      ssize_t n = read(fd, chunk, sizeof(chunk));
      if (n > 0) {
        // Keep reading past the cap so the child never blocks on the pipe.
        if (buf.size() < max_output_bytes + 4096)
          buf.append(chunk, size_t(n));
        continue;
      }
      if (n == 0) {
        open_flag = false;
        close(fd);
      }
      break;
    }
  };

  bool exited = false;
  int status = 0;
  while (true) {
    struct pollfd fds[2];
    nfds_t nfds = 0;
    if (out_open) fds[nfds++] = {out_pipe[0], POLLIN, 0};
    if (err_open) fds[nfds++] = {err_pipe[0], POLLIN, 0};

    auto now = std::chrono::steady_clock::now();
    if (now >= deadline) {
      result.timed_out = true;
      kill(-pid, SIGKILL);
      waitpid(pid, &status, 0);
      exited = true;
      break;
    }
    int wait_ms = int(std::chrono::duration_cast<std::chrono::milliseconds>(
                          deadline - now)
                          .count());
    wait_ms = std::min(wait_ms, 100);
    if (nfds > 0) {
      poll(fds, nfds, wait_ms);
      if (out_open) drain(out_pipe[0], out_buf, out_open);
      if (err_open) drain(err_pipe[0], err_buf, err_open);
    }
    if (!exited) {
      pid_t done = waitpid(pid, &status, WNOHANG);
      if (done == pid) {
        exited = true;
        // Final drain after exit.
        if (out_open) drain(out_pipe[0], out_buf, out_open);
        if (err_open) drain(err_pipe[0], err_buf, err_open);
        break;
      }
    }
    if (nfds == 0) {
      // Pipes closed but child still running (e.g. daemonized grandchild
      // inherited them closed): block-wait with the timeout loop.
      std::this_thread::sleep_for(std::chrono::milliseconds(20));
    }
  }
  if (out_open) close(out_pipe[0]);
  if (err_open) close(err_pipe[0]);
  // Reap any stragglers in the group.
  kill(-pid, SIGKILL);

  if (result.timed_out) {
    result.exit_code = kTimeoutExitCode;
  } else if (WIFEXITED(status)) {
    result.exit_code = WEXITSTATUS(status);
  } else if (WIFSIGNALED(status)) {
    result.exit_code = 128 + WTERMSIG(status);
  }
  result.stdout_text = std::move(out_buf);
  result.stderr_text = std::move(err_buf);
  result.stdout_truncated = truncate_output(result.stdout_text, max_output_bytes);
  result.stderr_truncated = truncate_output(result.stderr_text, max_output_bytes);
  result.duration_s = std::chrono::duration<double>(
                          std::chrono::steady_clock::now() - start)
                          .count();
  return result;
}

InterpService::InterpService(InterpServiceConfig config,
                             std::shared_ptr<DisplayDriver> display)
    : config_(std::move(config)), display_(std::move(display)) {
  if (!display_) display_ = std::make_shared<NullDisplay>();
  std::filesystem::create_directories(config_.workdir);
}

InterpService::~InterpService() = default;

InterpService::Session& InterpService::session_for(
    const std::string& session_id) {
  std::lock_guard lock(sessions_mutex_);
  auto it = sessions_.find(session_id);
  if (it == sessions_.end()) {
    auto session = std::make_unique<Session>();
    session->workdir = config_.workdir / session_id;
    std::filesystem::create_directories(session->workdir);
    it = sessions_.emplace(session_id, std::move(session)).first;
  }
  return *it->second;
}

namespace {

// RAII busy flag; acquired() is false when another operation is in flight.
class BusyGuard {
 public:
  explicit BusyGuard(std::atomic<bool>& flag) : flag_(flag) {
    bool expected = false;
    acquired_ = flag_.compare_exchange_strong(expected, true);
  }
  ~BusyGuard() {
    if (acquired_) flag_.store(false);
  }
  bool acquired() const { return acquired_; }

 private:
  std::atomic<bool>& flag_;
  bool acquired_ = false;
};

void reply_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

std::optional<json> parse_body(const httplib::Request& req,
                               httplib::Response& res) {
  json body = json::parse(req.body, nullptr, false);
  if (body.is_discarded() || !body.is_object()) {
    reply_json(res, 400, {{"error", "body must be a JSON object"}});
    return std::nullopt;
  }
  return body;
}

}  // namespace

void InterpService::attach(httplib::Server& server) {
  server.Post("/execute", [this](const httplib::Request& req,
                                 httplib::Response& res) {
    auto body = parse_body(req, res);
    if (!body) return;
    std::string lang_name = body->value("language", "");
    if (lang_name != "python" && lang_name != "bash") {
      reply_json(res, 400, {{"error", "language must be python|bash"}});
      return;
    }
    if (!body->contains("code") || !(*body)["code"].is_string()) {
      reply_json(res, 400, {{"error", "missing code"}});
      return;
    }
    double timeout_s = body->value("timeout_s", 120.0);
    if (timeout_s <= 0) {
      reply_json(res, 400, {{"error", "timeout_s must be positive"}});
      return;
    }
    Session& session = session_for(body->value("session_id", "default"));
    BusyGuard guard(session.busy);
    if (!guard.acquired()) {
      reply_json(res, 409, {{"error", "session busy"}});
      return;
    }
    ExecResult result;
    try {
      result = run_subprocess(
          lang_name == "python" ? Language::python : Language::bash,
          (*body)["code"].get<std::string>(), session.workdir, timeout_s,
          config_.max_output_bytes);
    } catch (const std::exception& e) {
      reply_json(res, 500, {{"error", e.what()}});
      return;
    }
    std::vector<uint8_t> shot = display_->screenshot_png();
    reply_json(res, 200,
               {{"exit_code", result.exit_code},
                {"stdout", result.stdout_text},
                {"stderr", result.stderr_text},
                {"stdout_truncated", result.stdout_truncated},
                {"stderr_truncated", result.stderr_truncated},
                {"timed_out", result.timed_out},
                {"duration_s", result.duration_s},
                {"screenshot", base64_encode(std::span<const uint8_t>(shot))},
                {"screenshot_placeholder", !display_->available()}});
  });

  server.Post("/action", [this](const httplib::Request& req,
                                httplib::Response& res) {
    auto body = parse_body(req, res);
    if (!body) return;
    Session& session = session_for(body->value("session_id", "default"));
    BusyGuard guard(session.busy);
    if (!guard.acquired()) {
      reply_json(res, 409, {{"error", "session busy"}});
      return;
    }
    json action_obj = *body;
    action_obj.erase("session_id");
    GuiAction action;
    try {
      // Schema validation first; bounds are checked against the current
      // screen when a display exists, else only for non-negativity.
      ScreenSize screen{1 << 30, 1 << 30};
      if (display_->available()) {
        auto dims = png_dimensions(
            std::span<const uint8_t>(display_->screenshot_png()));
        if (dims) screen = {dims->width, dims->height};
      }
      action = gui_action_from_json(action_obj, screen);
    } catch (const ActionError& e) {
      reply_json(res, 400, {{"error", e.what()}});
      return;
    }
    if (action.is_terminate()) {
      reply_json(res, 400, {{"error", "terminate is not dispatchable"}});
      return;
    }
    if (!display_->available()) {
      reply_json(res, 501, {{"error", "no display available"}});
      return;
    }
    display_->inject(action);
    std::vector<uint8_t> shot = display_->screenshot_png();
    reply_json(res, 200,
               {{"screenshot", base64_encode(std::span<const uint8_t>(shot))}});
  });

  server.Get("/screenshot", [this](const httplib::Request&,
                                   httplib::Response& res) {
    std::vector<uint8_t> shot = display_->screenshot_png();
    res.status = 200;
    res.set_content(reinterpret_cast<const char*>(shot.data()), shot.size(),
                    "image/png");
  });

  server.Post("/reset", [this](const httplib::Request& req,
                               httplib::Response& res) {
    auto body = parse_body(req, res);
    if (!body) return;
    std::string snapshot_id = body->value("snapshot_id", "");
    bool known = snapshot_id == "blank" ||
                 config_.snapshots.contains(snapshot_id);
    if (!known) {
      reply_json(res, 404, {{"error", "unknown snapshot: " + snapshot_id}});
      return;
    }
    Session& session = session_for(body->value("session_id", "default"));
    BusyGuard guard(session.busy);
    if (!guard.acquired()) {
      reply_json(res, 409, {{"error", "session busy"}});
      return;
    }
    std::filesystem::remove_all(session.workdir);
    std::filesystem::create_directories(session.workdir);
    auto it = config_.snapshots.find(snapshot_id);
    if (it != config_.snapshots.end()) {
      for (const auto& [rel_path, content] : it->second) {
        std::filesystem::path dest = session.workdir / rel_path;
        std::filesystem::create_directories(dest.parent_path());
        std::ofstream out(dest, std::ios::trunc);
        out << content;
      }
    }
    reply_json(res, 200, {{"ok", true}});
  });
}

int serve_interp(const InterpServiceConfig& config, const std::string& host,
                 int port) {
  InterpService service(config);
  httplib::Server server;
  service.attach(server);
  if (!server.listen(host, port)) return 1;
  return 0;
}

}  // namespace coact
