#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "coact/env.hpp"
#include "coact/png.hpp"

namespace coact {

// Widget effects are small command strings:
//   open_window:<title>   append_text:<text>   save   close_window   noop
struct SimWidget {
  std::string id;
  std::string label;
  int x = 0, y = 0, w = 0, h = 0;
  std::string effect = "noop";
};

struct SimWindow {
  std::string title;
  bool focused = false;
  std::string buffer;
  bool saved = true;
  std::string file_path;  // buffer is written here on save; empty = none
  int x = 0, y = 0, w = 0, h = 0;
  std::vector<SimWidget> widgets;
};

struct SimDesktopState {
  std::map<std::string, std::string> files;  // path -> contents
  std::set<std::string> dirs;
  std::vector<SimWindow> windows;
  int cursor_x = 0, cursor_y = 0;
  std::string clipboard;
  uint64_t rng_seed = 0;
};

// Deterministic raster of the state: pure function, identical state yields
// identical bytes.
Raster render_sim_state(const SimDesktopState& state, ScreenSize screen);

// Compact machine-readable digest of the state (sim-only observation text).
std::string sim_state_digest(const SimDesktopState& state);

// Hermetic in-process desktop. Scripts are interpreted against the virtual
// filesystem via an effect-command subset (write_file, read_file, list_dir,
// mkdir, rm, echo); anything else fails with a distinctive error.
class SimDesktopSession : public EnvironmentSession {
 public:
  explicit SimDesktopSession(const std::string& snapshot_id = "blank",
                             ScreenSize screen = {1920, 1080},
                             uint64_t seed = 0);

  std::string session_id() const override { return session_id_; }
  ScreenSize screen() const override { return screen_; }
  ScriptDialect script_dialect() const override {
    return ScriptDialect::sim_effects;
  }

  std::pair<ExecResult, Observation> execute_script(const CodeAction& action,
                                                    double timeout_s) override;
  Observation perform_action(const GuiAction& action) override;
  Observation capture_screenshot() override;
  void reset(const std::string& snapshot_id) override;

  const SimDesktopState& state() const { return state_; }
  SimDesktopState& mutable_state() { return state_; }

  static std::vector<std::string> snapshot_names();
  static SimDesktopState snapshot(const std::string& id, uint64_t seed);

 private:
  Observation observe();
  void apply_widget_effect_(const std::string& effect);

  std::string session_id_;
  ScreenSize screen_;
  uint64_t seed_;
  SimDesktopState state_;
};

// Runs one effect-command script against a state. Exposed for the
// interp-service-free evaluator path and for tests.
ExecResult run_sim_script(SimDesktopState& state, const std::string& source);

}  // namespace coact
