#include "coact/sim_desktop.hpp"

#include <sstream>

#include "json.hpp"

#include "coact/util.hpp"

namespace coact {

using nlohmann::json;

namespace {

constexpr int kGlyphW = 6;
constexpr int kGlyphH = 10;
constexpr int kTitleBarH = 14;

// Fixed-width pseudo-glyph: a 5x8 bit pattern derived from the character
// code. Distinct characters render distinctly; rendering stays a pure
// function of the text.
void draw_glyph(Raster& img, char c, int x, int y, uint8_t r, uint8_t g,
                uint8_t b) {
  uint64_t h = (uint64_t(uint8_t(c)) + 1) * 0x9E3779B97F4A7C15ULL;
  for (int gy = 0; gy < 8; ++gy) {
    for (int gx = 0; gx < 5; ++gx) {
      if ((h >> ((gy * 5 + gx) % 64)) & 1)
        img.set_pixel(x + gx, y + gy + 1, r, g, b);
    }
  }
}

void draw_text(Raster& img, const std::string& text, int x, int y,
               int max_width, uint8_t r, uint8_t g, uint8_t b) {
  int cx = x, cy = y;
  for (char c : text) {
    if (c == '\n' || cx + kGlyphW > x + max_width) {
      cx = x;
      cy += kGlyphH;
      if (c == '\n') continue;
    }
    draw_glyph(img, c, cx, cy, r, g, b);
    cx += kGlyphW;
  }
}

std::string parent_dir(const std::string& path) {
  size_t pos = path.find_last_of('/');
  if (pos == std::string::npos || pos == 0) return "/";
  return path.substr(0, pos);
}

// Splits "cmd arg rest of line" into at most `max_parts` pieces.
std::vector<std::string> split_words(const std::string& line, int max_parts) {
  std::vector<std::string> parts;
  size_t i = 0;
  while (i < line.size() && int(parts.size()) < max_parts - 1) {
    while (i < line.size() && line[i] == ' ') ++i;
    if (i >= line.size()) break;
    size_t j = line.find(' ', i);
    if (j == std::string::npos) j = line.size();
    parts.push_back(line.substr(i, j - i));
    i = j;
  }
  while (i < line.size() && line[i] == ' ') ++i;
  if (i < line.size()) parts.push_back(line.substr(i));
  return parts;
}

std::string unescape(const std::string& s) {
  std::string out;
  for (size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '\\' && i + 1 < s.size()) {
      char n = s[i + 1];
      if (n == 'n') { out += '\n'; ++i; continue; }
      if (n == 't') { out += '\t'; ++i; continue; }
      if (n == '\\') { out += '\\'; ++i; continue; }
    }
    out += s[i];
  }
  return out;
}

SimWindow* focused_window(SimDesktopState& state) {
  for (auto& w : state.windows)
    if (w.focused) return &w;
  return nullptr;
}

void focus_window(SimDesktopState& state, size_t index) {
  for (size_t i = 0; i < state.windows.size(); ++i)
    state.windows[i].focused = (i == index);
}

SimWindow make_editor_window(const std::string& file_path) {
  SimWindow win;
  win.title = "Editor";
  win.x = 40;
  win.y = 40;
  win.w = 480;
  win.h = 320;
  win.file_path = file_path;
  win.saved = true;
  win.widgets.push_back({"save_btn", "Save", 44, 60, 60, 20, "save"});
  return win;
}

SimWindow make_files_window() {
  SimWindow win;
  win.title = "Files";
  win.x = 120;
  win.y = 80;
  win.w = 400;
  win.h = 280;
  win.widgets.push_back(
      {"open_editor", "Open Editor", 124, 100, 90, 20,
       "open_window:Editor"});
  return win;
}

}  // namespace

SimDesktopState SimDesktopSession::snapshot(const std::string& id,
                                            uint64_t seed) {
  SimDesktopState state;
  state.rng_seed = seed;
  state.dirs = {"/", "/tmp", "/home", "/home/user"};
  if (id == "blank") {
    state.dirs = {"/"};
    return state;
  }
  if (id == "base") {
    return state;
  }
  if (id == "editor_open") {
    auto win = make_editor_window("/home/user/document.txt");
    win.focused = true;
    state.windows.push_back(std::move(win));
    return state;
  }
  if (id == "desktop") {
    SimWindow launcher;
    launcher.title = "Launcher";
    launcher.focused = true;
    launcher.x = 8;
    launcher.y = 8;
    launcher.w = 160;
    launcher.h = 200;
    launcher.widgets.push_back(
        {"launch_editor", "Editor", 12, 30, 80, 20, "open_window:Editor"});
    launcher.widgets.push_back(
        {"launch_files", "Files", 12, 56, 80, 20, "open_window:Files"});
    state.windows.push_back(std::move(launcher));
    return state;
  }
  if (id == "files_open") {
    auto win = make_files_window();
    win.focused = true;
    state.windows.push_back(std::move(win));
    return state;
  }
  throw EnvError(EnvErrorKind::unknown_snapshot, "unknown snapshot: " + id);
}

std::vector<std::string> SimDesktopSession::snapshot_names() {
  return {"blank", "base", "editor_open", "desktop", "files_open"};
}

SimDesktopSession::SimDesktopSession(const std::string& snapshot_id,
                                     ScreenSize screen, uint64_t seed)
    : screen_(screen), seed_(seed), state_(snapshot(snapshot_id, seed)) {
  session_id_ = "sim-" + snapshot_id + "-" + std::to_string(seed);
}

void SimDesktopSession::reset(const std::string& snapshot_id) {
  state_ = snapshot(snapshot_id, seed_);
}

ExecResult run_sim_script(SimDesktopState& state, const std::string& source) {
  ExecResult result;
  std::string out, err;
  std::istringstream in(source);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::string stripped = line;
    size_t first = stripped.find_first_not_of(" \t");
    if (first == std::string::npos) continue;
    stripped = stripped.substr(first);
    if (stripped[0] == '#') continue;

    auto parts = split_words(stripped, 3);
    const std::string& cmd = parts[0];
    if (cmd == "echo") {
      if (parts.size() > 1) {
        out += parts[1];
        if (parts.size() > 2) out += " " + parts[2];
      }
      out += '\n';
    } else if (cmd == "write_file") {
      if (parts.size() < 2) {
        err += "write_file: missing path\n";
        result.exit_code = 1;
        break;
      }
      state.files[parts[1]] = parts.size() > 2 ? unescape(parts[2]) : "";
      state.dirs.insert(parent_dir(parts[1]));
    } else if (cmd == "read_file") {
      auto it = parts.size() > 1 ? state.files.find(parts[1])
                                 : state.files.end();
      if (it == state.files.end()) {
        err += "read_file: no such file: " +
               (parts.size() > 1 ? parts[1] : "") + "\n";
        result.exit_code = 1;
        break;
      }
      out += it->second;
    } else if (cmd == "list_dir") {
      std::string dir = parts.size() > 1 ? parts[1] : "/";
      if (!state.dirs.contains(dir)) {
        err += "list_dir: no such directory: " + dir + "\n";
        result.exit_code = 1;
        break;
      }
      for (const auto& [path, _] : state.files) {
        if (parent_dir(path) == dir)
          out += path.substr(path.find_last_of('/') + 1) + "\n";
      }
      for (const auto& d : state.dirs) {
        if (d != dir && parent_dir(d) == dir)
          out += d.substr(d.find_last_of('/') + 1) + "/\n";
      }
    } else if (cmd == "mkdir") {
      if (parts.size() < 2) {
        err += "mkdir: missing path\n";
        result.exit_code = 1;
        break;
      }
      state.dirs.insert(parts[1]);
    } else if (cmd == "rm") {
      if (parts.size() < 2 || state.files.erase(parts[1]) == 0) {
        err += "rm: no such file: " + (parts.size() > 1 ? parts[1] : "") +
               "\n";
        result.exit_code = 1;
        break;
      }
    } else {
      err += "sim: unsupported command: " + cmd +
             " (sim scripts accept only the effect-command subset)\n";
      result.exit_code = 127;
      break;
    }
  }
  result.stdout_text = std::move(out);
  result.stderr_text = std::move(err);
  result.stdout_truncated = truncate_output(result.stdout_text, kOutputCapBytes);
  result.stderr_truncated = truncate_output(result.stderr_text, kOutputCapBytes);
  return result;
}

std::pair<ExecResult, Observation> SimDesktopSession::execute_script(
    const CodeAction& action, double /*timeout_s*/) {
  ExecResult result = run_sim_script(state_, action.source);
  Observation obs = observe();
  return {std::move(result), std::move(obs)};
}

Observation SimDesktopSession::perform_action(const GuiAction& action) {
  std::visit(
      [&](const auto& op) {
        using T = std::decay_t<decltype(op)>;
        if constexpr (std::is_same_v<T, MoveMouse>) {
          state_.cursor_x = op.x;
          state_.cursor_y = op.y;
        } else if constexpr (std::is_same_v<T, Click>) {
          state_.cursor_x = op.x;
          state_.cursor_y = op.y;
          // Topmost window containing the point gains focus; then a widget
          // hit applies its effect.
          for (size_t i = state_.windows.size(); i-- > 0;) {
            auto& win = state_.windows[i];
            if (op.x >= win.x && op.x < win.x + win.w && op.y >= win.y &&
                op.y < win.y + win.h) {
              focus_window(state_, i);
              for (const auto& widget : win.widgets) {
                if (op.x >= widget.x && op.x < widget.x + widget.w &&
                    op.y >= widget.y && op.y < widget.y + widget.h) {
                  apply_widget_effect_(widget.effect);
                  break;
                }
              }
              break;
            }
          }
        } else if constexpr (std::is_same_v<T, Hotkey>) {
          if (op.keys.size() == 2 && op.keys[0] == "ctrl" &&
              op.keys[1] == "s") {
            if (auto* win = focused_window(state_)) {
              win->saved = true;
              if (!win->file_path.empty()) {
                state_.files[win->file_path] = win->buffer;
                state_.dirs.insert(parent_dir(win->file_path));
              }
            }
          }
          // Other hotkeys are absorbed without effect.
        } else if constexpr (std::is_same_v<T, TypeText>) {
          if (auto* win = focused_window(state_)) {
            win->buffer += op.text;
            win->saved = false;
          }
        } else if constexpr (std::is_same_v<T, Terminate>) {
          throw EnvError(EnvErrorKind::bad_action,
                         "terminate is not dispatchable");
        }
      },
      action.op);
  return observe();
}

void SimDesktopSession::apply_widget_effect_(const std::string& effect) {
  if (effect == "noop" || effect.empty()) return;
  if (effect == "save") {
    if (auto* win = focused_window(state_)) {
      win->saved = true;
      if (!win->file_path.empty()) {
        state_.files[win->file_path] = win->buffer;
        state_.dirs.insert(parent_dir(win->file_path));
      }
    }
    return;
  }
  if (effect == "close_window") {
    for (size_t i = 0; i < state_.windows.size(); ++i) {
      if (state_.windows[i].focused) {
        state_.windows.erase(state_.windows.begin() + long(i));
        break;
      }
    }
    if (!state_.windows.empty()) focus_window(state_, state_.windows.size() - 1);
    return;
  }
  if (effect.rfind("open_window:", 0) == 0) {
    std::string title = effect.substr(12);
    SimWindow win;
    if (title == "Editor") win = make_editor_window("/home/user/document.txt");
    else if (title == "Files") win = make_files_window();
    else {
      win.title = title;
      win.x = 60;
      win.y = 60;
      win.w = 320;
      win.h = 240;
    }
    state_.windows.push_back(std::move(win));
    focus_window(state_, state_.windows.size() - 1);
    return;
  }
  if (effect.rfind("append_text:", 0) == 0) {
    if (auto* win = focused_window(state_)) {
      win->buffer += effect.substr(12);
      win->saved = false;
    }
    return;
  }
}

Observation SimDesktopSession::observe() {
  Observation obs;
  Raster img = render_sim_state(state_, screen_);
  obs.screenshot_png = encode_png(img);
  obs.width = screen_.width;
  obs.height = screen_.height;
  obs.text = sim_state_digest(state_);
  obs.captured_at = monotonic_seconds();
  return obs;
}

Observation SimDesktopSession::capture_screenshot() { return observe(); }

Raster render_sim_state(const SimDesktopState& state, ScreenSize screen) {
  Raster img = Raster::filled(screen.width, screen.height, 30, 60, 90);
  for (const auto& win : state.windows) {
    img.fill_rect(win.x, win.y, win.w, win.h, 220, 220, 220);
    if (win.focused)
      img.fill_rect(win.x, win.y, win.w, kTitleBarH, 70, 70, 160);
    else
      img.fill_rect(win.x, win.y, win.w, kTitleBarH, 120, 120, 120);
    draw_text(img, win.title, win.x + 3, win.y + 2, win.w - 6, 255, 255, 255);
    draw_text(img, win.buffer, win.x + 4, win.y + kTitleBarH + 26,
              win.w - 8, 10, 10, 10);
    if (!win.saved)
      img.fill_rect(win.x + win.w - 8, win.y + 3, 6, 6, 200, 40, 40);
    for (const auto& widget : win.widgets) {
      img.fill_rect(widget.x, widget.y, widget.w, widget.h, 180, 180, 120);
      draw_text(img, widget.label, widget.x + 2, widget.y + 4, widget.w - 4,
                20, 20, 20);
    }
  }
  img.fill_rect(state.cursor_x - 1, state.cursor_y - 1, 3, 3, 255, 0, 0);
  return img;
}

std::string sim_state_digest(const SimDesktopState& state) {
  json windows = json::array();
  for (const auto& win : state.windows) {
    windows.push_back({{"title", win.title},
                       {"focused", win.focused},
                       {"buffer", win.buffer},
                       {"saved", win.saved}});
  }
  json files = json::object();
  for (const auto& [path, content] : state.files)
    files[path] = content.substr(0, 64);
  return json{{"windows", windows},
              {"cursor", {state.cursor_x, state.cursor_y}},
              {"files", files}}
      .dump();
}

}  // namespace coact
