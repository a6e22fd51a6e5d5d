#include "coact/actions.hpp"

#include <sstream>

namespace coact {

using nlohmann::json;

namespace {

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace

std::vector<CodeAction> extract_code_blocks(const std::string& model_text) {
  std::vector<CodeAction> actions;
  std::istringstream in(model_text);
  std::string line;
  bool in_block = false;
  bool wanted = false;
  Language lang = Language::python;
  std::string body;

  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::string t = trim(line);
    if (!in_block) {
      if (t.rfind("```", 0) == 0) {
        std::string tag = trim(t.substr(3));
        in_block = true;
        body.clear();
        if (tag == "python") {
          wanted = true;
          lang = Language::python;
        } else if (tag == "bash") {
          wanted = true;
          lang = Language::bash;
        } else {
          wanted = false;
        }
      }
    } else {
      if (t == "```") {
        in_block = false;
        if (wanted) {
          // Drop the trailing newline added per line.
          if (!body.empty() && body.back() == '\n') body.pop_back();
          if (!trim(body).empty()) actions.push_back({lang, body});
        }
      } else {
        body += line;
        body += '\n';
      }
    }
  }
  return actions;
}

const std::vector<std::string>& key_vocabulary() {
  static const std::vector<std::string> vocab = [] {
    std::vector<std::string> v;
    for (char c = 'a'; c <= 'z'; ++c) v.emplace_back(1, c);
    for (char c = '0'; c <= '9'; ++c) v.emplace_back(1, c);
    for (int i = 1; i <= 12; ++i) v.push_back("f" + std::to_string(i));
    for (const char* k : {"ctrl", "alt", "shift", "super", "enter", "esc",
                          "tab", "up", "down", "left", "right", "space",
                          "backspace", "delete"}) {
      v.push_back(k);
    }
    return v;
  }();
  return vocab;
}

bool is_known_key(const std::string& key) {
  const auto& vocab = key_vocabulary();
  return std::find(vocab.begin(), vocab.end(), key) != vocab.end();
}

namespace {

void check_bounds(int x, int y, ScreenSize screen) {
  if (x < 0 || y < 0 || x >= screen.width || y >= screen.height) {
    throw ActionError(ActionErrorKind::out_of_bounds,
                      "coordinates (" + std::to_string(x) + "," +
                          std::to_string(y) + ") outside " +
                          std::to_string(screen.width) + "x" +
                          std::to_string(screen.height));
  }
}

int require_int(const json& obj, const char* field) {
  if (!obj.contains(field) || !obj[field].is_number_integer())
    throw ActionError(ActionErrorKind::malformed,
                      std::string("missing or non-integer field: ") + field);
  return obj[field].get<int>();
}

std::string require_string(const json& obj, const char* field) {
  if (!obj.contains(field) || !obj[field].is_string())
    throw ActionError(ActionErrorKind::malformed,
                      std::string("missing or non-string field: ") + field);
  return obj[field].get<std::string>();
}

// Locates the first balanced {...} object in free text.
std::optional<json> first_json_object(const std::string& text) {
  std::string t = trim(text);
  if (!t.empty() && t.front() == '{') {
    json parsed = json::parse(t, nullptr, false);
    if (!parsed.is_discarded()) return parsed;
  }
  for (size_t start = text.find('{'); start != std::string::npos;
       start = text.find('{', start + 1)) {
    int depth = 0;
    bool in_str = false;
    for (size_t i = start; i < text.size(); ++i) {
      char c = text[i];
      if (in_str) {
        if (c == '\\') {
          ++i;
        } else if (c == '"') {
          in_str = false;
        }
      } else if (c == '"') {
        in_str = true;
      } else if (c == '{') {
        ++depth;
      } else if (c == '}') {
        if (--depth == 0) {
          json parsed =
              json::parse(text.substr(start, i - start + 1), nullptr, false);
          if (!parsed.is_discarded()) return parsed;
          break;
        }
      }
    }
  }
  return std::nullopt;
}

}  // namespace

GuiAction gui_action_from_json(const json& obj, ScreenSize screen) {
  if (!obj.is_object())
    throw ActionError(ActionErrorKind::malformed, "action is not an object");
  std::string type = require_string(obj, "type");
  if (type == "move") {
    int x = require_int(obj, "x"), y = require_int(obj, "y");
    check_bounds(x, y, screen);
    return {MoveMouse{x, y}};
  }
  if (type == "click") {
    int x = require_int(obj, "x"), y = require_int(obj, "y");
    check_bounds(x, y, screen);
    MouseButton button = MouseButton::left;
    if (obj.contains("button")) {
      std::string b = require_string(obj, "button");
      if (b == "left") button = MouseButton::left;
      else if (b == "right") button = MouseButton::right;
      else if (b == "middle") button = MouseButton::middle;
      else
        throw ActionError(ActionErrorKind::malformed, "unknown button: " + b);
    }
    int count = obj.contains("count") ? require_int(obj, "count") : 1;
    if (count != 1 && count != 2)
      throw ActionError(ActionErrorKind::malformed, "click count must be 1|2");
    return {Click{x, y, button, count}};
  }
  if (type == "hotkey") {
    if (!obj.contains("keys") || !obj["keys"].is_array() ||
        obj["keys"].empty())
      throw ActionError(ActionErrorKind::malformed,
                        "hotkey requires non-empty keys array");
    Hotkey hk;
    for (const auto& k : obj["keys"]) {
      if (!k.is_string())
        throw ActionError(ActionErrorKind::malformed, "key must be a string");
      std::string key = k.get<std::string>();
      if (!is_known_key(key))
        throw ActionError(ActionErrorKind::unknown_key,
                          "key outside vocabulary: " + key);
      hk.keys.push_back(std::move(key));
    }
    return {std::move(hk)};
  }
  if (type == "type") {
    return {TypeText{require_string(obj, "text")}};
  }
  if (type == "terminate") {
    std::string message = require_string(obj, "message");
    if (message.empty())
      throw ActionError(ActionErrorKind::malformed,
                        "terminate message must be non-empty");
    return {Terminate{std::move(message)}};
  }
  throw ActionError(ActionErrorKind::malformed, "unknown action type: " + type);
}

GuiAction parse_gui_action(const std::string& model_text, ScreenSize screen) {
  auto obj = first_json_object(model_text);
  if (!obj)
    throw ActionError(ActionErrorKind::malformed,
                      "no action object found in reply");
  return gui_action_from_json(*obj, screen);
}

json gui_action_to_json(const GuiAction& action) {
  json obj;
  std::visit(
      [&](const auto& op) {
        using T = std::decay_t<decltype(op)>;
        if constexpr (std::is_same_v<T, MoveMouse>) {
          obj = {{"type", "move"}, {"x", op.x}, {"y", op.y}};
        } else if constexpr (std::is_same_v<T, Click>) {
          const char* b = op.button == MouseButton::left    ? "left"
                          : op.button == MouseButton::right ? "right"
                                                            : "middle";
          obj = {{"type", "click"}, {"x", op.x},       {"y", op.y},
                 {"button", b},     {"count", op.count}};
        } else if constexpr (std::is_same_v<T, Hotkey>) {
          obj = {{"type", "hotkey"}, {"keys", op.keys}};
        } else if constexpr (std::is_same_v<T, TypeText>) {
          obj = {{"type", "type"}, {"text", op.text}};
        } else if constexpr (std::is_same_v<T, Terminate>) {
          obj = {{"type", "terminate"}, {"message", op.message}};
        }
      },
      action.op);
  return obj;
}

std::string serialize_gui_action(const GuiAction& action) {
  return gui_action_to_json(action).dump();
}

json code_action_to_json(const CodeAction& action) {
  return {{"language", language_name(action.language)},
          {"source", action.source}};
}

CodeAction code_action_from_json(const json& obj) {
  std::string lang = obj.at("language").get<std::string>();
  CodeAction act;
  if (lang == "python") act.language = Language::python;
  else if (lang == "bash") act.language = Language::bash;
  else throw ProtocolError("unknown language: " + lang);
  act.source = obj.at("source").get<std::string>();
  if (act.source.empty()) throw ProtocolError("empty script source");
  return act;
}

json envelope_to_json(const ActionEnvelope& envelope) {
  if (envelope.is_code()) {
    json scripts = json::array();
    for (const auto& act : std::get<std::vector<CodeAction>>(envelope.payload))
      scripts.push_back(code_action_to_json(act));
    return {{"kind", "code"}, {"scripts", scripts}};
  }
  return {{"kind", "gui"},
          {"action", gui_action_to_json(std::get<GuiAction>(envelope.payload))}};
}

ActionEnvelope envelope_from_json(const json& obj) {
  std::string kind = obj.at("kind").get<std::string>();
  if (kind == "code") {
    std::vector<CodeAction> scripts;
    for (const auto& s : obj.at("scripts"))
      scripts.push_back(code_action_from_json(s));
    return {std::move(scripts)};
  }
  if (kind == "gui") {
    // Trace replay does not re-validate against a live screen.
    ScreenSize unbounded{1 << 30, 1 << 30};
    return {gui_action_from_json(obj.at("action"), unbounded)};
  }
  throw ProtocolError("unknown envelope kind: " + kind);
}

}  // namespace coact
