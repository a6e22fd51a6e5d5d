#pragma once

#include <string>
#include <vector>

#include "json.hpp"

#include "coact/types.hpp"

namespace coact {

enum class ActionErrorKind { malformed, out_of_bounds, unknown_key };

class ActionError : public std::runtime_error {
 public:
  ActionError(ActionErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ActionErrorKind kind() const { return kind_; }

 private:
  ActionErrorKind kind_;
};

// Every fenced block tagged `python` or `bash`, in document order. Blocks
// with other tags, no tag, or empty bodies are skipped.
std::vector<CodeAction> extract_code_blocks(const std::string& model_text);

bool is_known_key(const std::string& key);
const std::vector<std::string>& key_vocabulary();

// Parses one GUI action from a model reply. The reply may be the bare JSON
// object or contain it inside surrounding text / a fenced block; the first
// balanced object wins. Coordinates are validated against `screen`.
GuiAction parse_gui_action(const std::string& model_text, ScreenSize screen);

nlohmann::json gui_action_to_json(const GuiAction& action);
GuiAction gui_action_from_json(const nlohmann::json& obj, ScreenSize screen);

std::string serialize_gui_action(const GuiAction& action);

nlohmann::json code_action_to_json(const CodeAction& action);
CodeAction code_action_from_json(const nlohmann::json& obj);

nlohmann::json envelope_to_json(const ActionEnvelope& envelope);
ActionEnvelope envelope_from_json(const nlohmann::json& obj);

}  // namespace coact
