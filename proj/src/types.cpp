#include "coact/types.hpp"

#include <algorithm>

#include "coact/util.hpp"

namespace coact {

const char* role_name(Role role) {
  switch (role) {
    case Role::system: return "system";
    case Role::orchestrator: return "orchestrator";
    case Role::coding_agent: return "coding_agent";
    case Role::code_interpreter: return "code_interpreter";
    case Role::gui_agent: return "gui_agent";
    case Role::gui_interpreter: return "gui_interpreter";
    case Role::summarizer: return "summarizer";
  }
  return "unknown";
}

Role role_from_name(const std::string& name) {
  for (Role r : {Role::system, Role::orchestrator, Role::coding_agent,
                 Role::code_interpreter, Role::gui_agent,
                 Role::gui_interpreter, Role::summarizer}) {
    if (name == role_name(r)) return r;
  }
  throw ProtocolError("unknown role: " + name);
}

const char* worker_name(WorkerKind worker) {
  return worker == WorkerKind::programmer ? "programmer" : "gui_operator";
}

WorkerKind worker_from_name(const std::string& name) {
  if (name == "programmer") return WorkerKind::programmer;
  if (name == "gui_operator") return WorkerKind::gui_operator;
  throw ProtocolError("unknown worker: " + name);
}

const char* language_name(Language lang) {
  return lang == Language::python ? "python" : "bash";
}

const char* outcome_name(SubtaskOutcome outcome) {
  switch (outcome) {
    case SubtaskOutcome::completed: return "completed";
    case SubtaskOutcome::budget_exhausted: return "budget_exhausted";
    case SubtaskOutcome::error: return "error";
  }
  return "unknown";
}

void Budgets::validate() const {
  if (programmer_max_rounds < 1 || gui_max_steps < 1 ||
      orchestrator_max_rounds < 1) {
    throw ProtocolError("budgets must all be >= 1");
  }
}

long interaction_bound(const Budgets& budgets) {
  budgets.validate();
  return long(budgets.orchestrator_max_rounds) *
         std::max(budgets.programmer_max_rounds, budgets.gui_max_steps);
}

void TaskSpec::validate() const {
  if (id.empty()) throw ProtocolError("task id must be non-empty");
  if (instruction.empty())
    throw ProtocolError("task instruction must be non-empty");
  budgets.validate();
}

void Conversation::append(Message msg) {
  if (msg.parts.empty())
    throw ProtocolError("message must have at least one part");
  for (const auto& part : msg.parts) {
    if (const auto* ref = std::get_if<ImageRef>(&part)) {
      if (!attachments_.contains(ref->digest))
        throw ProtocolError("dangling image reference: " + ref->digest);
    }
  }
  messages_.push_back(std::move(msg));
}

void Conversation::append_text(Role role, std::string text) {
  Message msg;
  msg.role = role;
  msg.parts.emplace_back(std::move(text));
  append(std::move(msg));
}

ImageRef Conversation::append_with_image(Role role, std::string text,
                                         std::vector<uint8_t> png) {
  ImageRef ref = attach(std::move(png));
  Message msg;
  msg.role = role;
  msg.parts.emplace_back(std::move(text));
  msg.parts.emplace_back(ref);
  append(std::move(msg));
  return ref;
}

ImageRef Conversation::attach(std::vector<uint8_t> png) {
  std::string digest = md5_hex(std::span<const uint8_t>(png));
  attachments_.emplace(digest, std::move(png));
  return ImageRef{digest};
}

const std::vector<uint8_t>& Conversation::image(const ImageRef& ref) const {
  auto it = attachments_.find(ref.digest);
  if (it == attachments_.end())
    throw ProtocolError("unknown attachment: " + ref.digest);
  return it->second;
}

bool Conversation::has_image(const std::string& digest) const {
  return attachments_.contains(digest);
}

void Conversation::clear() {
  messages_.clear();
  attachments_.clear();
}

}  // namespace coact
