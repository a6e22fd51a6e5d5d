#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace coact {

struct EvaluatorExpr;

enum class Role {
  system,
  orchestrator,
  coding_agent,
  code_interpreter,
  gui_agent,
  gui_interpreter,
  summarizer,
};

const char* role_name(Role role);
Role role_from_name(const std::string& name);

enum class WorkerKind { programmer, gui_operator };

const char* worker_name(WorkerKind worker);
WorkerKind worker_from_name(const std::string& name);

// Round/step budgets. I = programmer rounds per subtask, K = GUI steps per
// subtask, J = orchestrator rounds per task.
struct Budgets {
  int programmer_max_rounds = 20;
  int gui_max_steps = 25;
  int orchestrator_max_rounds = 15;

  void validate() const;
};

// Worst case: every orchestrator round dispatches the costlier worker.
long interaction_bound(const Budgets& budgets);

struct ScreenSize {
  int width = 0;
  int height = 0;
};

struct Observation {
  std::vector<uint8_t> screenshot_png;
  int width = 0;
  int height = 0;
  std::optional<std::string> text;
  double captured_at = 0.0;
};

// --- GUI action taxonomy ---

enum class MouseButton { left, right, middle };

struct MoveMouse {
  int x = 0, y = 0;
};
struct Click {
  int x = 0, y = 0;
  MouseButton button = MouseButton::left;
  int count = 1;
};
struct Hotkey {
  std::vector<std::string> keys;
};
struct TypeText {
  std::string text;
};
struct Terminate {
  std::string message;
};

struct GuiAction {
  std::variant<MoveMouse, Click, Hotkey, TypeText, Terminate> op;

  bool is_terminate() const {
    return std::holds_alternative<Terminate>(op);
  }
};

enum class Language { python, bash };

const char* language_name(Language lang);

struct CodeAction {
  Language language = Language::python;
  std::string source;
};

// Exit code reported when a script hit its timeout (coreutils convention).
inline constexpr int kTimeoutExitCode = 124;

struct ExecResult {
  int exit_code = 0;
  std::string stdout_text;
  std::string stderr_text;
  bool stdout_truncated = false;
  bool stderr_truncated = false;
  bool timed_out = false;
  double duration_s = 0.0;
};

struct SubtaskAssignment {
  WorkerKind worker = WorkerKind::programmer;
  std::string instruction;
  std::map<std::string, std::string> env_context;
  std::optional<std::string> required_info;
};

enum class SubtaskOutcome { completed, budget_exhausted, error };

const char* outcome_name(SubtaskOutcome outcome);

struct WorkerReport {
  WorkerKind worker = WorkerKind::programmer;
  std::string summary_or_message;
  std::vector<uint8_t> final_screenshot;
  int env_interactions_used = 0;
  SubtaskOutcome outcome = SubtaskOutcome::completed;
  // Set when the summarizer failed and a deterministic digest was used.
  bool summary_is_fallback = false;
  // Set when the subtask died on a transport/session failure; the task run
  // aborts instead of continuing to the next round.
  bool env_unreachable = false;
};

// One environment interaction: a GUI action, or one programmer round's
// script batch (several fenced blocks in one reply execute as one round).
struct ActionEnvelope {
  std::variant<std::vector<CodeAction>, GuiAction> payload;

  bool is_code() const {
    return std::holds_alternative<std::vector<CodeAction>>(payload);
  }
};

struct ObservationDigest {
  std::string digest;        // md5 of the screenshot bytes
  std::string text_excerpt;  // first bytes of the observation text, if any
};

struct StepRecord {
  long seq = 0;  // 1-based, strictly increasing within a trace
  Role actor = Role::orchestrator;
  ActionEnvelope action;
  ObservationDigest observation;
  int subtask_index = 0;  // 1-based orchestrator round
  double wall_time = 0.0;
};

struct TaskSpec {
  std::string id;
  std::string instruction;
  std::map<std::string, std::string> env_context;
  Budgets budgets;
  std::shared_ptr<const EvaluatorExpr> evaluator;  // optional
  std::string domain = "misc";

  void validate() const;
};

// --- Conversation model ---

struct ImageRef {
  std::string digest;
};

struct Message {
  Role role = Role::system;
  std::vector<std::variant<std::string, ImageRef>> parts;
};

// Per-agent memory: an append-only message list plus a content-addressed
// image store. Cleared only at subtask boundaries.
class Conversation {
 public:
  explicit Conversation(Role owner) : owner_(owner) {}

  Role owner() const { return owner_; }
  const std::vector<Message>& messages() const { return messages_; }
  bool empty() const { return messages_.empty(); }
  size_t size() const { return messages_.size(); }

  void append(Message msg);
  void append_text(Role role, std::string text);
  // Stores the image and appends a message holding text + the image.
  ImageRef append_with_image(Role role, std::string text,
                             std::vector<uint8_t> png);

  ImageRef attach(std::vector<uint8_t> png);
  const std::vector<uint8_t>& image(const ImageRef& ref) const;
  bool has_image(const std::string& digest) const;

  void clear();

 private:
  Role owner_;
  std::vector<Message> messages_;
  std::map<std::string, std::vector<uint8_t>> attachments_;
};

class ProtocolError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace coact
