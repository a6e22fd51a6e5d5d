#include "coact/gui_operator.hpp"

#include <deque>
#include <sstream>

#include "coact/actions.hpp"

namespace coact {

namespace {

const char* kGuiSystemPrompt =
    "You are a GUI agent. Each turn you see the latest screenshot and reply "
    "with exactly one action as a JSON object: "
    R"({"type":"move","x":..,"y":..} | )"
    R"({"type":"click","x":..,"y":..,"button":"left|right|middle","count":1|2} | )"
    R"({"type":"hotkey","keys":[..]} | {"type":"type","text":".."} | )"
    R"({"type":"terminate","message":".."}. )"
    "Terminate when done; put any information you were asked to collect in "
    "the terminate message.";

std::string render_seed(const SubtaskAssignment& assignment) {
  std::ostringstream out;
  out << "Subtask: " << assignment.instruction << "\n";
  if (!assignment.env_context.empty()) {
    out << "Environment context:\n";
    for (const auto& [key, value] : assignment.env_context)
      out << "  - " << key << ": " << value << "\n";
  }
  if (assignment.required_info)
    out << "Collect and report: " << *assignment.required_info << "\n";
  return out.str();
}

std::string synthesize_budget_summary(const std::deque<GuiAction>& recent,
                                      int steps) {
  std::ostringstream out;
  out << "GUI step budget exhausted after " << steps
      << " actions. Last actions:";
  for (const auto& action : recent) out << " " << serialize_gui_action(action);
  return out.str();
}

}  // namespace

Observation dispatch_action(const GuiAction& action, EnvironmentSession& env) {
  if (action.is_terminate())
    throw ProtocolError("terminate actions are not dispatched");
  return env.perform_action(action);
}

WorkerReport run_gui_subtask(const SubtaskAssignment& assignment,
                             EnvironmentSession& env, ModelBackend& model,
                             int max_steps, TraceWriter* trace,
                             int subtask_index,
                             const GuiOperatorOptions& options) {
  if (assignment.worker != WorkerKind::gui_operator)
    throw ProtocolError("assignment is not for the gui operator");

  WorkerReport report;
  report.worker = WorkerKind::gui_operator;

  Conversation conv(Role::gui_agent);  // fresh per subtask
  conv.append_text(Role::system, kGuiSystemPrompt);

  Observation latest;
  try {
    latest = env.capture_screenshot();
  } catch (const EnvError&) {
    report.outcome = SubtaskOutcome::error;
    report.env_unreachable = true;
    report.summary_or_message = "[error] environment unreachable at start";
    return report;
  }
  conv.append_with_image(Role::orchestrator, render_seed(assignment),
                         latest.screenshot_png);

  int steps = 0;
  int malformed_streak = 0;
  std::deque<GuiAction> recent;
  bool terminated = false;
  bool errored = false;
  std::string error_note;

  while (steps < max_steps) {
    std::string reply;
    try {
      reply = model.chat(conv, options.model_config);
    } catch (const BackendError& e) {
      errored = true;
      error_note = std::string("backend error: ") + e.what();
      break;
    }
    conv.append_text(Role::gui_agent, reply);

    GuiAction action;
    try {
      action = parse_gui_action(reply, env.screen());
    } catch (const ActionError& e) {
      if (++malformed_streak >= options.max_consecutive_malformed) {
        errored = true;
        error_note = std::string("malformed action twice: ") + e.what();
        break;
      }
      conv.append_text(Role::gui_interpreter,
                       std::string("Could not interpret your action (") +
                           e.what() + "). Reply with one valid JSON action.");
      continue;
    }
    malformed_streak = 0;

    if (action.is_terminate()) {
      report.summary_or_message =
          std::get<Terminate>(action.op).message;  // verbatim
      terminated = true;
      break;
    }

    Observation obs;
    try {
      obs = dispatch_action(action, env);
    } catch (const EnvError& e) {
      errored = true;
      if (e.kind() == EnvErrorKind::transport ||
          e.kind() == EnvErrorKind::session_expired) {
        report.env_unreachable = true;
      }
      error_note = std::string("environment error: ") + e.what();
      break;
    }
    ++steps;
    latest = obs;
    if (trace)
      trace->record(Role::gui_agent, ActionEnvelope{action}, obs,
                    subtask_index);

    recent.push_back(action);
    if (recent.size() > 3) recent.pop_front();

    conv.append_with_image(Role::gui_interpreter,
                           obs.text.value_or("screenshot"),
                           latest.screenshot_png);
  }

  report.env_interactions_used = steps;
  if (terminated) {
    report.outcome = SubtaskOutcome::completed;
  } else if (errored) {
    report.outcome = SubtaskOutcome::error;
    report.summary_or_message = "[error] " + error_note;
  } else {
    report.outcome = SubtaskOutcome::budget_exhausted;
    report.summary_or_message = synthesize_budget_summary(recent, steps);
  }
  report.final_screenshot = latest.screenshot_png;
  return report;
}

}  // namespace coact
