#include "coact/orchestrator.hpp"

#include <sstream>

#include "json.hpp"

namespace coact {

using nlohmann::json;

const char* task_outcome_name(TaskOutcome outcome) {
  switch (outcome) {
    case TaskOutcome::terminated_success_claim: return "terminated_success_claim";
    case TaskOutcome::terminated_failure_claim: return "terminated_failure_claim";
    case TaskOutcome::budget_exhausted: return "budget_exhausted";
    case TaskOutcome::aborted_error: return "aborted_error";
  }
  return "unknown";
}

namespace {

const char* kOrchestratorSystemPrompt =
    "You are the orchestrator of a computer-use system. You cannot touch the "
    "OS yourself. Each round, either assign a subtask to a worker or "
    "terminate, by replying with one JSON object: "
    R"({"action":"assign","worker":"programmer"|"gui_operator",)"
    R"("instruction":"..","env_context":{..},"required_info":".."} or )"
    R"({"action":"terminate","answer":"..","success":true|false}. )"
    "The programmer runs python/bash scripts; the gui_operator clicks and "
    "types. Pass the worker any environment information it needs (open "
    "windows, file paths).";

std::optional<json> find_json_object(const std::string& text) {
  for (size_t start = text.find('{'); start != std::string::npos;
       start = text.find('{', start + 1)) {
    int depth = 0;
    bool in_str = false;
    for (size_t i = start; i < text.size(); ++i) {
      char c = text[i];
      if (in_str) {
        if (c == '\\') ++i;
        else if (c == '"') in_str = false;
      } else if (c == '"') {
        in_str = true;
      } else if (c == '{') {
        ++depth;
      } else if (c == '}' && --depth == 0) {
        json parsed =
            json::parse(text.substr(start, i - start + 1), nullptr, false);
        if (!parsed.is_discarded()) return parsed;
        break;
      }
    }
  }
  return std::nullopt;
}

std::string render_report(const WorkerReport& report) {
  std::ostringstream out;
  out << "[" << worker_name(report.worker) << " report] outcome="
      << outcome_name(report.outcome)
      << ", interactions=" << report.env_interactions_used << "\n"
      << report.summary_or_message;
  return out.str();
}

}  // namespace

OrchestratorDecision parse_decision(const std::string& reply) {
  auto obj = find_json_object(reply);
  if (!obj || !obj->is_object())
    throw UndecodableDecision("no decision object in reply");
  std::string action = obj->value("action", "");
  if (action == "terminate") {
    TerminateDecision term;
    term.final_answer = obj->value("answer", "");
    term.success_claim = obj->value("success", false);
    return {std::move(term)};
  }
  if (action == "assign") {
    SubtaskAssignment assignment;
    if (!obj->contains("worker") || !(*obj)["worker"].is_string())
      throw UndecodableDecision("assign without worker");
    try {
      assignment.worker = worker_from_name((*obj)["worker"].get<std::string>());
    } catch (const ProtocolError& e) {
      throw UndecodableDecision(e.what());
    }
    assignment.instruction = obj->value("instruction", "");
    if (assignment.instruction.empty())
      throw UndecodableDecision("assign without instruction");
    if (obj->contains("env_context") && (*obj)["env_context"].is_object()) {
      for (const auto& [key, value] : (*obj)["env_context"].items())
        assignment.env_context[key] =
            value.is_string() ? value.get<std::string>() : value.dump();
    }
    if (obj->contains("required_info") && (*obj)["required_info"].is_string())
      assignment.required_info = (*obj)["required_info"].get<std::string>();
    return {std::move(assignment)};
  }
  throw UndecodableDecision("unknown action: " + action);
}

OrchestratorDecision decide_next(OrchestratorState& state, ModelBackend& model,
                                 const RoleConfig& config) {
  for (int attempt = 0; attempt < 2; ++attempt) {
    std::string reply = model.chat(state.conversation, config);
    state.conversation.append_text(Role::orchestrator, reply);
    try {
      return parse_decision(reply);
    } catch (const UndecodableDecision& e) {
      if (attempt == 1) throw;
      state.conversation.append_text(
          Role::system, std::string("Your reply could not be decoded (") +
                            e.what() +
                            "). Reply with exactly one valid decision object.");
    }
  }
  throw UndecodableDecision("unreachable");
}

void incorporate_report(OrchestratorState& state, const WorkerReport& report) {
  state.conversation.append_with_image(
      report.worker == WorkerKind::programmer ? Role::coding_agent
                                              : Role::gui_agent,
      render_report(report), report.final_screenshot);
  state.rounds_used += 1;
}

RunResult run_task(const TaskSpec& task, EnvironmentSession& env,
                   const BackendSet& backends, TraceWriter& trace,
                   const RunOptions& options) {
  task.validate();
  backends.validate();
  RunResult result;

  OrchestratorState state;
  state.conversation.append_text(Role::system, kOrchestratorSystemPrompt);

  Observation initial;
  try {
    initial = env.capture_screenshot();
  } catch (const EnvError& e) {
    result.outcome = TaskOutcome::aborted_error;
    result.error = std::string("initial screenshot failed: ") + e.what();
    return result;
  }
  {
    std::ostringstream seed;
    seed << "Task: " << task.instruction << "\n";
    for (const auto& [key, value] : task.env_context)
      seed << "  - " << key << ": " << value << "\n";
    state.conversation.append_with_image(Role::system, seed.str(),
                                         initial.screenshot_png);
  }

  const Budgets& budgets = task.budgets;
  const long bound = interaction_bound(budgets);

  while (state.rounds_used < budgets.orchestrator_max_rounds) {
    OrchestratorDecision decision;
    try {
      decision = decide_next(state, *backends.orchestrator,
                             options.orchestrator_config);
    } catch (const UndecodableDecision& e) {
      result.outcome = TaskOutcome::aborted_error;
      result.error = std::string("undecodable decision: ") + e.what();
      result.rounds_used = state.rounds_used;
      result.env_interactions = trace.steps_written();
      return result;
    } catch (const BackendError& e) {
      result.outcome = TaskOutcome::aborted_error;
      result.error = std::string("orchestrator backend: ") + e.what();
      result.rounds_used = state.rounds_used;
      result.env_interactions = trace.steps_written();
      return result;
    }

    if (decision.is_terminate()) {
      const auto& term = std::get<TerminateDecision>(decision.choice);
      result.outcome = term.success_claim
                           ? TaskOutcome::terminated_success_claim
                           : TaskOutcome::terminated_failure_claim;
      result.final_answer = term.final_answer;
      result.rounds_used = state.rounds_used;
      result.env_interactions = trace.steps_written();
      return result;
    }

    const auto& assignment = std::get<SubtaskAssignment>(decision.choice);
    const int subtask_index = state.rounds_used + 1;

    // Hard interaction cap: shrink the worker budget to remaining capacity.
    long remaining = bound - trace.steps_written();
    WorkerReport report;
    if (assignment.worker == WorkerKind::programmer) {
      int budget = int(std::min<long>(budgets.programmer_max_rounds, remaining));
      report = run_programmer_subtask(assignment, env, *backends.programmer,
                                      *backends.summarizer, budget, &trace,
                                      subtask_index, options.programmer);
    } else {
      int budget = int(std::min<long>(budgets.gui_max_steps, remaining));
      report = run_gui_subtask(assignment, env, *backends.gui, budget, &trace,
                               subtask_index, options.gui);
    }

    if (report.env_unreachable) {
      result.outcome = TaskOutcome::aborted_error;
      result.error = report.summary_or_message;
      result.rounds_used = state.rounds_used;
      result.env_interactions = trace.steps_written();
      return result;
    }

    incorporate_report(state, report);
  }

  result.outcome = TaskOutcome::budget_exhausted;
  result.rounds_used = state.rounds_used;
  result.env_interactions = trace.steps_written();
  return result;
}

}  // namespace coact
