#pragma once

#include "coact/backend.hpp"
#include "coact/env.hpp"
#include "coact/gui_operator.hpp"
#include "coact/programmer.hpp"
#include "coact/trace.hpp"
#include "coact/types.hpp"

namespace coact {

struct TerminateDecision {
  std::string final_answer;
  bool success_claim = false;
};

struct OrchestratorDecision {
  std::variant<SubtaskAssignment, TerminateDecision> choice;

  bool is_terminate() const {
    return std::holds_alternative<TerminateDecision>(choice);
  }
};

enum class TaskOutcome {
  terminated_success_claim,
  terminated_failure_claim,
  budget_exhausted,
  aborted_error,
};

const char* task_outcome_name(TaskOutcome outcome);

struct OrchestratorState {
  Conversation conversation{Role::orchestrator};
  int rounds_used = 0;
};

struct RunOptions {
  ProgrammerOptions programmer;
  GuiOperatorOptions gui;
  RoleConfig orchestrator_config;
};

struct RunResult {
  TaskOutcome outcome = TaskOutcome::aborted_error;
  std::string final_answer;
  int rounds_used = 0;
  long env_interactions = 0;
  std::string error;  // set on aborted_error
};

class UndecodableDecision : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Parses the orchestrator reply. The reply must contain one JSON object:
//   {"action":"assign","worker":"programmer"|"gui_operator",
//    "instruction":..,"env_context":{..},"required_info":..}
// | {"action":"terminate","answer":..,"success":bool}
OrchestratorDecision parse_decision(const std::string& reply);

// One orchestrator round: query the model, retry once on an undecodable
// reply, then fail. Never silently defaults to a worker.
OrchestratorDecision decide_next(OrchestratorState& state, ModelBackend& model,
                                 const RoleConfig& config);

// Appends the worker report (text + screenshot) and counts the round.
void incorporate_report(OrchestratorState& state, const WorkerReport& report);

RunResult run_task(const TaskSpec& task, EnvironmentSession& env,
                   const BackendSet& backends, TraceWriter& trace,
                   const RunOptions& options = {});

}  // namespace coact
