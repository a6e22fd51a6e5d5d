#pragma once

#include "coact/backend.hpp"
#include "coact/env.hpp"
#include "coact/trace.hpp"
#include "coact/types.hpp"

namespace coact {

struct GuiStep {
  int step_index = 0;
  std::string model_reply;
  GuiAction action;
  Observation observation;
};

struct GuiOperatorOptions {
  RoleConfig model_config;
  int max_consecutive_malformed = 2;  // one corrective reprompt, then error
};

// Dispatches one non-terminate action and returns the fresh screenshot.
Observation dispatch_action(const GuiAction& action, EnvironmentSession& env);

WorkerReport run_gui_subtask(const SubtaskAssignment& assignment,
                             EnvironmentSession& env, ModelBackend& model,
                             int max_steps, TraceWriter* trace,
                             int subtask_index,
                             const GuiOperatorOptions& options = {});

}  // namespace coact
