#pragma once

#include <optional>

#include "coact/backend.hpp"
#include "coact/env.hpp"
#include "coact/trace.hpp"
#include "coact/types.hpp"

namespace coact {

// Line the coding agent emits (alone on a line) to mark subtask completion.
inline constexpr const char* kCompletionToken = "SUBTASK_COMPLETE";

struct ProgrammerRound {
  int round_index = 0;
  std::string model_reply;
  std::vector<CodeAction> actions;
  std::vector<ExecResult> results;
  Observation observation;  // screenshot after the last script, when any ran
};

struct ProgrammerOptions {
  // Attach the latest screenshot to each model request (never the history).
  bool attach_screenshots = true;
  double script_timeout_s = 120.0;
  int max_consecutive_zero_code_replies = 3;
  RoleConfig model_config;
  RoleConfig summarizer_config;
};

// Extracts and executes every code block in `reply`, in document order.
// Zero-block replies produce an empty round and no environment interaction.
// After a transport failure the remaining scripts of the reply are skipped.
ProgrammerRound execute_round(const std::string& reply,
                              EnvironmentSession& env, double timeout_s);

std::string render_exec_feedback(const ProgrammerRound& round);

// Summarizes a programmer conversation; on summarizer failure returns a
// deterministic digest and sets `used_fallback`.
std::string summarize_conversation(const Conversation& conversation,
                                   ModelBackend& summarizer,
                                   const RoleConfig& config,
                                   bool* used_fallback = nullptr);

WorkerReport run_programmer_subtask(const SubtaskAssignment& assignment,
                                    EnvironmentSession& env,
                                    ModelBackend& model,
                                    ModelBackend& summarizer, int max_rounds,
                                    TraceWriter* trace, int subtask_index,
                                    const ProgrammerOptions& options = {});

bool reply_signals_completion(const std::string& reply);

}  // namespace coact
