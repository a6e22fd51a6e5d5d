#include "coact/programmer.hpp"

#include <sstream>

#include "coact/actions.hpp"
#include "coact/util.hpp"

namespace coact {

namespace {

const char* kProgrammerSystemPrompt =
    "You are a coding agent operating a computer through scripts. Solve the "
    "assigned subtask by replying with fenced code blocks tagged `python` or "
    "`bash`. Every block in a reply runs in order and you receive exit code, "
    "stdout and stderr back. When the subtask is done, reply with a line "
    "containing exactly SUBTASK_COMPLETE.";

std::string render_assignment(const SubtaskAssignment& assignment) {
  std::ostringstream out;
  out << "Subtask: " << assignment.instruction << "\n";
  if (!assignment.env_context.empty()) {
    out << "Environment context:\n";
    for (const auto& [key, value] : assignment.env_context)
      out << "  - " << key << ": " << value << "\n";
  }
  if (assignment.required_info)
    out << "Report back: " << *assignment.required_info << "\n";
  return out.str();
}

}  // namespace

bool reply_signals_completion(const std::string& reply) {
  std::istringstream in(reply);
  std::string line;
  while (std::getline(in, line)) {
    size_t b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos) continue;
    size_t e = line.find_last_not_of(" \t\r");
    if (line.substr(b, e - b + 1) == kCompletionToken) return true;
  }
  return false;
}

ProgrammerRound execute_round(const std::string& reply,
                              EnvironmentSession& env, double timeout_s) {
  ProgrammerRound round;
  round.model_reply = reply;
  round.actions = extract_code_blocks(reply);
  for (size_t i = 0; i < round.actions.size(); ++i) {
    auto [result, obs] = env.execute_script(round.actions[i], timeout_s);
    round.results.push_back(std::move(result));
    round.observation = std::move(obs);
    // Keep actions/results aligned if a later script never runs.
    (void)i;
  }
  return round;
}

std::string render_exec_feedback(const ProgrammerRound& round) {
  std::ostringstream out;
  for (size_t i = 0; i < round.results.size(); ++i) {
    const auto& result = round.results[i];
    out << "[script " << (i + 1) << ": "
        << language_name(round.actions[i].language) << "] exit "
        << result.exit_code;
    if (result.timed_out) out << " (timed out)";
    out << "\nstdout:\n```\n" << result.stdout_text << "\n```\n";
    out << "stderr:\n```\n" << result.stderr_text << "\n```\n";
  }
  return out.str();
}

std::string summarize_conversation(const Conversation& conversation,
                                   ModelBackend& summarizer,
                                   const RoleConfig& config,
                                   bool* used_fallback) {
  if (used_fallback) *used_fallback = false;
  Conversation request(Role::summarizer);
  request.append_text(Role::system,
                      "Summarize the following coding session in a few "
                      "sentences, keeping concrete facts such as file paths "
                      "and values.");
  std::ostringstream dump;
  for (const auto& msg : conversation.messages()) {
    dump << role_name(msg.role) << ":\n";
    for (const auto& part : msg.parts) {
      if (const auto* text = std::get_if<std::string>(&part))
        dump << *text << "\n";
    }
  }
  request.append_text(Role::orchestrator, dump.str());
  try {
    return summarizer.chat(request, config);
  } catch (const BackendError&) {
    // Deterministic digest: last agent reply plus last execution tail.
    std::string last_reply, last_exec;
    for (const auto& msg : conversation.messages()) {
      for (const auto& part : msg.parts) {
        if (const auto* text = std::get_if<std::string>(&part)) {
          if (msg.role == Role::coding_agent) last_reply = *text;
          if (msg.role == Role::code_interpreter) last_exec = *text;
        }
      }
    }
    if (used_fallback) *used_fallback = true;
    auto tail = [](const std::string& s, size_t n) {
      return s.size() <= n ? s : s.substr(s.size() - n);
    };
    return "[summary fallback] last reply: " + tail(last_reply, 400) +
           " | last result: " + tail(last_exec, 400);
  }
}

WorkerReport run_programmer_subtask(const SubtaskAssignment& assignment,
                                    EnvironmentSession& env,
                                    ModelBackend& model,
                                    ModelBackend& summarizer, int max_rounds,
                                    TraceWriter* trace, int subtask_index,
                                    const ProgrammerOptions& options) {
  if (assignment.worker != WorkerKind::programmer)
    throw ProtocolError("assignment is not for the programmer");

  WorkerReport report;
  report.worker = WorkerKind::programmer;

  Conversation conv(Role::coding_agent);  // fresh per subtask
  conv.append_text(Role::system, kProgrammerSystemPrompt);

  Observation latest;
  try {
    latest = env.capture_screenshot();
  } catch (const EnvError&) {
    report.outcome = SubtaskOutcome::error;
    report.env_unreachable = true;
    report.summary_or_message = "[error] environment unreachable at start";
    return report;
  }
  if (options.attach_screenshots) {
    conv.append_with_image(Role::orchestrator, render_assignment(assignment),
                           latest.screenshot_png);
  } else {
    conv.append_text(Role::orchestrator, render_assignment(assignment));
  }

  int interactions = 0;
  int zero_streak = 0;
  bool completed = false;
  bool errored = false;
  std::string error_note;

  while (interactions < max_rounds && !completed && !errored) {
    std::string reply;
    try {
      reply = model.chat(conv, options.model_config);
    } catch (const BackendError& e) {
      errored = true;
      error_note = std::string("backend error: ") + e.what();
      break;
    }
    conv.append_text(Role::coding_agent, reply);

    ProgrammerRound round;
    try {
      round = execute_round(reply, env, options.script_timeout_s);
    } catch (const EnvError& e) {
      errored = true;
      if (e.kind() == EnvErrorKind::transport ||
          e.kind() == EnvErrorKind::session_expired) {
        report.env_unreachable = true;
      }
      error_note = std::string("environment error: ") + e.what();
      break;
    }

    if (!round.actions.empty()) {
      ++interactions;
      zero_streak = 0;
      latest = round.observation;
      if (trace) {
        trace->record(Role::coding_agent, ActionEnvelope{round.actions},
                      round.observation, subtask_index);
      }
      std::string feedback = render_exec_feedback(round);
      if (options.attach_screenshots) {
        conv.append_with_image(Role::code_interpreter, feedback,
                               latest.screenshot_png);
      } else {
        conv.append_text(Role::code_interpreter, feedback);
      }
    } else if (!reply_signals_completion(reply)) {
      ++zero_streak;
      if (zero_streak >= options.max_consecutive_zero_code_replies) {
        errored = true;
        error_note = "no executable code in " + std::to_string(zero_streak) +
                     " consecutive replies";
        break;
      }
      conv.append_text(Role::code_interpreter,
                       "No python/bash code block found in your reply. Send "
                       "a fenced block or the completion line.");
    }

    if (reply_signals_completion(reply)) completed = true;
  }

  report.env_interactions_used = interactions;
  if (completed) {
    report.outcome = SubtaskOutcome::completed;
  } else if (errored) {
    report.outcome = SubtaskOutcome::error;
  } else {
    report.outcome = SubtaskOutcome::budget_exhausted;
  }

  bool fallback = false;
  report.summary_or_message =
      summarize_conversation(conv, summarizer, options.summarizer_config,
                             &fallback);
  report.summary_is_fallback = fallback;
  if (errored) {
    report.summary_or_message =
        "[error] " + error_note + " | " + report.summary_or_message;
  }

  if (latest.screenshot_png.empty()) {
    try {
      latest = env.capture_screenshot();
    } catch (const EnvError&) {
    }
  }
  report.final_screenshot = latest.screenshot_png;
  return report;
}

}  // namespace coact
