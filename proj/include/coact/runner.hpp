#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "coact/backend.hpp"
#include "coact/metrics.hpp"
#include "coact/orchestrator.hpp"
#include "coact/types.hpp"

namespace coact {

// Environment target: "sim:<snapshot>" or an http(s) URL.
struct EnvTarget {
  enum class Kind { sim, http } kind = Kind::sim;
  std::string snapshot = "blank";  // sim
  std::string url;                 // http
  ScreenSize screen{1920, 1080};
  uint64_t seed = 0;

  static EnvTarget parse(const std::string& target);
  std::string to_string() const;
};

struct RunConfig {
  std::filesystem::path task_path;
  EnvTarget env;
  std::filesystem::path backend_config_path;
  std::filesystem::path trace_dir;
  std::optional<Budgets> budgets_override;
  bool record = false;
};

TaskSpec load_task_file(const std::filesystem::path& path);
nlohmann::json task_to_json(const TaskSpec& task);

struct RunSummary {
  std::string task_id;
  std::string domain;
  TaskOutcome outcome = TaskOutcome::aborted_error;
  std::string final_answer;
  int rounds_used = 0;
  long env_interactions = 0;
  long gui_interactions = 0;
  long code_interactions = 0;
  std::string evaluator_verdict;  // pass|fail|indeterminate|none
};

// Exit codes: 0 evaluator pass, 1 evaluator fail, 2 abort/indeterminate,
// also 2 on configuration errors (reported before any environment contact).
int run_command(const RunConfig& config, std::string* error = nullptr);

RunSummary read_summary(const std::filesystem::path& trace_dir);

// Re-executes a recorded sim run with replay backends and compares
// StepRecords byte-for-byte, timestamps excluded. Exit 0 match, 3 mismatch.
int replay_command(const std::filesystem::path& trace_dir,
                   std::string* detail = nullptr);

struct AnalyzeReport {
  double avg_steps_successful = 0.0;
  bool has_successful = false;
  std::vector<ModalityBin> modality;
  std::map<std::string, double> coding_ratio;
  std::vector<ErrorRateBin> error_rate;
  long tasks = 0;
};

std::vector<TaskResult> load_results(
    const std::vector<std::filesystem::path>& trace_dirs);

AnalyzeReport analyze_results(const std::vector<TaskResult>& results,
                              const std::vector<long>& bin_edges);

nlohmann::json analyze_report_to_json(const AnalyzeReport& report);

// Writes the four per-figure tables as CSV files into `out_dir`.
void write_analysis_tables(const AnalyzeReport& report,
                           const std::filesystem::path& out_dir);

}  // namespace coact
