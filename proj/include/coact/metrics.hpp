#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "coact/types.hpp"

namespace coact {

struct TaskResult {
  std::string task_id;
  std::string domain = "misc";
  std::optional<bool> success;  // nullopt = indeterminate evaluation
  long total_env_interactions = 0;
  long gui_interactions = 0;
  long code_interactions = 0;
};

class MetricsError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Counts derived solely from StepRecords; evaluator probes never appear in
// traces. Throws when gui + code != total.
TaskResult task_result_from_steps(const std::string& task_id,
                                  const std::string& domain,
                                  std::optional<bool> success,
                                  const std::vector<StepRecord>& steps);

double average_steps(const std::vector<TaskResult>& results,
                     bool successful_only);

struct ModalityBin {
  long lo = 0, hi = 0;  // [lo, hi)
  long tasks = 0;
  double gui_fraction = 0.0;
  double code_fraction = 0.0;
};

// Covers interaction counts up to the 375 bound of the default budgets.
inline const std::vector<long> kDefaultBinEdges = {0, 5, 10, 20, 40, 80, 160, 376};

std::vector<ModalityBin> modality_ratio_by_bin(
    const std::vector<TaskResult>& results, const std::vector<long>& bin_edges);

std::map<std::string, double> coding_ratio_by_domain(
    const std::vector<TaskResult>& results);

struct ErrorRateBin {
  long lo = 0, hi = 0;
  long tasks = 0;  // indeterminate results excluded
  double failure_fraction = 0.0;
};

std::vector<ErrorRateBin> error_rate_by_bin(
    const std::vector<TaskResult>& results, const std::vector<long>& bin_edges);

}  // namespace coact
