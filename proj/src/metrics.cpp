#include "coact/metrics.hpp"

#include <algorithm>

namespace coact {

namespace {

void check_bins(const std::vector<long>& edges) {
  if (edges.size() < 2) throw MetricsError("need at least two bin edges");
  for (size_t i = 1; i < edges.size(); ++i)
    if (edges[i] <= edges[i - 1])
      throw MetricsError("bin edges must be strictly increasing");
}

std::optional<size_t> bin_index(const std::vector<long>& edges, long value) {
  for (size_t i = 0; i + 1 < edges.size(); ++i)
    if (value >= edges[i] && value < edges[i + 1]) return i;
  return std::nullopt;
}

}  // namespace

TaskResult task_result_from_steps(const std::string& task_id,
                                  const std::string& domain,
                                  std::optional<bool> success,
                                  const std::vector<StepRecord>& steps) {
  TaskResult result;
  result.task_id = task_id;
  result.domain = domain;
  result.success = success;
  long expected_seq = 1;
  for (const auto& step : steps) {
    if (step.seq != expected_seq++)
      throw MetricsError("trace " + task_id + " has a gap at seq " +
                         std::to_string(step.seq));
    if (step.action.is_code()) ++result.code_interactions;
    else ++result.gui_interactions;
  }
  result.total_env_interactions =
      result.gui_interactions + result.code_interactions;
  return result;
}

double average_steps(const std::vector<TaskResult>& results,
                     bool successful_only) {
  long count = 0;
  double total = 0;
  for (const auto& r : results) {
    if (successful_only && !(r.success && *r.success)) continue;
    total += double(r.total_env_interactions);
    ++count;
  }
  if (count == 0) throw MetricsError("empty selection");
  return total / double(count);
}

std::vector<ModalityBin> modality_ratio_by_bin(
    const std::vector<TaskResult>& results,
    const std::vector<long>& bin_edges) {
  check_bins(bin_edges);
  std::vector<ModalityBin> bins(bin_edges.size() - 1);
  std::vector<long> gui(bins.size(), 0), code(bins.size(), 0);
  for (size_t i = 0; i < bins.size(); ++i) {
    bins[i].lo = bin_edges[i];
    bins[i].hi = bin_edges[i + 1];
  }
  for (const auto& r : results) {
    auto idx = bin_index(bin_edges, r.total_env_interactions);
    if (!idx) continue;
    bins[*idx].tasks += 1;
    gui[*idx] += r.gui_interactions;
    code[*idx] += r.code_interactions;
  }
  for (size_t i = 0; i < bins.size(); ++i) {
    long total = gui[i] + code[i];
    if (total > 0) {
      bins[i].gui_fraction = double(gui[i]) / double(total);
      bins[i].code_fraction = double(code[i]) / double(total);
    }
  }
  return bins;
}

std::map<std::string, double> coding_ratio_by_domain(
    const std::vector<TaskResult>& results) {
  std::map<std::string, std::pair<long, long>> per_domain;  // code, total
  for (const auto& r : results) {
    auto& [code, total] = per_domain[r.domain];
    code += r.code_interactions;
    total += r.total_env_interactions;
  }
  std::map<std::string, double> ratios;
  for (const auto& [domain, counts] : per_domain) {
    if (counts.second > 0)
      ratios[domain] = double(counts.first) / double(counts.second);
  }
  return ratios;
}

std::vector<ErrorRateBin> error_rate_by_bin(
    const std::vector<TaskResult>& results,
    const std::vector<long>& bin_edges) {
  check_bins(bin_edges);
  std::vector<ErrorRateBin> bins(bin_edges.size() - 1);
  std::vector<long> failures(bins.size(), 0);
  for (size_t i = 0; i < bins.size(); ++i) {
    bins[i].lo = bin_edges[i];
    bins[i].hi = bin_edges[i + 1];
  }
  for (const auto& r : results) {
    if (!r.success) continue;  // indeterminate excluded
    auto idx = bin_index(bin_edges, r.total_env_interactions);
    if (!idx) continue;
    bins[*idx].tasks += 1;
    if (!*r.success) failures[*idx] += 1;
  }
  for (size_t i = 0; i < bins.size(); ++i) {
    if (bins[i].tasks > 0)
      bins[i].failure_fraction = double(failures[i]) / double(bins[i].tasks);
  }
  return bins;
}

}  // namespace coact
