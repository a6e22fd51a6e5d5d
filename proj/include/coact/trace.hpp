#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "coact/types.hpp"

namespace coact {

nlohmann::json step_record_to_json(const StepRecord& record);
StepRecord step_record_from_json(const nlohmann::json& obj);

// Serialization with wall_time zeroed, for replay comparison.
std::string step_record_canonical(const StepRecord& record);

// Append-only trace sink: one StepRecord JSON object per line, flushed per
// record so aborted runs leave a readable prefix. Screenshots are stored
// next to the trace, content-addressed by md5.
class TraceWriter {
 public:
  explicit TraceWriter(const std::filesystem::path& dir);

  // Records one environment interaction; stores the screenshot and returns
  // the assigned sequence number.
  long record(Role actor, ActionEnvelope action, const Observation& obs,
              int subtask_index);

  long steps_written() const { return next_seq_ - 1; }
  const std::filesystem::path& dir() const { return dir_; }

 private:
  std::filesystem::path dir_;
  std::ofstream out_;
  long next_seq_ = 1;
};

std::vector<StepRecord> read_trace(const std::filesystem::path& dir);

}  // namespace coact
