#include "coact/trace.hpp"

#include "coact/actions.hpp"
#include "coact/util.hpp"

namespace coact {

using nlohmann::json;

namespace {
constexpr size_t kExcerptBytes = 200;
}

json step_record_to_json(const StepRecord& record) {
  return {{"seq", record.seq},
          {"actor", role_name(record.actor)},
          {"action", envelope_to_json(record.action)},
          {"observation",
           {{"digest", record.observation.digest},
            {"text_excerpt", record.observation.text_excerpt}}},
          {"subtask_index", record.subtask_index},
          {"wall_time", record.wall_time}};
}

StepRecord step_record_from_json(const json& obj) {
  StepRecord rec;
  rec.seq = obj.at("seq").get<long>();
  rec.actor = role_from_name(obj.at("actor").get<std::string>());
  rec.action = envelope_from_json(obj.at("action"));
  rec.observation.digest = obj.at("observation").at("digest").get<std::string>();
  rec.observation.text_excerpt =
      obj.at("observation").at("text_excerpt").get<std::string>();
  rec.subtask_index = obj.at("subtask_index").get<int>();
  rec.wall_time = obj.at("wall_time").get<double>();
  return rec;
}

std::string step_record_canonical(const StepRecord& record) {
  json obj = step_record_to_json(record);
  obj["wall_time"] = 0.0;
  return obj.dump();
}

TraceWriter::TraceWriter(const std::filesystem::path& dir) : dir_(dir) {
  std::filesystem::create_directories(dir_ / "screenshots");
  out_.open(dir_ / "trace.jsonl", std::ios::trunc);
  if (!out_) throw std::runtime_error("cannot open trace file in " + dir.string());
}

long TraceWriter::record(Role actor, ActionEnvelope action,
                         const Observation& obs, int subtask_index) {
  StepRecord rec;
  rec.seq = next_seq_++;
  rec.actor = actor;
  rec.action = std::move(action);
  rec.observation.digest = md5_hex(std::span<const uint8_t>(obs.screenshot_png));
  if (obs.text) {
    rec.observation.text_excerpt = obs.text->substr(0, kExcerptBytes);
  }
  rec.subtask_index = subtask_index;
  rec.wall_time = monotonic_seconds();

  auto shot_path = dir_ / "screenshots" / (rec.observation.digest + ".png");
  if (!std::filesystem::exists(shot_path)) {
    std::ofstream shot(shot_path, std::ios::binary);
    shot.write(reinterpret_cast<const char*>(obs.screenshot_png.data()),
               std::streamsize(obs.screenshot_png.size()));
  }

  out_ << step_record_to_json(rec).dump() << '\n';
  out_.flush();
  return rec.seq;
}

std::vector<StepRecord> read_trace(const std::filesystem::path& dir) {
  std::ifstream in(dir / "trace.jsonl");
  if (!in) throw std::runtime_error("no trace.jsonl in " + dir.string());
  std::vector<StepRecord> records;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    records.push_back(step_record_from_json(json::parse(line)));
  }
  return records;
}

}  // namespace coact
