#include <fstream>

#include "doctest.h"

#include "coact/runner.hpp"
#include "coact/trace.hpp"

using namespace coact;
using nlohmann::json;

namespace {

struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const std::string& name)
      : path(std::filesystem::temp_directory_path() / name) {
    std::filesystem::remove_all(path);
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
};

void write_json(const std::filesystem::path& path, const json& obj) {
  std::ofstream out(path, std::ios::trunc);
  out << obj.dump(2) << '\n';
}

json scripted_role(const json& rules) {
  return {{"kind", "scripted"}, {"rules", rules}};
}

// Orchestrator sends the programmer once, then terminates; the programmer
// writes a file; evaluator checks md5 of its content.
json simple_backends() {
  json assign = {{"action", "assign"},
                 {"worker", "programmer"},
                 {"instruction", "write the file"}};
  json term = {{"action", "terminate"},
               {"answer", "wrote /tmp/out.txt"},
               {"success", true}};
  return {{"version", 1},
          {"roles",
           {{"orchestrator",
             scripted_role(json::array(
                 {{{"match", {{"round_index", 1}}}, {"reply", assign.dump()}},
                  {{"match", "always"}, {"reply", term.dump()}}}))},
            {"programmer",
             scripted_role(json::array(
                 {{{"match", {{"round_index", 1}}},
                   {"reply", "```bash\nwrite_file /tmp/out.txt payload\n```"}},
                  {{"match", "always"}, {"reply", "SUBTASK_COMPLETE"}}}))},
            {"gui", scripted_role(json::array(
                        {{{"match", "always"},
                          {"reply", R"({"type":"terminate","message":"n/a"})"}}}))},
            {"summarizer",
             scripted_role(json::array({{{"match", "always"},
                                         {"reply", "wrote the file"}}}))}}}};
}

json simple_task(const json& evaluator) {
  json task = {{"version", 1},
               {"id", "write-file"},
               {"instruction", "create /tmp/out.txt"},
               {"domain", "files"},
               {"budgets",
                {{"programmer_max_rounds", 5},
                 {"gui_max_steps", 5},
                 {"orchestrator_max_rounds", 3}}}};
  if (!evaluator.is_null()) task["evaluator"] = evaluator;
  return task;
}

RunConfig make_config(const TempDir& dir) {
  RunConfig config;
  config.task_path = dir.path / "task.json";
  config.env = EnvTarget::parse("sim:base");
  config.env.screen = {160, 120};
  config.backend_config_path = dir.path / "backends.json";
  config.trace_dir = dir.path / "trace";
  return config;
}

}  // namespace

TEST_CASE("EnvTarget parsing") {
  EnvTarget sim = EnvTarget::parse("sim:desktop");
  CHECK(sim.kind == EnvTarget::Kind::sim);
  CHECK(sim.snapshot == "desktop");
  CHECK(sim.to_string() == "sim:desktop");

  EnvTarget http = EnvTarget::parse("http://127.0.0.1:8800");
  CHECK(http.kind == EnvTarget::Kind::http);
  CHECK(http.to_string() == "http://127.0.0.1:8800");

  CHECK_THROWS_AS(EnvTarget::parse("ftp://nope"), ProtocolError);
  CHECK_THROWS_AS(EnvTarget::parse("desktop"), ProtocolError);
}

TEST_CASE("task files round-trip through json") {
  TempDir dir("coact_runner_task");
  json evaluator = {{"file_exists", "/tmp/out.txt"}};
  write_json(dir.path / "task.json", simple_task(evaluator));
  TaskSpec task = load_task_file(dir.path / "task.json");
  CHECK(task.id == "write-file");
  CHECK(task.budgets.orchestrator_max_rounds == 3);
  REQUIRE(task.evaluator);

  json dumped = task_to_json(task);
  write_json(dir.path / "again.json", dumped);
  TaskSpec back = load_task_file(dir.path / "again.json");
  CHECK(task_to_json(back) == dumped);

  write_json(dir.path / "bad.json", json{{"id", "x"}});  // no instruction
  CHECK_THROWS(load_task_file(dir.path / "bad.json"));
}

TEST_CASE("run_command: evaluator pass, fail, and none map to exit codes") {
  TempDir dir("coact_runner_run");
  write_json(dir.path / "backends.json", simple_backends());

  // Evaluator passes: exit 0.
  write_json(dir.path / "task.json",
             simple_task({{"file_exists", "/tmp/out.txt"}}));
  RunConfig config = make_config(dir);
  std::string error;
  CHECK(run_command(config, &error) == 0);
  RunSummary summary = read_summary(config.trace_dir);
  CHECK(summary.outcome == TaskOutcome::terminated_success_claim);
  CHECK(summary.evaluator_verdict == "pass");
  CHECK(summary.env_interactions == 1);
  CHECK(summary.code_interactions == 1);
  CHECK(summary.gui_interactions == 0);

  // Evaluator fails: exit 1.
  write_json(dir.path / "task.json",
             simple_task({{"file_exists", "/tmp/other.txt"}}));
  std::filesystem::remove_all(config.trace_dir);
  CHECK(run_command(config, &error) == 1);
  CHECK(read_summary(config.trace_dir).evaluator_verdict == "fail");

  // No evaluator: exit 2, verdict none.
  write_json(dir.path / "task.json", simple_task(nullptr));
  std::filesystem::remove_all(config.trace_dir);
  CHECK(run_command(config, &error) == 2);
  CHECK(read_summary(config.trace_dir).evaluator_verdict == "none");
}

TEST_CASE("run_command: config errors exit 2 before touching anything") {
  TempDir dir("coact_runner_cfg");
  RunConfig config = make_config(dir);
  std::string error;
  CHECK(run_command(config, &error) == 2);  // task file missing
  CHECK(!error.empty());
  CHECK(!std::filesystem::exists(config.trace_dir));
}

TEST_CASE("record then replay reproduces the trace byte-for-byte") {
  TempDir dir("coact_runner_replay");
  write_json(dir.path / "backends.json", simple_backends());
  write_json(dir.path / "task.json",
             simple_task({{"file_exists", "/tmp/out.txt"}}));
  RunConfig config = make_config(dir);
  config.record = true;
  std::string error;
  REQUIRE(run_command(config, &error) == 0);
  for (const char* role : {"orchestrator", "programmer", "summarizer"}) {
    CHECK(std::filesystem::exists(config.trace_dir /
                                  ("replies_" + std::string(role) + ".jsonl")));
  }

  std::string detail;
  CHECK(replay_command(config.trace_dir, &detail) == 0);

  // Tampering with the recorded replies makes replay diverge (exit 3).
  auto log = config.trace_dir / "replies_programmer.jsonl";
  std::string contents;
  {
    std::ifstream in(log);
    std::getline(in, contents);
  }
  json first = json::parse(contents);
  first["reply"] = "```bash\nwrite_file /tmp/out.txt tampered\n```";
  {
    std::ofstream out(log, std::ios::trunc);
    out << first.dump() << '\n'
        << json{{"digest", "0"}, {"reply", "SUBTASK_COMPLETE"}}.dump() << '\n';
  }
  CHECK(replay_command(config.trace_dir, &detail) == 3);
  CHECK(detail.find("divergence") != std::string::npos);
}

TEST_CASE("analysis pipeline over a small corpus of real traces") {
  TempDir dir("coact_runner_analyze");
  write_json(dir.path / "backends.json", simple_backends());

  std::vector<std::filesystem::path> trace_dirs;
  for (int i = 0; i < 3; ++i) {
    // Alternate pass/fail by pointing the evaluator at the right path.
    const char* path = (i % 2 == 0) ? "/tmp/out.txt" : "/tmp/nope.txt";
    write_json(dir.path / "task.json", simple_task({{"file_exists", path}}));
    RunConfig config = make_config(dir);
    config.trace_dir = dir.path / ("trace" + std::to_string(i));
    std::string error;
    run_command(config, &error);
    trace_dirs.push_back(config.trace_dir);
  }

  auto results = load_results(trace_dirs);
  REQUIRE(results.size() == 3);
  auto report = analyze_results(results, kDefaultBinEdges);
  CHECK(report.tasks == 3);
  CHECK(report.has_successful);
  // Every run used exactly one code interaction.
  CHECK(report.avg_steps_successful == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(report.coding_ratio.at("files") == doctest::Approx(1.0).epsilon(1e-12));

  json dumped = analyze_report_to_json(report);
  CHECK(dumped["tasks"] == 3);

  auto tables = dir.path / "tables";
  write_analysis_tables(report, tables);
  for (const char* name :
       {"average_steps.csv", "modality_by_bin.csv",
        "coding_ratio_by_domain.csv", "error_rate_by_bin.csv"}) {
    CHECK(std::filesystem::exists(tables / name));
  }
}
