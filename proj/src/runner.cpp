#include "coact/runner.hpp"

#include <fstream>

#include "coact/evaluator.hpp"
#include "coact/http_env.hpp"
#include "coact/sim_desktop.hpp"
#include "coact/trace.hpp"

namespace coact {

using nlohmann::json;

EnvTarget EnvTarget::parse(const std::string& target) {
  EnvTarget env;
  if (target.rfind("sim:", 0) == 0) {
    env.kind = Kind::sim;
    env.snapshot = target.substr(4);
    if (env.snapshot.empty()) env.snapshot = "blank";
    return env;
  }
  if (target.rfind("http://", 0) == 0 || target.rfind("https://", 0) == 0) {
    env.kind = Kind::http;
    env.url = target;
    return env;
  }
  throw ProtocolError("environment target must be sim:<snapshot> or a URL: " +
                      target);
}

std::string EnvTarget::to_string() const {
  return kind == Kind::sim ? "sim:" + snapshot : url;
}

TaskSpec load_task_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ProtocolError("task file not found: " + path.string());
  json obj;
  in >> obj;
  TaskSpec task;
  task.id = obj.at("id").get<std::string>();
  task.instruction = obj.at("instruction").get<std::string>();
  task.domain = obj.value("domain", "misc");
  if (obj.contains("env_context")) {
    for (const auto& [key, value] : obj["env_context"].items())
      task.env_context[key] = value.get<std::string>();
  }
  if (obj.contains("budgets")) {
    const auto& b = obj["budgets"];
    task.budgets.programmer_max_rounds = b.value("programmer_max_rounds", 20);
    task.budgets.gui_max_steps = b.value("gui_max_steps", 25);
    task.budgets.orchestrator_max_rounds =
        b.value("orchestrator_max_rounds", 15);
  }
  if (obj.contains("evaluator") && !obj["evaluator"].is_null())
    task.evaluator = parse_evaluator(obj["evaluator"]);
  task.validate();
  return task;
}

json task_to_json(const TaskSpec& task) {
  json obj = {{"version", 1},
              {"id", task.id},
              {"instruction", task.instruction},
              {"domain", task.domain},
              {"budgets",
               {{"programmer_max_rounds", task.budgets.programmer_max_rounds},
                {"gui_max_steps", task.budgets.gui_max_steps},
                {"orchestrator_max_rounds",
                 task.budgets.orchestrator_max_rounds}}}};
  json ctx = json::object();
  for (const auto& [key, value] : task.env_context) ctx[key] = value;
  obj["env_context"] = ctx;
  if (task.evaluator) obj["evaluator"] = serialize_evaluator(*task.evaluator);
  return obj;
}

namespace {

std::unique_ptr<EnvironmentSession> make_env(const EnvTarget& target) {
  if (target.kind == EnvTarget::Kind::sim) {
    return std::make_unique<SimDesktopSession>(target.snapshot, target.screen,
                                               target.seed);
  }
  HttpEnvConfig config;
  config.base_url = target.url;
  config.screen = target.screen;
  return std::make_unique<HttpEnvironment>(config);
}

void write_summary(const std::filesystem::path& dir,
                   const RunSummary& summary) {
  json obj = {{"version", 1},
              {"task_id", summary.task_id},
              {"domain", summary.domain},
              {"outcome", task_outcome_name(summary.outcome)},
              {"final_answer", summary.final_answer},
              {"rounds_used", summary.rounds_used},
              {"env_interactions", summary.env_interactions},
              {"gui_interactions", summary.gui_interactions},
              {"code_interactions", summary.code_interactions},
              {"evaluator_verdict", summary.evaluator_verdict}};
  std::ofstream out(dir / "summary.json", std::ios::trunc);
  out << obj.dump(2) << '\n';
}

TaskOutcome outcome_from_name(const std::string& name) {
  for (TaskOutcome o :
       {TaskOutcome::terminated_success_claim,
        TaskOutcome::terminated_failure_claim, TaskOutcome::budget_exhausted,
        TaskOutcome::aborted_error}) {
    if (name == task_outcome_name(o)) return o;
  }
  throw ProtocolError("unknown outcome: " + name);
}

struct StepCounts {
  long gui = 0;
  long code = 0;
};

StepCounts count_steps(const std::vector<StepRecord>& steps) {
  StepCounts counts;
  for (const auto& step : steps) {
    if (step.action.is_code()) ++counts.code;
    else ++counts.gui;
  }
  return counts;
}

int run_with_env(const TaskSpec& task, EnvironmentSession& env,
                 const BackendSet& backends, const RunConfig& config,
                 std::string* error) {
  TraceWriter trace(config.trace_dir);
  RunResult result = run_task(task, env, backends, trace);

  RunSummary summary;
  summary.task_id = task.id;
  summary.domain = task.domain;
  summary.outcome = result.outcome;
  summary.final_answer = result.final_answer;
  summary.rounds_used = result.rounds_used;
  summary.env_interactions = result.env_interactions;
  StepCounts counts = count_steps(read_trace(config.trace_dir));
  summary.gui_interactions = counts.gui;
  summary.code_interactions = counts.code;

  int exit_code = 2;
  if (result.outcome == TaskOutcome::aborted_error) {
    summary.evaluator_verdict = "none";
    if (error) *error = result.error;
  } else if (!task.evaluator) {
    summary.evaluator_verdict = "none";
  } else {
    Verdict verdict = evaluate(*task.evaluator, env);
    summary.evaluator_verdict = verdict_name(verdict);
    if (verdict == Verdict::pass) exit_code = 0;
    else if (verdict == Verdict::fail) exit_code = 1;
  }
  write_summary(config.trace_dir, summary);
  return exit_code;
}

}  // namespace

int run_command(const RunConfig& config, std::string* error) {
  TaskSpec task;
  BackendSet backends;
  try {
    task = load_task_file(config.task_path);
    if (config.budgets_override) task.budgets = *config.budgets_override;
    task.validate();
    backends = load_backend_set(config.backend_config_path);
  } catch (const std::exception& e) {
    // Config problems surface before any environment contact.
    if (error) *error = e.what();
    return 2;
  }

  std::filesystem::create_directories(config.trace_dir);
  {
    std::ofstream out(config.trace_dir / "task.json", std::ios::trunc);
    out << task_to_json(task).dump(2) << '\n';
    std::ofstream env_out(config.trace_dir / "env.json", std::ios::trunc);
    env_out << json{{"target", config.env.to_string()},
                    {"screen",
                     {{"width", config.env.screen.width},
                      {"height", config.env.screen.height}}},
                    {"seed", config.env.seed}}
                   .dump(2)
            << '\n';
  }

  if (config.record) {
    auto wrap = [&](BackendPtr& backend, const char* role) {
      backend = std::make_shared<RecordingBackend>(
          backend, config.trace_dir / (std::string("replies_") + role +
                                       ".jsonl"));
    };
    wrap(backends.orchestrator, "orchestrator");
    wrap(backends.programmer, "programmer");
    wrap(backends.gui, "gui");
    wrap(backends.summarizer, "summarizer");
  }

  try {
    auto env = make_env(config.env);
    return run_with_env(task, *env, backends, config, error);
  } catch (const std::exception& e) {
    if (error) *error = e.what();
    return 2;
  }
}

RunSummary read_summary(const std::filesystem::path& trace_dir) {
  std::ifstream in(trace_dir / "summary.json");
  if (!in) throw ProtocolError("no summary.json in " + trace_dir.string());
  json obj;
  in >> obj;
  RunSummary summary;
  summary.task_id = obj.at("task_id").get<std::string>();
  summary.domain = obj.value("domain", "misc");
  summary.outcome = outcome_from_name(obj.at("outcome").get<std::string>());
  summary.final_answer = obj.value("final_answer", "");
  summary.rounds_used = obj.value("rounds_used", 0);
  summary.env_interactions = obj.value("env_interactions", 0L);
  summary.gui_interactions = obj.value("gui_interactions", 0L);
  summary.code_interactions = obj.value("code_interactions", 0L);
  summary.evaluator_verdict = obj.value("evaluator_verdict", "none");
  return summary;
}

int replay_command(const std::filesystem::path& trace_dir,
                   std::string* detail) {
  try {
    std::ifstream env_in(trace_dir / "env.json");
    if (!env_in) throw ProtocolError("no env.json in trace dir");
    json env_obj;
    env_in >> env_obj;
    EnvTarget target = EnvTarget::parse(env_obj.at("target").get<std::string>());
    if (target.kind != EnvTarget::Kind::sim)
      throw ProtocolError("replay requires a sim-environment recording");
    target.screen = {env_obj.at("screen").at("width").get<int>(),
                     env_obj.at("screen").at("height").get<int>()};
    target.seed = env_obj.value("seed", uint64_t(0));

    TaskSpec task = load_task_file(trace_dir / "task.json");

    BackendSet backends;
    backends.orchestrator = std::make_shared<ReplayBackend>(
        trace_dir / "replies_orchestrator.jsonl");
    backends.programmer =
        std::make_shared<ReplayBackend>(trace_dir / "replies_programmer.jsonl");
    backends.gui =
        std::make_shared<ReplayBackend>(trace_dir / "replies_gui.jsonl");
    backends.summarizer =
        std::make_shared<ReplayBackend>(trace_dir / "replies_summarizer.jsonl");

    auto replay_dir = trace_dir / "replay";
    std::filesystem::remove_all(replay_dir);
    SimDesktopSession env(target.snapshot, target.screen, target.seed);
    TraceWriter trace(replay_dir);
    run_task(task, env, backends, trace);

    auto original = read_trace(trace_dir);
    auto replayed = read_trace(replay_dir);
    size_t n = std::min(original.size(), replayed.size());
    for (size_t i = 0; i < n; ++i) {
      std::string a = step_record_canonical(original[i]);
      std::string b = step_record_canonical(replayed[i]);
      if (a != b) {
        if (detail)
          *detail = "first divergence at seq " + std::to_string(i + 1) +
                    "\n  recorded: " + a + "\n  replayed: " + b;
        return 3;
      }
    }
    if (original.size() != replayed.size()) {
      if (detail)
        *detail = "length mismatch: recorded " +
                  std::to_string(original.size()) + " steps, replayed " +
                  std::to_string(replayed.size());
      return 3;
    }
    return 0;
  } catch (const ReplayExhausted& e) {
    if (detail) *detail = e.what();
    return 3;
  } catch (const ReplayMismatch& e) {
    if (detail) *detail = e.what();
    return 3;
  } catch (const std::exception& e) {
    if (detail) *detail = e.what();
    return 3;
  }
}

std::vector<TaskResult> load_results(
    const std::vector<std::filesystem::path>& trace_dirs) {
  std::vector<TaskResult> results;
  for (const auto& dir : trace_dirs) {
    RunSummary summary = read_summary(dir);
    std::optional<bool> success;
    if (summary.evaluator_verdict == "pass") success = true;
    else if (summary.evaluator_verdict == "fail") success = false;
    TaskResult result = task_result_from_steps(summary.task_id, summary.domain,
                                               success, read_trace(dir));
    // Cross-check cached summary counts against the raw trace.
    if (result.gui_interactions != summary.gui_interactions ||
        result.code_interactions != summary.code_interactions) {
      throw MetricsError("summary counts disagree with trace in " +
                         dir.string());
    }
    results.push_back(std::move(result));
  }
  return results;
}

AnalyzeReport analyze_results(const std::vector<TaskResult>& results,
                              const std::vector<long>& bin_edges) {
  AnalyzeReport report;
  report.tasks = long(results.size());
  try {
    report.avg_steps_successful = average_steps(results, true);
    report.has_successful = true;
  } catch (const MetricsError&) {
    report.has_successful = false;
  }
  report.modality = modality_ratio_by_bin(results, bin_edges);
  report.coding_ratio = coding_ratio_by_domain(results);
  report.error_rate = error_rate_by_bin(results, bin_edges);
  return report;
}

json analyze_report_to_json(const AnalyzeReport& report) {
  json modality = json::array();
  for (const auto& bin : report.modality) {
    modality.push_back({{"lo", bin.lo},
                        {"hi", bin.hi},
                        {"tasks", bin.tasks},
                        {"gui_fraction", bin.gui_fraction},
                        {"code_fraction", bin.code_fraction}});
  }
  json error_rate = json::array();
  for (const auto& bin : report.error_rate) {
    error_rate.push_back({{"lo", bin.lo},
                          {"hi", bin.hi},
                          {"tasks", bin.tasks},
                          {"failure_fraction", bin.failure_fraction}});
  }
  json coding = json::object();
  for (const auto& [domain, ratio] : report.coding_ratio) coding[domain] = ratio;
  json avg;
  if (report.has_successful) avg = report.avg_steps_successful;
  return {{"tasks", report.tasks},
          {"average_steps_successful", avg},
          {"modality_by_bin", modality},
          {"coding_ratio_by_domain", coding},
          {"error_rate_by_bin", error_rate}};
}

void write_analysis_tables(const AnalyzeReport& report,
                           const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  {
    std::ofstream out(out_dir / "average_steps.csv", std::ios::trunc);
    out << "metric,value\n";
    if (report.has_successful)
      out << "average_steps_successful," << report.avg_steps_successful
          << "\n";
  }
  {
    std::ofstream out(out_dir / "modality_by_bin.csv", std::ios::trunc);
    out << "bin_lo,bin_hi,tasks,gui_fraction,code_fraction\n";
    for (const auto& bin : report.modality)
      out << bin.lo << ',' << bin.hi << ',' << bin.tasks << ','
          << bin.gui_fraction << ',' << bin.code_fraction << '\n';
  }
  {
    std::ofstream out(out_dir / "coding_ratio_by_domain.csv", std::ios::trunc);
    out << "domain,code_fraction\n";
    for (const auto& [domain, ratio] : report.coding_ratio)
      out << domain << ',' << ratio << '\n';
  }
  {
    std::ofstream out(out_dir / "error_rate_by_bin.csv", std::ios::trunc);
    out << "bin_lo,bin_hi,tasks,failure_fraction\n";
    for (const auto& bin : report.error_rate)
      out << bin.lo << ',' << bin.hi << ',' << bin.tasks << ','
          << bin.failure_fraction << '\n';
  }
}

}  // namespace coact
