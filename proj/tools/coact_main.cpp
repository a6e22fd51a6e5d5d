#include <glob.h>

#include <iostream>

#include "CLI11.hpp"

#include "coact/interp_service.hpp"
#include "coact/runner.hpp"
#include "coact/util.hpp"
#include "coact/trace.hpp"

namespace {

std::vector<std::filesystem::path> expand_glob(const std::string& pattern) {
  glob_t results{};
  std::vector<std::filesystem::path> paths;
  if (glob(pattern.c_str(), 0, nullptr, &results) == 0) {
    for (size_t i = 0; i < results.gl_pathc; ++i)
      paths.emplace_back(results.gl_pathv[i]);
  }
  globfree(&results);
  return paths;
}

coact::ScreenSize parse_screen(const std::string& spec) {
  size_t x = spec.find('x');
  if (x == std::string::npos)
    throw CLI::ValidationError("--screen", "expected WIDTHxHEIGHT");
  return {std::stoi(spec.substr(0, x)), std::stoi(spec.substr(x + 1))};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"coact: hybrid GUI/code computer-use agent runtime"};
  app.require_subcommand(1);

  // --- run ---
  auto* run = app.add_subcommand("run", "Run one task");
  std::string task_path, env_target = "sim:base", backend_config, trace_dir;
  std::string screen_spec = "1920x1080";
  uint64_t seed = 0;
  bool record = false;
  std::vector<int> budget_override;
  run->add_option("--task", task_path, "Task file (JSON)")->required();
  run->add_option("--env", env_target,
                  "Environment: sim:<snapshot> or http(s) URL")
      ->capture_default_str();
  run->add_option("--backends", backend_config, "Backend config file (JSON)")
      ->required();
  run->add_option("--trace-dir", trace_dir, "Output directory for the trace")
      ->required();
  run->add_option("--screen", screen_spec, "Screen size WIDTHxHEIGHT")
      ->capture_default_str();
  run->add_option("--seed", seed, "Sim environment seed")
      ->capture_default_str();
  run->add_option("--budgets", budget_override,
                  "Override budgets: I K J (programmer gui orchestrator)")
      ->expected(3);
  run->add_flag("--record", record, "Record model replies for replay");

  // --- replay ---
  auto* replay = app.add_subcommand("replay", "Replay a recorded sim run");
  std::string replay_dir;
  replay->add_option("trace_dir", replay_dir, "Recorded trace directory")
      ->required();

  // --- analyze ---
  auto* analyze = app.add_subcommand("analyze", "Trace corpus analytics");
  std::string trace_glob, tables_dir;
  std::vector<long> bins;
  int jobs = 1;
  analyze->add_option("traces", trace_glob, "Glob of trace directories")
      ->required();
  analyze->add_option("--bins", bins,
                      "Bin edges for per-bin tables (strictly increasing)");
  analyze->add_option("--tables", tables_dir,
                      "Directory for CSV tables (optional)");
  analyze->add_option("--jobs", jobs, "Parallelism (reserved)")
      ->capture_default_str();

  // --- serve ---
  auto* serve = app.add_subcommand("serve", "Run the interp-service daemon");
  std::string host = "0.0.0.0", workdir = "/tmp/coact-interp";
  int port = 8800;
  size_t max_output = coact::kOutputCapBytes;
  serve->add_option("--host", host)->capture_default_str();
  serve->add_option("--port", port)->capture_default_str();
  serve->add_option("--workdir", workdir, "Session workdir root")
      ->capture_default_str();
  serve->add_option("--max-output-bytes", max_output)->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      coact::RunConfig config;
      config.task_path = task_path;
      config.env = coact::EnvTarget::parse(env_target);
      config.env.screen = parse_screen(screen_spec);
      config.env.seed = seed;
      config.backend_config_path = backend_config;
      config.trace_dir = trace_dir;
      config.record = record;
      if (!budget_override.empty()) {
        config.budgets_override =
            coact::Budgets{budget_override[0], budget_override[1],
                           budget_override[2]};
      }
      std::string error;
      int code = coact::run_command(config, &error);
      if (!error.empty()) std::cerr << "error: " << error << "\n";
      if (code != 2 || error.empty()) {
        auto summary = coact::read_summary(config.trace_dir);
        std::cout << "outcome=" << coact::task_outcome_name(summary.outcome)
                  << " interactions=" << summary.env_interactions
                  << " verdict=" << summary.evaluator_verdict << "\n";
      }
      return code;
    }

    if (replay->parsed()) {
      std::string detail;
      int code = coact::replay_command(replay_dir, &detail);
      if (code == 0) std::cout << "replay ok\n";
      else std::cerr << "replay mismatch: " << detail << "\n";
      return code;
    }

    if (analyze->parsed()) {
      auto dirs = expand_glob(trace_glob);
      std::erase_if(dirs, [](const std::filesystem::path& p) {
        return !std::filesystem::exists(p / "summary.json");
      });
      if (dirs.empty()) {
        std::cerr << "error: no traces match " << trace_glob << "\n";
        return 2;
      }
      auto results = coact::load_results(dirs);
      auto edges = bins.empty() ? coact::kDefaultBinEdges : bins;
      auto report = coact::analyze_results(results, edges);
      std::cout << coact::analyze_report_to_json(report).dump(2) << "\n";
      if (!tables_dir.empty())
        coact::write_analysis_tables(report, tables_dir);
      return 0;
    }

    if (serve->parsed()) {
      coact::InterpServiceConfig config;
      config.workdir = workdir;
      config.max_output_bytes = max_output;
      std::cerr << "interp-service listening on " << host << ":" << port
                << "\n";
      return coact::serve_interp(config, host, port);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
