#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "coact/actions.hpp"
#include "coact/evaluator.hpp"
#include "coact/runner.hpp"
#include "coact/sim_desktop.hpp"
#include "coact/util.hpp"

namespace py = pybind11;
using namespace coact;

namespace {

py::dict exec_result_dict(const ExecResult& r) {
  py::dict d;
  d["exit_code"] = r.exit_code;
  d["stdout"] = r.stdout_text;
  d["stderr"] = r.stderr_text;
  d["timed_out"] = r.timed_out;
  return d;
}

}  // namespace

PYBIND11_MODULE(_coactpp, m) {
  m.doc() = "Hybrid GUI/code computer-use agent runtime";

  m.def("md5_hex", [](const std::string& s) { return md5_hex(s); });

  m.def("interaction_bound",
        [](int programmer_rounds, int gui_steps, int orchestrator_rounds) {
          return interaction_bound(
              {programmer_rounds, gui_steps, orchestrator_rounds});
        },
        py::arg("programmer_rounds"), py::arg("gui_steps"),
        py::arg("orchestrator_rounds"));

  m.def("extract_code_blocks", [](const std::string& text) {
    py::list out;
    for (const auto& block : extract_code_blocks(text)) {
      py::dict d;
      d["language"] = std::string(language_name(block.language));
      d["source"] = block.source;
      out.append(d);
    }
    return out;
  });

  // Returns the canonical JSON wire form; raises ValueError on bad actions.
  m.def("parse_gui_action",
        [](const std::string& text, int width, int height) {
          try {
            GuiAction a = parse_gui_action(text, ScreenSize{width, height});
            return serialize_gui_action(a);
          } catch (const ActionError& e) {
            throw py::value_error(e.what());
          }
        },
        py::arg("text"), py::arg("width") = 1920, py::arg("height") = 1080);

  py::class_<SimDesktopSession>(m, "SimDesktop")
      .def(py::init([](const std::string& snapshot, int width, int height,
                       uint64_t seed) {
             return SimDesktopSession(snapshot, ScreenSize{width, height},
                                      seed);
           }),
           py::arg("snapshot") = "blank", py::arg("width") = 640,
           py::arg("height") = 400, py::arg("seed") = 0)
      .def_static("snapshot_names", &SimDesktopSession::snapshot_names)
      .def("run_script",
           [](SimDesktopSession& self, const std::string& source) {
             auto [result, obs] =
                 self.execute_script({Language::bash, source}, 120.0);
             return exec_result_dict(result);
           })
      .def("perform_action",
           [](SimDesktopSession& self, const std::string& action_json) {
             GuiAction a = parse_gui_action(action_json, self.screen());
             self.perform_action(a);
           })
      .def("screenshot_png",
           [](SimDesktopSession& self) {
             auto obs = self.capture_screenshot();
             return py::bytes(
                 reinterpret_cast<const char*>(obs.screenshot_png.data()),
                 obs.screenshot_png.size());
           })
      .def("state_digest",
           [](SimDesktopSession& self) {
             return sim_state_digest(self.state());
           })
      .def("read_file",
           [](SimDesktopSession& self,
              const std::string& path) -> py::object {
             auto it = self.state().files.find(path);
             if (it == self.state().files.end()) return py::none();
             return py::str(it->second);
           })
      .def("reset", &SimDesktopSession::reset);

  m.def("evaluate",
        [](const std::string& evaluator_json, SimDesktopSession& session) {
          auto expr = parse_evaluator_text(evaluator_json);
          return std::string(verdict_name(evaluate(*expr, session)));
        },
        py::arg("evaluator_json"), py::arg("session"));

  m.def("run_task",
        [](const std::filesystem::path& task_path,
           const std::string& env_target,
           const std::filesystem::path& backends_path,
           const std::filesystem::path& trace_dir, int width, int height,
           uint64_t seed, bool record) {
          RunConfig config;
          config.task_path = task_path;
          config.env = EnvTarget::parse(env_target);
          config.env.screen = {width, height};
          config.env.seed = seed;
          config.backend_config_path = backends_path;
          config.trace_dir = trace_dir;
          config.record = record;
          std::string error;
          int code = run_command(config, &error);
          py::dict d;
          d["exit_code"] = code;
          d["error"] = error;
          if (std::filesystem::exists(trace_dir / "summary.json")) {
            RunSummary s = read_summary(trace_dir);
            d["outcome"] = std::string(task_outcome_name(s.outcome));
            d["env_interactions"] = s.env_interactions;
            d["verdict"] = s.evaluator_verdict;
            d["final_answer"] = s.final_answer;
          }
          return d;
        },
        py::arg("task_path"), py::arg("env_target"), py::arg("backends_path"),
        py::arg("trace_dir"), py::arg("width") = 640, py::arg("height") = 400,
        py::arg("seed") = 0, py::arg("record") = false);

  m.def("replay", [](const std::filesystem::path& trace_dir) {
    std::string detail;
    int code = replay_command(trace_dir, &detail);
    return py::make_tuple(code, detail);
  });

  m.def("analyze",
        [](const std::vector<std::filesystem::path>& trace_dirs,
           const std::vector<long>& bins) {
          auto results = load_results(trace_dirs);
          auto report = analyze_results(
              results, bins.empty() ? kDefaultBinEdges : bins);
          return analyze_report_to_json(report).dump();
        },
        py::arg("trace_dirs"), py::arg("bins") = std::vector<long>{});
}
