#include "doctest.h"

#include "coact/actions.hpp"
#include "coact/gui_operator.hpp"
#include "coact/sim_desktop.hpp"

using namespace coact;

namespace {
const ScreenSize kScreen{160, 120};

std::shared_ptr<ScriptedBackend> scripted(std::vector<ScriptedReply> rules) {
  return std::make_shared<ScriptedBackend>(std::move(rules));
}

SubtaskAssignment gui_assignment(const std::string& instruction) {
  SubtaskAssignment a;
  a.worker = WorkerKind::gui_operator;
  a.instruction = instruction;
  return a;
}
}  // namespace

TEST_CASE("dispatch_action refuses terminate") {
  SimDesktopSession env("base", kScreen, 0);
  CHECK_THROWS_AS(dispatch_action({Terminate{"x"}}, env), ProtocolError);
}

TEST_CASE("terminate message becomes the report verbatim") {
  SimDesktopSession env("editor_open", kScreen, 0);
  auto model = scripted(
      {{MatchRoundIndex{1}, R"({"type":"type","text":"note"})"},
       {MatchRoundIndex{2},
        "All done.\n"
        R"({"type":"terminate","message":"typed 'note' into the editor; file not yet saved"})"}});
  auto dir = std::filesystem::temp_directory_path() / "coact_gui_test1";
  std::filesystem::remove_all(dir);
  TraceWriter trace(dir);
  WorkerReport report =
      run_gui_subtask(gui_assignment("type a note"), env, *model, 25, &trace, 1);
  CHECK(report.outcome == SubtaskOutcome::completed);
  CHECK(report.summary_or_message ==
        "typed 'note' into the editor; file not yet saved");
  // Terminate consumes no environment interaction.
  CHECK(report.env_interactions_used == 1);
  CHECK(read_trace(dir).size() == 1);
  CHECK(!report.final_screenshot.empty());
  std::filesystem::remove_all(dir);
}

TEST_CASE("each non-terminate action is exactly one interaction") {
  SimDesktopSession env("editor_open", kScreen, 0);
  auto model = scripted(
      {{MatchRoundIndex{1}, R"({"type":"move","x":10,"y":10})"},
       {MatchRoundIndex{2}, R"({"type":"type","text":"ab"})"},
       {MatchRoundIndex{3}, R"({"type":"hotkey","keys":["ctrl","s"]})"},
       {MatchAlways{}, R"({"type":"terminate","message":"saved"})"}});
  auto dir = std::filesystem::temp_directory_path() / "coact_gui_test2";
  std::filesystem::remove_all(dir);
  TraceWriter trace(dir);
  WorkerReport report =
      run_gui_subtask(gui_assignment("save"), env, *model, 25, &trace, 3);
  CHECK(report.env_interactions_used == 3);
  auto records = read_trace(dir);
  REQUIRE(records.size() == 3);
  for (const auto& rec : records) {
    CHECK(!rec.action.is_code());
    CHECK(rec.actor == Role::gui_agent);
    CHECK(rec.subtask_index == 3);
  }
  CHECK(env.state().files.at("/home/user/document.txt") == "ab");
  std::filesystem::remove_all(dir);
}

TEST_CASE("one malformed reply gets a corrective reprompt, two error out") {
  SimDesktopSession env("base", kScreen, 0);
  auto model = scripted(
      {{MatchRoundIndex{1}, "I click the icon"},  // no JSON object
       {MatchRoundIndex{2}, R"({"type":"terminate","message":"recovered"})"}});
  WorkerReport ok =
      run_gui_subtask(gui_assignment("x"), env, *model, 25, nullptr, 1);
  CHECK(ok.outcome == SubtaskOutcome::completed);
  CHECK(ok.summary_or_message == "recovered");

  auto bad = scripted({{MatchAlways{}, "never valid"}});
  WorkerReport err =
      run_gui_subtask(gui_assignment("x"), env, *bad, 25, nullptr, 1);
  CHECK(err.outcome == SubtaskOutcome::error);
  CHECK(bad->calls_made() == 2);
  CHECK(err.env_interactions_used == 0);
}

TEST_CASE("out-of-bounds coordinates are treated as malformed actions") {
  SimDesktopSession env("base", kScreen, 0);  // 160x120
  auto model = scripted(
      {{MatchRoundIndex{1}, R"({"type":"click","x":500,"y":10})"},
       {MatchAlways{}, R"({"type":"terminate","message":"gave up"})"}});
  WorkerReport report =
      run_gui_subtask(gui_assignment("x"), env, *model, 25, nullptr, 1);
  CHECK(report.outcome == SubtaskOutcome::completed);
  CHECK(report.env_interactions_used == 0);  // rejected before dispatch
}

TEST_CASE("budget exhaustion synthesizes a summary from recent actions") {
  SimDesktopSession env("base", kScreen, 0);
  auto model = scripted({{MatchAlways{}, R"({"type":"move","x":5,"y":5})"}});
  WorkerReport report =
      run_gui_subtask(gui_assignment("wander"), env, *model, 4, nullptr, 1);
  CHECK(report.outcome == SubtaskOutcome::budget_exhausted);
  CHECK(report.env_interactions_used == 4);
  CHECK(report.summary_or_message.find("budget exhausted after 4") !=
        std::string::npos);
  CHECK(report.summary_or_message.find(R"({"type":"move")") !=
        std::string::npos);
}

namespace {

class DeadSession : public SimDesktopSession {
 public:
  DeadSession() : SimDesktopSession("base", kScreen, 0) {}
  Observation perform_action(const GuiAction&) override {
    throw EnvError(EnvErrorKind::transport, "gone");
  }
};

}  // namespace

TEST_CASE("transport failure marks the report env_unreachable") {
  DeadSession env;
  auto model = scripted({{MatchAlways{}, R"({"type":"move","x":1,"y":1})"}});
  WorkerReport report =
      run_gui_subtask(gui_assignment("x"), env, *model, 25, nullptr, 1);
  CHECK(report.outcome == SubtaskOutcome::error);
  CHECK(report.env_unreachable);
}
