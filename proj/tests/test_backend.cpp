#include <atomic>
#include <filesystem>
#include <thread>

#include "doctest.h"
#include "httplib.h"

#include "coact/backend.hpp"
#include "coact/util.hpp"

using namespace coact;
using nlohmann::json;

TEST_CASE("render_chat_request: roles and image encoding") {
  Conversation conv(Role::gui_agent);
  conv.append_text(Role::system, "sys");
  conv.append_text(Role::orchestrator, "task");
  std::vector<uint8_t> png = {1, 2, 3, 4};
  conv.append_with_image(Role::gui_interpreter, "screen", png);
  conv.append_text(Role::gui_agent, "reply");

  json req = render_chat_request(conv, {"model-x", 0.25});
  CHECK(req["model"] == "model-x");
  CHECK(req["temperature"] == 0.25);
  const auto& msgs = req["messages"];
  REQUIRE(msgs.size() == 4);
  CHECK(msgs[0]["role"] == "system");
  CHECK(msgs[1]["role"] == "user");       // non-owner
  CHECK(msgs[2]["role"] == "user");
  CHECK(msgs[3]["role"] == "assistant");  // owner speaks as assistant
  // base64(\x01\x02\x03\x04) = "AQIDBA==", precomputed.
  std::string url = msgs[2]["content"][1]["image_url"]["url"];
  CHECK(url == "data:image/png;base64,AQIDBA==");
}

TEST_CASE("request_digest ignores volatile fields") {
  json a = {{"model", "m"}, {"messages", json::array()}, {"stream", true}};
  json b = {{"model", "m"}, {"messages", json::array()}, {"user", "u1"}};
  CHECK(request_digest(a) == request_digest(b));
  json c = {{"model", "other"}, {"messages", json::array()}};
  CHECK(request_digest(a) != request_digest(c));
}

TEST_CASE("scripted backend: first matching rule wins, in order") {
  auto rules = scripted_rules_from_json(json::parse(R"([
    {"match": {"substring": "save the file"}, "reply": "A"},
    {"match": {"round_index": 2}, "reply": "B"},
    {"match": "always", "reply": "C"}
  ])"));
  ScriptedBackend backend(std::move(rules));
  Conversation conv(Role::coding_agent);
  conv.append_text(Role::orchestrator, "please save the file now");
  CHECK(backend.chat(conv, {}) == "A");  // substring beats round_index
  conv.append_text(Role::orchestrator, "anything");
  CHECK(backend.chat(conv, {}) == "B");  // call 2
  CHECK(backend.chat(conv, {}) == "C");  // always
  CHECK(backend.calls_made() == 3);
}

TEST_CASE("scripted backend: substring matches only the latest message") {
  auto rules = scripted_rules_from_json(json::parse(R"([
    {"match": {"substring": "older"}, "reply": "X"},
    {"match": "always", "reply": "Y"}
  ])"));
  ScriptedBackend backend(std::move(rules));
  Conversation conv(Role::coding_agent);
  conv.append_text(Role::orchestrator, "older text");
  conv.append_text(Role::code_interpreter, "newest text");
  CHECK(backend.chat(conv, {}) == "Y");
}

TEST_CASE("scripted backend: no match is a permanent error") {
  ScriptedBackend backend({{MatchSubstring{"never"}, "Z"}});
  Conversation conv(Role::coding_agent);
  conv.append_text(Role::orchestrator, "hello");
  try {
    backend.chat(conv, {});
    FAIL("expected throw");
  } catch (const BackendError& e) {
    CHECK(e.kind() == BackendErrorKind::permanent);
  }
}

TEST_CASE("record then replay: identical replies, exhaustion, mismatch") {
  auto dir = std::filesystem::temp_directory_path() / "coact_backend_test";
  std::filesystem::create_directories(dir);
  auto log = dir / "replies.jsonl";

  auto inner = std::make_shared<ScriptedBackend>(
      std::vector<ScriptedReply>{{MatchAlways{}, "the reply"}});
  RecordingBackend recorder(inner, log);
  Conversation conv(Role::orchestrator);
  conv.append_text(Role::system, "s");
  CHECK(recorder.chat(conv, {"m", 0.0}) == "the reply");
  CHECK(recorder.chat(conv, {"m", 0.0}) == "the reply");

  ReplayBackend replay(log, /*strict=*/true);
  CHECK(replay.calls_remaining() == 2);
  CHECK(replay.chat(conv, {"m", 0.0}) == "the reply");
  CHECK(replay.chat(conv, {"m", 0.0}) == "the reply");
  CHECK_THROWS_AS(replay.chat(conv, {"m", 0.0}), ReplayExhausted);

  // Strict replay refuses a diverging request.
  ReplayBackend strict(log, /*strict=*/true);
  conv.append_text(Role::orchestrator, "divergence");
  CHECK_THROWS_AS(strict.chat(conv, {"m", 0.0}), ReplayMismatch);
  std::filesystem::remove_all(dir);
}

TEST_CASE("backend set config: shared instances and validation") {
  json config = json::parse(R"({
    "version": 1,
    "roles": {
      "orchestrator": {"kind":"scripted","rules":[{"match":"always","reply":"o"}]},
      "programmer":   {"kind":"scripted","rules":[{"match":"always","reply":"p"}]},
      "gui":          {"kind":"scripted","rules":[{"match":"always","reply":"p"}]},
      "summarizer":   {"kind":"scripted","rules":[{"match":"always","reply":"p"}]}
    }
  })");
  // gui/summarizer differ from programmer only by object identity of the
  // config text; identical configs share one instance.
  config["roles"]["gui"] = config["roles"]["programmer"];
  config["roles"]["summarizer"] = config["roles"]["programmer"];
  BackendSet set = backend_set_from_json(config, ".");
  set.validate();
  CHECK(set.programmer == set.gui);
  CHECK(set.programmer == set.summarizer);
  CHECK(set.orchestrator != set.programmer);

  BackendSet incomplete;
  CHECK_THROWS_AS(incomplete.validate(), ProtocolError);
}

namespace {

struct ServerFixture {
  httplib::Server server;
  std::thread thread;
  int port = 0;

  explicit ServerFixture() {
    port = server.bind_to_any_port("127.0.0.1");
    thread = std::thread([this] { server.listen_after_bind(); });
    server.wait_until_ready();
  }
  ~ServerFixture() {
    server.stop();
    thread.join();
  }
};

json completion(const std::string& text) {
  return {{"choices",
           {{{"message", {{"role", "assistant"}, {"content", text}}}}}}};
}

}  // namespace

TEST_CASE("http backend: success, auth header from env var only") {
  ServerFixture fx;
  std::string seen_auth;
  fx.server.Post("/v1/chat/completions",
                 [&](const httplib::Request& req, httplib::Response& res) {
                   seen_auth = req.get_header_value("Authorization");
                   json body = json::parse(req.body);
                   CHECK(body.contains("messages"));
                   res.set_content(completion("hi there").dump(),
                                   "application/json");
                 });
  setenv("COACT_TEST_KEY", "sekrit", 1);
  HttpBackendConfig cfg;
  cfg.endpoint =
      "http://127.0.0.1:" + std::to_string(fx.port) + "/v1/chat/completions";
  cfg.api_key_env_var = "COACT_TEST_KEY";
  HttpBackend backend(cfg, [](double) {});
  Conversation conv(Role::orchestrator);
  conv.append_text(Role::system, "s");
  CHECK(backend.chat(conv, {"m", 0.0}) == "hi there");
  CHECK(seen_auth == "Bearer sekrit");
  unsetenv("COACT_TEST_KEY");
}

TEST_CASE("http backend: retries 5xx with exponential backoff then succeeds") {
  ServerFixture fx;
  std::atomic<int> hits{0};
  fx.server.Post("/chat", [&](const httplib::Request&, httplib::Response& res) {
    if (++hits < 3) {
      res.status = 503;
      return;
    }
    res.set_content(completion("ok").dump(), "application/json");
  });
  std::vector<double> sleeps;
  HttpBackendConfig cfg;
  cfg.endpoint = "http://127.0.0.1:" + std::to_string(fx.port) + "/chat";
  cfg.initial_backoff_s = 1.0;
  HttpBackend backend(cfg, [&](double s) { sleeps.push_back(s); });
  Conversation conv(Role::orchestrator);
  conv.append_text(Role::system, "s");
  CHECK(backend.chat(conv, {"m", 0.0}) == "ok");
  CHECK(hits == 3);
  CHECK(sleeps == std::vector<double>{1.0, 2.0});  // doubling from 1s
}

TEST_CASE("http backend: 4xx is permanent, no retry") {
  ServerFixture fx;
  std::atomic<int> hits{0};
  fx.server.Post("/chat", [&](const httplib::Request&, httplib::Response& res) {
    ++hits;
    res.status = 400;
    res.set_content("bad request", "text/plain");
  });
  HttpBackendConfig cfg;
  cfg.endpoint = "http://127.0.0.1:" + std::to_string(fx.port) + "/chat";
  HttpBackend backend(cfg, [](double) {});
  Conversation conv(Role::orchestrator);
  conv.append_text(Role::system, "s");
  try {
    backend.chat(conv, {"m", 0.0});
    FAIL("expected throw");
  } catch (const BackendError& e) {
    CHECK(e.kind() == BackendErrorKind::permanent);
  }
  CHECK(hits == 1);
}

TEST_CASE("http backend: exhausted retries raise transient") {
  HttpBackendConfig cfg;
  cfg.endpoint = "http://127.0.0.1:1/chat";  // nothing listens here
  cfg.max_attempts = 3;
  std::vector<double> sleeps;
  HttpBackend backend(cfg, [&](double s) { sleeps.push_back(s); });
  Conversation conv(Role::orchestrator);
  conv.append_text(Role::system, "s");
  try {
    backend.chat(conv, {"m", 0.0});
    FAIL("expected throw");
  } catch (const BackendError& e) {
    CHECK(e.kind() == BackendErrorKind::transient);
  }
  CHECK(sleeps.size() == 2);  // attempts-1 sleeps
}
