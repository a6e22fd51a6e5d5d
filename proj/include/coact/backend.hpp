#pragma once

#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

#include "coact/types.hpp"

namespace coact {

enum class BackendErrorKind { transient, permanent };

class BackendError : public std::runtime_error {
 public:
  BackendError(BackendErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  BackendErrorKind kind() const { return kind_; }

 private:
  BackendErrorKind kind_;
};

class ReplayExhausted : public BackendError {
 public:
  explicit ReplayExhausted(const std::string& what)
      : BackendError(BackendErrorKind::permanent, what) {}
};

class ReplayMismatch : public BackendError {
 public:
  explicit ReplayMismatch(const std::string& what)
      : BackendError(BackendErrorKind::permanent, what) {}
};

struct RoleConfig {
  std::string model_name;
  double temperature = 0.0;
};

class ModelBackend {
 public:
  virtual ~ModelBackend() = default;
  virtual std::string chat(const Conversation& conversation,
                           const RoleConfig& config) = 0;
};

using BackendPtr = std::shared_ptr<ModelBackend>;

// Chat-completions request body: text parts verbatim, images as base64 data
// URLs. Messages authored by the conversation owner map to "assistant".
nlohmann::json render_chat_request(const Conversation& conversation,
                                   const RoleConfig& config);

// md5 of the canonicalized request body, volatile fields stripped.
std::string request_digest(const nlohmann::json& request_body);

// --- Scripted backend (tests / fixtures) ---

struct MatchAlways {};
struct MatchSubstring {
  std::string needle;
};
struct MatchRoundIndex {
  int index;  // 1-based chat-call index on this backend instance
};

struct ScriptedReply {
  std::variant<MatchAlways, MatchSubstring, MatchRoundIndex> matcher;
  std::string reply;
};

class ScriptedBackend : public ModelBackend {
 public:
  explicit ScriptedBackend(std::vector<ScriptedReply> rules)
      : rules_(std::move(rules)) {}

  std::string chat(const Conversation& conversation,
                   const RoleConfig& config) override;

  int calls_made() const { return calls_; }

 private:
  std::vector<ScriptedReply> rules_;
  int calls_ = 0;
  std::mutex mutex_;
};

std::vector<ScriptedReply> scripted_rules_from_json(const nlohmann::json& arr);

// --- Record / replay ---

class RecordingBackend : public ModelBackend {
 public:
  RecordingBackend(BackendPtr inner, const std::filesystem::path& log_path);
  std::string chat(const Conversation& conversation,
                   const RoleConfig& config) override;

 private:
  BackendPtr inner_;
  std::filesystem::path log_path_;
  std::mutex mutex_;
};

class ReplayBackend : public ModelBackend {
 public:
  ReplayBackend(const std::filesystem::path& log_path, bool strict = false);
  std::string chat(const Conversation& conversation,
                   const RoleConfig& config) override;

  size_t calls_remaining() const;

 private:
  struct Entry {
    std::string digest;
    std::string reply;
  };
  std::vector<Entry> entries_;
  size_t index_ = 0;
  bool strict_;
  mutable std::mutex mutex_;
};

// --- HTTP backend ---

struct HttpBackendConfig {
  std::string endpoint;  // e.g. http://host:port/v1/chat/completions
  std::string model_name;
  std::string api_key_env_var;  // key read from this env var, never inline
  double temperature = 0.0;
  int max_attempts = 3;
  double initial_backoff_s = 1.0;
};

class HttpBackend : public ModelBackend {
 public:
  using Sleeper = std::function<void(double)>;

  explicit HttpBackend(HttpBackendConfig config, Sleeper sleeper = {});
  std::string chat(const Conversation& conversation,
                   const RoleConfig& config) override;

 private:
  HttpBackendConfig config_;
  Sleeper sleeper_;
};

struct BackendSet {
  BackendPtr orchestrator;
  BackendPtr programmer;
  BackendPtr gui;
  BackendPtr summarizer;

  void validate() const;
};

// Loads a per-role backend config file:
//   {"version": 1, "roles": {"orchestrator": {"kind": "scripted", ...}, ...}}
// kinds: http (endpoint, model_name, api_key_env_var, temperature),
// scripted (script_path or inline rules), replay (script_path, strict).
BackendSet load_backend_set(const std::filesystem::path& config_path);
BackendSet backend_set_from_json(const nlohmann::json& config,
                                 const std::filesystem::path& base_dir);

}  // namespace coact
