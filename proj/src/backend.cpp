#include "coact/backend.hpp"

#include <fstream>
#include <thread>

#include "httplib.h"

#include "coact/util.hpp"

namespace coact {

using nlohmann::json;

json render_chat_request(const Conversation& conversation,
                         const RoleConfig& config) {
  json messages = json::array();
  for (const auto& msg : conversation.messages()) {
    const char* wire_role = msg.role == Role::system ? "system"
                            : msg.role == conversation.owner() ? "assistant"
                                                                : "user";
    json content = json::array();
    for (const auto& part : msg.parts) {
      if (const auto* text = std::get_if<std::string>(&part)) {
        content.push_back({{"type", "text"}, {"text", *text}});
      } else {
        const auto& ref = std::get<ImageRef>(part);
        const auto& png = conversation.image(ref);
        content.push_back(
            {{"type", "image_url"},
             {"image_url",
              {{"url", "data:image/png;base64," +
                           base64_encode(std::span<const uint8_t>(png))}}}});
      }
    }
    messages.push_back({{"role", wire_role}, {"content", content}});
  }
  return {{"model", config.model_name},
          {"temperature", config.temperature},
          {"messages", messages}};
}

std::string request_digest(const json& request_body) {
  json canonical = request_body;
  canonical.erase("stream");
  canonical.erase("user");
  return md5_hex(canonical.dump());
}

// --- Scripted ---

std::string ScriptedBackend::chat(const Conversation& conversation,
                                  const RoleConfig&) {
  std::lock_guard lock(mutex_);
  ++calls_;
  std::string last_text;
  if (!conversation.messages().empty()) {
    for (const auto& part : conversation.messages().back().parts) {
      if (const auto* text = std::get_if<std::string>(&part)) {
        last_text += *text;
        last_text += '\n';
      }
    }
  }
  for (const auto& rule : rules_) {
    bool hit = std::visit(
        [&](const auto& m) {
          using T = std::decay_t<decltype(m)>;
          if constexpr (std::is_same_v<T, MatchAlways>) return true;
          else if constexpr (std::is_same_v<T, MatchSubstring>)
            return last_text.find(m.needle) != std::string::npos;
          else
            return m.index == calls_;
        },
        rule.matcher);
    if (hit) return rule.reply;
  }
  throw BackendError(BackendErrorKind::permanent,
                     "scripted backend: no rule matched call " +
                         std::to_string(calls_));
}

std::vector<ScriptedReply> scripted_rules_from_json(const json& arr) {
  std::vector<ScriptedReply> rules;
  for (const auto& item : arr) {
    ScriptedReply rule;
    const auto& match = item.at("match");
    if (match.is_string() && match.get<std::string>() == "always") {
      rule.matcher = MatchAlways{};
    } else if (match.is_object() && match.contains("substring")) {
      rule.matcher = MatchSubstring{match["substring"].get<std::string>()};
    } else if (match.is_object() && match.contains("round_index")) {
      rule.matcher = MatchRoundIndex{match["round_index"].get<int>()};
    } else {
      throw ProtocolError("bad scripted matcher: " + match.dump());
    }
    rule.reply = item.at("reply").get<std::string>();
    rules.push_back(std::move(rule));
  }
  return rules;
}

// --- Recording / replay ---

RecordingBackend::RecordingBackend(BackendPtr inner,
                                   const std::filesystem::path& log_path)
    : inner_(std::move(inner)), log_path_(log_path) {
  std::ofstream out(log_path_, std::ios::trunc);  // start a fresh log
}

std::string RecordingBackend::chat(const Conversation& conversation,
                                   const RoleConfig& config) {
  std::string digest = request_digest(render_chat_request(conversation, config));
  std::string reply = inner_->chat(conversation, config);
  std::lock_guard lock(mutex_);
  std::ofstream out(log_path_, std::ios::app);
  out << json{{"digest", digest}, {"reply", reply}}.dump() << '\n';
  return reply;
}

ReplayBackend::ReplayBackend(const std::filesystem::path& log_path,
                             bool strict)
    : strict_(strict) {
  std::ifstream in(log_path);
  if (!in)
    throw BackendError(BackendErrorKind::permanent,
                       "replay log not found: " + log_path.string());
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json obj = json::parse(line);
    entries_.push_back(
        {obj.at("digest").get<std::string>(), obj.at("reply").get<std::string>()});
  }
}

std::string ReplayBackend::chat(const Conversation& conversation,
                                const RoleConfig& config) {
  std::lock_guard lock(mutex_);
  if (index_ >= entries_.size())
    throw ReplayExhausted("replay log exhausted after " +
                          std::to_string(entries_.size()) + " calls");
  const Entry& entry = entries_[index_++];
  if (strict_) {
    std::string digest =
        request_digest(render_chat_request(conversation, config));
    if (digest != entry.digest)
      throw ReplayMismatch("replay digest mismatch at call " +
                           std::to_string(index_) + ": expected " +
                           entry.digest + ", got " + digest);
  }
  return entry.reply;
}

size_t ReplayBackend::calls_remaining() const {
  std::lock_guard lock(mutex_);
  return entries_.size() - index_;
}

// --- HTTP ---

HttpBackend::HttpBackend(HttpBackendConfig config, Sleeper sleeper)
    : config_(std::move(config)), sleeper_(std::move(sleeper)) {
  if (!sleeper_) {
    sleeper_ = [](double s) {
      std::this_thread::sleep_for(std::chrono::duration<double>(s));
    };
  }
}

std::string HttpBackend::chat(const Conversation& conversation,
                              const RoleConfig& config) {
  json body = render_chat_request(conversation, config);
  if (body["model"].get<std::string>().empty() && !config_.model_name.empty())
    body["model"] = config_.model_name;

  // Split endpoint into origin + path.
  std::string endpoint = config_.endpoint;
  size_t scheme_end = endpoint.find("://");
  if (scheme_end == std::string::npos)
    throw BackendError(BackendErrorKind::permanent,
                       "bad endpoint: " + endpoint);
  size_t path_start = endpoint.find('/', scheme_end + 3);
  std::string origin = path_start == std::string::npos
                           ? endpoint
                           : endpoint.substr(0, path_start);
  std::string path =
      path_start == std::string::npos ? "/" : endpoint.substr(path_start);

  httplib::Headers headers;
  if (!config_.api_key_env_var.empty()) {
    const char* key = std::getenv(config_.api_key_env_var.c_str());
    if (key && *key)
      headers.emplace("Authorization", std::string("Bearer ") + key);
  }

  double backoff = config_.initial_backoff_s;
  std::string last_error;
  for (int attempt = 1; attempt <= config_.max_attempts; ++attempt) {
    httplib::Client client(origin);
    client.set_read_timeout(120, 0);
    auto res = client.Post(path, headers, body.dump(), "application/json");
    if (res) {
      if (res->status >= 200 && res->status < 300) {
        json reply = json::parse(res->body, nullptr, false);
        if (reply.is_discarded() || !reply.contains("choices") ||
            reply["choices"].empty()) {
          throw BackendError(BackendErrorKind::permanent,
                             "malformed completion response");
        }
        const auto& content = reply["choices"][0]["message"]["content"];
        return content.is_string() ? content.get<std::string>()
                                   : content.dump();
      }
      if (res->status >= 400 && res->status < 500) {
        throw BackendError(BackendErrorKind::permanent,
                           "backend returned " + std::to_string(res->status) +
                               ": " + res->body);
      }
      last_error = "status " + std::to_string(res->status);
    } else {
      last_error = "transport: " + httplib::to_string(res.error());
    }
    if (attempt < config_.max_attempts) {
      sleeper_(backoff);
      backoff *= 2;
    }
  }
  throw BackendError(BackendErrorKind::transient,
                     "backend unreachable after " +
                         std::to_string(config_.max_attempts) +
                         " attempts: " + last_error);
}

// --- BackendSet / config ---

void BackendSet::validate() const {
  if (!orchestrator || !programmer || !gui || !summarizer)
    throw ProtocolError("backend set requires all four roles");
}

namespace {

BackendPtr backend_from_json(const json& cfg,
                             const std::filesystem::path& base_dir) {
  std::string kind = cfg.at("kind").get<std::string>();
  if (kind == "scripted") {
    json rules;
    if (cfg.contains("rules")) {
      rules = cfg["rules"];
    } else {
      std::ifstream in(base_dir / cfg.at("script_path").get<std::string>());
      if (!in) throw ProtocolError("scripted rules file not found");
      in >> rules;
    }
    return std::make_shared<ScriptedBackend>(scripted_rules_from_json(rules));
  }
  if (kind == "replay") {
    return std::make_shared<ReplayBackend>(
        base_dir / cfg.at("script_path").get<std::string>(),
        cfg.value("strict", false));
  }
  if (kind == "http") {
    HttpBackendConfig hc;
    hc.endpoint = cfg.at("endpoint").get<std::string>();
    hc.model_name = cfg.value("model_name", "");
    hc.api_key_env_var = cfg.value("api_key_env_var", "");
    hc.temperature = cfg.value("temperature", 0.0);
    return std::make_shared<HttpBackend>(std::move(hc));
  }
  throw ProtocolError("unknown backend kind: " + kind);
}

}  // namespace

BackendSet backend_set_from_json(const json& config,
                                 const std::filesystem::path& base_dir) {
  const auto& roles = config.at("roles");
  BackendSet set;
  std::map<std::string, BackendPtr> cache;
  auto get = [&](const char* role) -> BackendPtr {
    const json& cfg = roles.at(role);
    std::string key = cfg.dump();
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;  // shared instance per config
    BackendPtr backend = backend_from_json(cfg, base_dir);
    cache[key] = backend;
    return backend;
  };
  set.orchestrator = get("orchestrator");
  set.programmer = get("programmer");
  set.gui = get("gui");
  set.summarizer = get("summarizer");
  return set;
}

BackendSet load_backend_set(const std::filesystem::path& config_path) {
  std::ifstream in(config_path);
  if (!in)
    throw ProtocolError("backend config not found: " + config_path.string());
  json config;
  in >> config;
  return backend_set_from_json(config, config_path.parent_path());
}

}  // namespace coact
