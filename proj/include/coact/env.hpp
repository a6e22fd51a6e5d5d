#pragma once

#include <memory>
#include <string>
#include <utility>

#include "coact/types.hpp"

namespace coact {

enum class EnvErrorKind {
  transport,
  session_expired,
  unknown_snapshot,
  bad_action,
};

class EnvError : public std::runtime_error {
 public:
  EnvError(EnvErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  EnvErrorKind kind() const { return kind_; }

 private:
  EnvErrorKind kind_;
};

// Script dialect the session executes. Real sessions run POSIX shells and
// Python; the simulator accepts its documented effect-command subset.
enum class ScriptDialect { posix, sim_effects };

// One session = one task, exclusive sequential use.
class EnvironmentSession {
 public:
  virtual ~EnvironmentSession() = default;

  virtual std::string session_id() const = 0;
  virtual ScreenSize screen() const = 0;
  virtual ScriptDialect script_dialect() const = 0;

  virtual std::pair<ExecResult, Observation> execute_script(
      const CodeAction& action, double timeout_s) = 0;
  virtual Observation perform_action(const GuiAction& action) = 0;
  virtual Observation capture_screenshot() = 0;
  virtual void reset(const std::string& snapshot_id) = 0;
};

}  // namespace coact
