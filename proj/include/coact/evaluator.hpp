#pragma once

#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

#include "coact/env.hpp"
#include "coact/types.hpp"

namespace coact {

struct FileExists {
  std::string path;
};
struct FileMd5Equals {
  std::string path;
  std::string digest;  // 32 lowercase hex chars
};
struct FileContentMatches {
  std::string path;
  std::string pattern;  // ECMAScript regular expression, partial match
};
struct ScriptPredicate {
  CodeAction script;  // exit 0 means true; may have side effects
};

struct AtomicCheck {
  std::variant<FileExists, FileMd5Equals, FileContentMatches, ScriptPredicate>
      check;
};

// Boolean AND/OR tree over atomic execution-based checks.
struct EvaluatorExpr {
  enum class Kind { atom, logical_and, logical_or };
  Kind kind = Kind::atom;
  AtomicCheck atom;                                      // kind == atom
  std::vector<std::shared_ptr<EvaluatorExpr>> children;  // and/or, >= 2

  void validate() const;
};

using EvaluatorExprPtr = std::shared_ptr<EvaluatorExpr>;

// Infrastructure failure never masquerades as agent failure.
enum class Verdict { pass, fail, indeterminate };

const char* verdict_name(Verdict verdict);

// Short-circuit left-to-right evaluation against the post-run environment.
// A transport failure aborts with `indeterminate`.
Verdict evaluate(const EvaluatorExpr& expr, EnvironmentSession& env);

class EvalParseError : public std::runtime_error {
 public:
  EvalParseError(const std::string& what, const std::string& where)
      : std::runtime_error(what + " (at " + where + ")") {}
};

// Grammar: {"and":[..]} | {"or":[..]} | {"file_exists": path} |
// {"md5":{"path":..,"digest":..}} | {"content_matches":{"path":..,
// "pattern":..}} | {"script":{"language":..,"source":..}}
EvaluatorExprPtr parse_evaluator(const nlohmann::json& spec);
EvaluatorExprPtr parse_evaluator_text(const std::string& spec_text);
nlohmann::json serialize_evaluator(const EvaluatorExpr& expr);

}  // namespace coact
