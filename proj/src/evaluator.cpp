#include "coact/evaluator.hpp"

#include <regex>

#include "coact/util.hpp"

namespace coact {

using nlohmann::json;

const char* verdict_name(Verdict verdict) {
  switch (verdict) {
    case Verdict::pass: return "pass";
    case Verdict::fail: return "fail";
    case Verdict::indeterminate: return "indeterminate";
  }
  return "unknown";
}

namespace {

bool is_md5_hex(const std::string& s) {
  if (s.size() != 32) return false;
  for (char c : s)
    if (!((c >= '0' && c <= '9') || (c >= 'a' && c <= 'f'))) return false;
  return true;
}

void require_abs_path(const std::string& path, const char* where) {
  if (path.empty() || path[0] != '/')
    throw EvalParseError("path must be absolute: " + path, where);
}

ExecResult run_atom_script(EnvironmentSession& env, Language lang,
                           const std::string& source) {
  auto [result, obs] = env.execute_script({lang, source}, 60.0);
  return result;
}

// Reads file content through the environment; exit != 0 means missing.
std::pair<bool, std::string> read_remote_file(EnvironmentSession& env,
                                              const std::string& path) {
  ExecResult result =
      env.script_dialect() == ScriptDialect::sim_effects
          ? run_atom_script(env, Language::bash, "read_file " + path)
          : run_atom_script(env, Language::bash, "cat '" + path + "'");
  return {result.exit_code == 0, result.stdout_text};
}

bool evaluate_atom(const AtomicCheck& atom, EnvironmentSession& env) {
  return std::visit(
      [&](const auto& check) -> bool {
        using T = std::decay_t<decltype(check)>;
        if constexpr (std::is_same_v<T, FileExists>) {
          ExecResult result =
              env.script_dialect() == ScriptDialect::sim_effects
                  ? run_atom_script(env, Language::bash,
                                    "read_file " + check.path)
                  : run_atom_script(env, Language::bash,
                                    "test -f '" + check.path + "'");
          return result.exit_code == 0;
        } else if constexpr (std::is_same_v<T, FileMd5Equals>) {
          if (env.script_dialect() == ScriptDialect::sim_effects) {
            auto [ok, content] = read_remote_file(env, check.path);
            return ok && md5_hex(content) == check.digest;
          }
          ExecResult result = run_atom_script(
              env, Language::bash, "md5sum '" + check.path + "'");
          return result.exit_code == 0 &&
                 result.stdout_text.substr(0, 32) == check.digest;
        } else if constexpr (std::is_same_v<T, FileContentMatches>) {
          auto [ok, content] = read_remote_file(env, check.path);
          if (!ok) return false;
          return std::regex_search(content, std::regex(check.pattern));
        } else {  // ScriptPredicate
          ExecResult result = run_atom_script(env, check.script.language,
                                              check.script.source);
          return result.exit_code == 0;
        }
      },
      atom.check);
}

}  // namespace

void EvaluatorExpr::validate() const {
  if (kind == Kind::atom) {
    if (!children.empty())
      throw EvalParseError("atom with children", "validate");
    return;
  }
  if (children.size() < 2)
    throw EvalParseError("and/or needs >= 2 children", "validate");
  for (const auto& child : children) child->validate();
}

Verdict evaluate(const EvaluatorExpr& expr, EnvironmentSession& env) {
  switch (expr.kind) {
    case EvaluatorExpr::Kind::atom:
      try {
        return evaluate_atom(expr.atom, env) ? Verdict::pass : Verdict::fail;
      } catch (const EnvError&) {
        return Verdict::indeterminate;
      }
    case EvaluatorExpr::Kind::logical_and:
      for (const auto& child : expr.children) {
        Verdict v = evaluate(*child, env);
        if (v != Verdict::pass) return v;
      }
      return Verdict::pass;
    case EvaluatorExpr::Kind::logical_or:
      for (const auto& child : expr.children) {
        Verdict v = evaluate(*child, env);
        if (v != Verdict::fail) return v;
      }
      return Verdict::fail;
  }
  return Verdict::indeterminate;
}

EvaluatorExprPtr parse_evaluator(const json& spec) {
  if (!spec.is_object() || spec.size() != 1)
    throw EvalParseError("expected an object with exactly one key",
                         spec.dump().substr(0, 80));
  auto expr = std::make_shared<EvaluatorExpr>();
  const auto& [key, value] = *spec.items().begin();

  if (key == "and" || key == "or") {
    expr->kind = key == "and" ? EvaluatorExpr::Kind::logical_and
                              : EvaluatorExpr::Kind::logical_or;
    if (!value.is_array() || value.size() < 2)
      throw EvalParseError(key + " requires an array of >= 2 children",
                           spec.dump().substr(0, 80));
    for (const auto& child : value)
      expr->children.push_back(parse_evaluator(child));
    return expr;
  }

  expr->kind = EvaluatorExpr::Kind::atom;
  if (key == "file_exists") {
    if (!value.is_string())
      throw EvalParseError("file_exists takes a path string", key);
    require_abs_path(value.get<std::string>(), "file_exists");
    expr->atom.check = FileExists{value.get<std::string>()};
  } else if (key == "md5") {
    std::string path = value.at("path").get<std::string>();
    std::string digest = value.at("digest").get<std::string>();
    require_abs_path(path, "md5");
    if (!is_md5_hex(digest))
      throw EvalParseError("digest must be 32 lowercase hex chars", "md5");
    expr->atom.check = FileMd5Equals{path, digest};
  } else if (key == "content_matches") {
    std::string path = value.at("path").get<std::string>();
    require_abs_path(path, "content_matches");
    std::string pattern = value.at("pattern").get<std::string>();
    try {
      std::regex probe(pattern);
    } catch (const std::regex_error& e) {
      throw EvalParseError(std::string("bad pattern: ") + e.what(),
                           "content_matches");
    }
    expr->atom.check = FileContentMatches{path, pattern};
  } else if (key == "script") {
    std::string lang = value.at("language").get<std::string>();
    if (lang != "python" && lang != "bash")
      throw EvalParseError("script language must be python|bash", "script");
    std::string source = value.at("source").get<std::string>();
    if (source.empty())
      throw EvalParseError("script source must be non-empty", "script");
    expr->atom.check = ScriptPredicate{
        {lang == "python" ? Language::python : Language::bash, source}};
  } else {
    throw EvalParseError("unknown evaluator key: " + key, key);
  }
  return expr;
}

EvaluatorExprPtr parse_evaluator_text(const std::string& spec_text) {
  json spec = json::parse(spec_text, nullptr, false);
  if (spec.is_discarded())
    throw EvalParseError("invalid JSON", spec_text.substr(0, 80));
  return parse_evaluator(spec);
}

json serialize_evaluator(const EvaluatorExpr& expr) {
  switch (expr.kind) {
    case EvaluatorExpr::Kind::logical_and:
    case EvaluatorExpr::Kind::logical_or: {
      json children = json::array();
      for (const auto& child : expr.children)
        children.push_back(serialize_evaluator(*child));
      return {{expr.kind == EvaluatorExpr::Kind::logical_and ? "and" : "or",
               children}};
    }
    case EvaluatorExpr::Kind::atom:
      return std::visit(
          [](const auto& check) -> json {
            using T = std::decay_t<decltype(check)>;
            if constexpr (std::is_same_v<T, FileExists>)
              return {{"file_exists", check.path}};
            else if constexpr (std::is_same_v<T, FileMd5Equals>)
              return {{"md5", {{"path", check.path}, {"digest", check.digest}}}};
            else if constexpr (std::is_same_v<T, FileContentMatches>)
              return {{"content_matches",
                       {{"path", check.path}, {"pattern", check.pattern}}}};
            else
              return {{"script",
                       {{"language", language_name(check.script.language)},
                        {"source", check.script.source}}}};
          },
          expr.atom.check);
  }
  return {};
}

}  // namespace coact
