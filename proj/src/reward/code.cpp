// Copyright (c) 2026, The rlpipe Authors
// SPDX-License-Identifier: Apache-2.0

#include "rlpipe/reward/code.hpp"

#include <algorithm>
#include <cctype>
#include <cinttypes>
#include <cstdio>
#include <limits>
#include <map>
#include <memory>
#include <regex>
#include <sstream>

#include "rlpipe/core/digest.hpp"
#include "rlpipe/core/errors.hpp"

namespace rlpipe::reward {
namespace {

std::string_view trim_view(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto nl = text.find('\n', start);
    if (nl == std::string_view::npos) {
      lines.push_back(text.substr(start));
      break;
    }
    lines.push_back(text.substr(start, nl - start));
    start = nl + 1;
  }
  return lines;
}

bool info_matches(std::string_view info, CodeLanguage hint) {
  info = trim_view(info);
  const auto sp = info.find_first_of(" \t{");
  std::string word(info.substr(0, sp));
  std::transform(word.begin(), word.end(), word.begin(), [](unsigned char c) { return std::tolower(c); });
  if (hint == CodeLanguage::python) return word == "python" || word == "py" || word == "python3";
  return word == "cpp" || word == "c++" || word == "cxx" || word == "cc";
}

bool valid_identifier(const std::string& s) {
  if (s.empty() || !(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
  return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isalnum(c) || c == '_'; });
}

// ---- C++ literal typing -------------------------------------------------

struct CppType {
  enum class Kind { unknown, boolean, i32, i64, u64, f64, str, vec, map } kind = Kind::unknown;
  std::shared_ptr<CppType> elem;
};

using CppTypePtr = std::shared_ptr<CppType>;

CppTypePtr make_type(CppType::Kind k, CppTypePtr elem = nullptr) {
  auto t = std::make_shared<CppType>();
  t->kind = k;
  t->elem = std::move(elem);
  return t;
}

bool is_int_kind(CppType::Kind k) {
  return k == CppType::Kind::i32 || k == CppType::Kind::i64 || k == CppType::Kind::u64;
}

CppTypePtr unify(const CppTypePtr& a, const CppTypePtr& b) {
  using K = CppType::Kind;
  if (!a || !b) return nullptr;
  if (a->kind == K::unknown) return b;
  if (b->kind == K::unknown) return a;
  if (a->kind == b->kind) {
    if (a->kind == K::vec || a->kind == K::map) {
      auto e = unify(a->elem, b->elem);
      return e ? make_type(a->kind, e) : nullptr;
    }
    return a;
  }
  if (is_int_kind(a->kind) && is_int_kind(b->kind)) {
    // u64 mixed with signed values has no common exact type.
    if (a->kind == K::u64 || b->kind == K::u64) return nullptr;
    return make_type(K::i64);
  }
  const bool a_num = is_int_kind(a->kind) || a->kind == K::f64;
  const bool b_num = is_int_kind(b->kind) || b->kind == K::f64;
  if (a_num && b_num) return make_type(K::f64);
  return nullptr;
}

CppTypePtr infer(const Json& v) {
  using K = CppType::Kind;
  switch (v.type()) {
    case Json::value_t::boolean: return make_type(K::boolean);
    case Json::value_t::number_integer: {
      const auto x = v.get<std::int64_t>();
      const bool fits = x >= std::numeric_limits<std::int32_t>::min() && x <= std::numeric_limits<std::int32_t>::max();
      return make_type(fits ? K::i32 : K::i64);
    }
    case Json::value_t::number_unsigned: {
      const auto x = v.get<std::uint64_t>();
      if (x <= static_cast<std::uint64_t>(std::numeric_limits<std::int32_t>::max())) return make_type(K::i32);
      if (x <= static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max())) return make_type(K::i64);
      return make_type(K::u64);
    }
    case Json::value_t::number_float: return make_type(K::f64);
    case Json::value_t::string: return make_type(K::str);
    case Json::value_t::array: {
      auto elem = make_type(K::unknown);
      for (const auto& e : v) {
        elem = unify(elem, infer(e));
        if (!elem) return nullptr;
      }
      return make_type(K::vec, elem);
    }
    case Json::value_t::object: {
      auto elem = make_type(K::unknown);
      for (const auto& [k, e] : v.items()) {
        elem = unify(elem, infer(e));
        if (!elem) return nullptr;
      }
      return make_type(K::map, elem);
    }
    default: return nullptr;
  }
}

std::string type_name(const CppTypePtr& t) {
  using K = CppType::Kind;
  switch (t->kind) {
    case K::unknown:
    case K::i32: return "int";
    case K::boolean: return "bool";
    case K::i64: return "long long";
    case K::u64: return "unsigned long long";
    case K::f64: return "double";
    case K::str: return "std::string";
    case K::vec: return "std::vector<" + type_name(t->elem) + ">";
    case K::map: return "std::map<std::string, " + type_name(t->elem) + ">";
  }
  return "int";
}

std::string cpp_string_literal(const std::string& s) {
  std::string out = "std::string(\"";
  for (unsigned char c : s) {
    if (c == '"' || c == '\\') {
      out += '\\';
      out += static_cast<char>(c);
    } else if (c >= 0x20 && c < 0x7f && c != '?') {
      out += static_cast<char>(c);
    } else {
      char buf[8];
      std::snprintf(buf, sizeof buf, "\\%03o", c);
      out += buf;
    }
  }
  out += "\", " + std::to_string(s.size()) + ")";
  return out;
}

std::string render(const Json& v, const CppTypePtr& t) {
  using K = CppType::Kind;
  switch (t->kind) {
    case K::boolean: return v.get<bool>() ? "true" : "false";
    case K::i32: return std::to_string(v.get<std::int64_t>());
    case K::i64: {
      const auto x = v.get<std::int64_t>();
      if (x == std::numeric_limits<std::int64_t>::min()) return "(-9223372036854775807LL - 1)";
      return std::to_string(x) + "LL";
    }
    case K::u64: return std::to_string(v.get<std::uint64_t>()) + "ULL";
    case K::f64: {
      if (v.is_number_integer()) {
        return v.is_number_unsigned() ? std::to_string(v.get<std::uint64_t>()) + ".0"
                                      : std::to_string(v.get<std::int64_t>()) + ".0";
      }
      char buf[40];
      std::snprintf(buf, sizeof buf, "%.17g", v.get<double>());
      std::string s = buf;
      if (s.find_first_of(".e") == std::string::npos) s += ".0";
      return s;
    }
    case K::str: return cpp_string_literal(v.get<std::string>());
    case K::vec: {
      std::string out = type_name(t) + "{";
      bool first = true;
      for (const auto& e : v) {
        if (!first) out += ", ";
        first = false;
        out += render(e, t->elem);
      }
      return out + "}";
    }
    case K::map: {
      std::string out = type_name(t) + "{";
      bool first = true;
      for (const auto& [k, e] : v.items()) {
        if (!first) out += ", ";
        first = false;
        out += "{" + cpp_string_literal(k) + ", " + render(e, t->elem) + "}";
      }
      return out + "}";
    }
    case K::unknown: break;
  }
  return "0";
}

// ---- harness templates --------------------------------------------------

constexpr const char* kPythonPrelude = R"PY(import sys as __rlpipe_sys
import math as __rlpipe_math

__rlpipe_ns = {"__name__": "__rlpipe_solution__"}


def __rlpipe_mark(idx, status):
    try:
        __rlpipe_sys.stdout.flush()
    except BaseException:
        pass
    out = __rlpipe_sys.__stdout__
    out.write("\n@@%s %d %s\n" % (__RLPIPE_NONCE, idx, status))
    out.flush()


def __rlpipe_eq(a, b):
    if isinstance(a, (int, float)) and isinstance(b, (int, float)):
        if isinstance(a, float) or isinstance(b, float):
            return a == b or __rlpipe_math.isclose(a, b, rel_tol=1e-6)
        return a == b
    if isinstance(a, (list, tuple)) and isinstance(b, (list, tuple)):
        return len(a) == len(b) and all(__rlpipe_eq(x, y) for x, y in zip(a, b))
    if isinstance(a, dict) and isinstance(b, dict):
        return a.keys() == b.keys() and all(__rlpipe_eq(a[k], b[k]) for k in a)
    return a == b


def __rlpipe_fn(name):
    f = __rlpipe_ns.get(name)
    if callable(f) and not isinstance(f, type):
        return f
    cls = __rlpipe_ns.get("Solution")
    if cls is not None and hasattr(cls, name):
        return getattr(cls(), name)
    raise NameError(name)


def __rlpipe_case(idx, call, expected):
    try:
        status = "pass" if __rlpipe_eq(call(), expected) else "fail"
    except BaseException:
        status = "runtime_error"
    __rlpipe_mark(idx, status)


try:
    exec(compile(__RLPIPE_SOURCE, "solution.py", "exec"), __rlpipe_ns)
except SyntaxError:
    __rlpipe_mark(-1, "compile_error")
    raise SystemExit(1)
except BaseException:
    __rlpipe_mark(-1, "runtime_error")
    raise SystemExit(1)
)PY";

constexpr const char* kCppSupport = R"CPP(
#undef main
namespace rlpipe_h {
template <class T> struct is_vec : std::false_type {};
template <class T, class A> struct is_vec<std::vector<T, A>> : std::true_type {};
template <class T> struct is_map : std::false_type {};
template <class K, class V, class C, class A> struct is_map<std::map<K, V, C, A>> : std::true_type {};
template <class K, class V, class H, class E, class A> struct is_map<std::unordered_map<K, V, H, E, A>> : std::true_type {};
template <class T> constexpr bool is_str_v =
    std::is_convertible_v<const T&, std::string_view> && !std::is_arithmetic_v<T>;

inline bool feq(long double a, long double b) {
  if (a == b) return true;
  const long double d = std::fabs(a - b);
  const long double m = std::max(std::fabs(a), std::fabs(b));
  return d <= 1e-6L * m;
}

template <class A, class B> bool eq(const A& a, const B& b);

template <class A, class B> bool eq_seq(const A& a, const B& b) {
  if (a.size() != b.size()) return false;
  auto ib = b.begin();
  for (auto ia = a.begin(); ia != a.end(); ++ia, ++ib) {
    if (!eq(*ia, *ib)) return false;
  }
  return true;
}

template <class A, class B> bool eq_map(const A& a, const B& b) {
  if (a.size() != b.size()) return false;
  for (const auto& [k, v] : b) {
    auto it = a.find(k);
    if (it == a.end() || !eq(it->second, v)) return false;
  }
  return true;
}

template <class A, class B> bool eq(const A& a, const B& b) {
  if constexpr (std::is_arithmetic_v<A> && std::is_arithmetic_v<B>) {
    if constexpr (std::is_floating_point_v<A> || std::is_floating_point_v<B>) {
      return feq(static_cast<long double>(a), static_cast<long double>(b));
    } else {
      return static_cast<__int128>(a) == static_cast<__int128>(b);
    }
  } else if constexpr (is_vec<A>::value && is_vec<B>::value) {
    return eq_seq(a, b);
  } else if constexpr (is_map<A>::value && is_map<B>::value) {
    return eq_map(a, b);
  } else if constexpr (is_str_v<A> && is_str_v<B>) {
    return std::string_view(a) == std::string_view(b);
  } else if constexpr (std::is_same_v<A, char> && is_str_v<B>) {
    return std::string_view(b).size() == 1 && std::string_view(b)[0] == a;
  } else {
    return a == b;
  }
}

inline void mark(int idx, const char* status) {
  std::cout.flush();
  std::printf("\n@@%s %d %s\n", RLPIPE_NONCE, idx, status);
  std::fflush(stdout);
}
}  // namespace rlpipe_h
)CPP";

std::string nonce_for(const std::string& code, const std::vector<MethodCallCase>& cases, CodeLanguage lang) {
  std::string material = code;
  material += '\0';
  material += to_string(lang);
  for (const auto& c : cases) {
    material += '\0' + c.function_name;
    for (const auto& in : c.inputs) material += '\0' + in.dump();
    material += '\0' + c.expected.dump();
  }
  return sha256_hex(material).substr(0, 16);
}

Harness python_harness(const std::string& code, const std::vector<MethodCallCase>& cases, std::string nonce) {
  Harness h;
  h.nonce = nonce;
  std::ostringstream os;
  os << "__RLPIPE_NONCE = \"" << nonce << "\"\n";
  os << "__RLPIPE_SOURCE = " << encode_python_literal(Json(code)) << "\n";
  os << kPythonPrelude << "\n";
  for (std::size_t i = 0; i < cases.size(); ++i) {
    const auto& c = cases[i];
    os << "__rlpipe_case(" << i << ", lambda: __rlpipe_fn(\"" << c.function_name << "\")(";
    for (std::size_t k = 0; k < c.inputs.size(); ++k) {
      if (k) os << ", ";
      os << encode_python_literal(c.inputs[k]);
    }
    os << "), " << encode_python_literal(c.expected) << ")\n";
    h.included.push_back(i);
  }
  h.program = {CodeLanguage::python, os.str()};
  return h;
}

Harness cpp_harness(const std::string& code, const std::vector<MethodCallCase>& cases, std::string nonce) {
  Harness h;
  h.nonce = nonce;
  static const std::regex solution_re(R"((class|struct)\s+Solution\b)");
  const bool has_solution = std::regex_search(code, solution_re);

  std::ostringstream os;
  os << "#include <bits/stdc++.h>\nusing namespace std;\n#define RLPIPE_NONCE \"" << nonce << "\"\n";
  os << "#define main rlpipe_user_main\n" << code << "\n" << kCppSupport;

  std::vector<std::size_t> emitted;
  for (std::size_t i = 0; i < cases.size(); ++i) {
    const auto& c = cases[i];
    std::vector<CppLiteral> args;
    bool ok = true;
    for (const auto& in : c.inputs) {
      auto lit = encode_cpp_literal(in);
      if (!lit) {
        ok = false;
        break;
      }
      args.push_back(std::move(*lit));
    }
    auto expected = encode_cpp_literal(c.expected);
    if (!ok || !expected) {
      h.unrepresentable.push_back(i);
      continue;
    }
    os << "static void rlpipe_case_" << i << "() {\n  const char* st = \"runtime_error\";\n  try {\n";
    for (std::size_t k = 0; k < args.size(); ++k) {
      os << "    " << args[k].type << " a" << k << " = " << args[k].expr << ";\n";
    }
    os << "    auto got = " << (has_solution ? "Solution()." : "") << c.function_name << "(";
    for (std::size_t k = 0; k < args.size(); ++k) os << (k ? ", " : "") << "a" << k;
    os << ");\n";
    os << "    const " << expected->type << " expected = " << expected->expr << ";\n";
    os << "    st = rlpipe_h::eq(got, expected) ? \"pass\" : \"fail\";\n";
    os << "  } catch (...) {\n    st = \"runtime_error\";\n  }\n";
    os << "  rlpipe_h::mark(" << i << ", st);\n}\n";
    emitted.push_back(i);
  }
  os << "int main() {\n";
  for (auto i : emitted) os << "  rlpipe_case_" << i << "();\n";
  os << "  return 0;\n}\n";
  h.included = std::move(emitted);
  h.program = {CodeLanguage::cpp, os.str()};
  return h;
}

CaseResult from_process_end(std::size_t idx, const ExecutionRecord& rec) {
  switch (rec.status) {
    case ExecStatus::compile_error: return {idx, CaseStatus::compile_error, "compile_error"};
    case ExecStatus::timeout: return {idx, CaseStatus::timeout, "timeout"};
    case ExecStatus::output_limit: return {idx, CaseStatus::fail, "output_limit"};
    case ExecStatus::memory_limit: return {idx, CaseStatus::runtime_error, "memory_limit"};
    case ExecStatus::signaled: return {idx, CaseStatus::runtime_error, "signal " + std::to_string(rec.term_signal)};
    case ExecStatus::nonzero_exit: return {idx, CaseStatus::runtime_error, "exit " + std::to_string(rec.exit_code)};
    case ExecStatus::ok: break;
  }
  return {idx, CaseStatus::runtime_error, "no_result"};
}

}  // namespace

std::optional<std::string> extract_code(std::string_view text, CodeLanguage hint) {
  std::optional<std::string> last;
  bool inside = false;
  bool matching = false;
  std::string body;
  bool first_line = true;
  for (auto line : split_lines(text)) {
    const auto t = trim_view(line);
    if (!inside) {
      if (t.substr(0, 3) == "```") {
        inside = true;
        matching = info_matches(t.substr(3), hint);
        body.clear();
        first_line = true;
      }
      continue;
    }
    if (t == "```") {
      inside = false;
      if (matching) last = body;
      continue;
    }
    if (!first_line) body += '\n';
    body += line;
    first_line = false;
  }
  if (inside) return std::nullopt;
  return last;
}

std::string_view to_string(CaseStatus s) {
  switch (s) {
    case CaseStatus::pass: return "pass";
    case CaseStatus::fail: return "fail";
    case CaseStatus::timeout: return "timeout";
    case CaseStatus::runtime_error: return "runtime_error";
    case CaseStatus::compile_error: return "compile_error";
  }
  return "?";
}

CaseStatus parse_case_status(std::string_view s) {
  for (auto c : {CaseStatus::pass, CaseStatus::fail, CaseStatus::timeout, CaseStatus::runtime_error,
                 CaseStatus::compile_error}) {
    if (to_string(c) == s) return c;
  }
  throw ValidationError("unknown case status: " + std::string(s));
}

bool SandboxResult::all_pass() const {
  return !per_case.empty() &&
         std::all_of(per_case.begin(), per_case.end(), [](const CaseResult& c) { return c.status == CaseStatus::pass; });
}

std::string encode_python_literal(const Json& v) {
  switch (v.type()) {
    case Json::value_t::null: return "None";
    case Json::value_t::boolean: return v.get<bool>() ? "True" : "False";
    case Json::value_t::array: {
      std::string out = "[";
      for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + encode_python_literal(v[i]);
      return out + "]";
    }
    case Json::value_t::object: {
      std::string out = "{";
      bool first = true;
      for (const auto& [k, e] : v.items()) {
        if (!first) out += ", ";
        first = false;
        out += encode_python_literal(Json(k)) + ": " + encode_python_literal(e);
      }
      return out + "}";
    }
    default:
      // JSON numbers and strings are valid Python literals as dumped.
      return v.dump(-1, ' ', false, Json::error_handler_t::replace);
  }
}

std::optional<CppLiteral> encode_cpp_literal(const Json& value) {
  auto t = infer(value);
  if (!t) return std::nullopt;
  return CppLiteral{type_name(t), render(value, t)};
}

Harness build_method_call_harness(const std::string& code, const std::vector<MethodCallCase>& cases,
                                  CodeLanguage language) {
  if (cases.empty()) throw ValidationError("method-call harness needs at least one case");
  for (const auto& c : cases) {
    if (!valid_identifier(c.function_name)) throw ValidationError("invalid function name: " + c.function_name);
  }
  auto nonce = nonce_for(code, cases, language);
  return language == CodeLanguage::python ? python_harness(code, cases, std::move(nonce))
                                          : cpp_harness(code, cases, std::move(nonce));
}

std::vector<CaseResult> parse_harness_output(const Harness& harness, const ExecutionRecord& record,
                                             std::size_t case_count) {
  std::map<long, CaseStatus> seen;
  const std::string prefix = "@@" + harness.nonce + " ";
  for (auto line : split_lines(record.stdout_text)) {
    if (line.substr(0, prefix.size()) != prefix) continue;
    std::istringstream is{std::string(line.substr(prefix.size()))};
    long idx = 0;
    std::string status;
    if (!(is >> idx >> status)) continue;
    try {
      seen[idx] = parse_case_status(status);
    } catch (const ValidationError&) {
    }
  }

  std::vector<CaseResult> out(case_count);
  for (std::size_t i = 0; i < case_count; ++i) out[i].case_index = i;
  for (auto i : harness.unrepresentable) out[i] = {i, CaseStatus::compile_error, "unrepresentable_literal"};
  for (auto i : harness.included) {
    if (auto it = seen.find(static_cast<long>(i)); it != seen.end()) {
      out[i] = {i, it->second, it->second == CaseStatus::fail ? "wrong_answer" : ""};
    } else if (auto g = seen.find(-1); g != seen.end()) {
      out[i] = {i, g->second, g->second == CaseStatus::compile_error ? "compile_error" : "load_failed"};
    } else {
      out[i] = from_process_end(i, record);
    }
  }
  return out;
}

std::string normalize_stdout(std::string_view text) {
  auto lines = split_lines(text);
  for (auto& l : lines) {
    while (!l.empty() && std::isspace(static_cast<unsigned char>(l.back()))) l.remove_suffix(1);
  }
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  std::string out;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (i) out += '\n';
    out += lines[i];
  }
  return out;
}

SandboxResult run_code_tests(const std::string& code, const CodeTests& tests, const ResourceLimits& limits,
                             Executor& executor) {
  if (tests.cases.empty()) throw ValidationError("code tests must not be empty");
  SandboxResult result;
  result.per_case.resize(tests.cases.size());

  std::vector<MethodCallCase> method;
  std::vector<std::size_t> method_idx;
  std::vector<std::optional<std::string>> stdins;
  std::vector<std::size_t> stdio_idx;
  for (std::size_t i = 0; i < tests.cases.size(); ++i) {
    if (const auto* m = std::get_if<MethodCallCase>(&tests.cases[i])) {
      method.push_back(*m);
      method_idx.push_back(i);
    } else {
      stdins.emplace_back(std::get<StdioCase>(tests.cases[i]).stdin_text);
      stdio_idx.push_back(i);
    }
  }

  if (!method.empty()) {
    const auto harness = build_method_call_harness(code, method, tests.language_hint);
    ExecutionRecord rec;
    rec.status = ExecStatus::ok;
    if (!harness.included.empty()) {
      rec = executor.execute(harness.program, {std::nullopt}, limits).at(0);
      result.wall_seconds += rec.wall_seconds;
    }
    auto per = parse_harness_output(harness, rec, method.size());
    for (std::size_t k = 0; k < per.size(); ++k) {
      per[k].case_index = method_idx[k];
      result.per_case[method_idx[k]] = per[k];
    }
  }

  if (!stdins.empty()) {
    const auto records = executor.execute({tests.language_hint, code}, stdins, limits);
    for (std::size_t k = 0; k < stdio_idx.size(); ++k) {
      const auto i = stdio_idx[k];
      const auto& rec = records.at(k);
      result.wall_seconds += rec.wall_seconds;
      if (rec.status == ExecStatus::ok) {
        const auto& expected = std::get<StdioCase>(tests.cases[i]).expected_stdout;
        const bool same = normalize_stdout(rec.stdout_text) == normalize_stdout(expected);
        result.per_case[i] = {i, same ? CaseStatus::pass : CaseStatus::fail, same ? "" : "wrong_answer"};
      } else {
        result.per_case[i] = from_process_end(i, rec);
      }
    }
  }

  result.score = result.all_pass() ? 1 : 0;
  return result;
}

RewardOutcome score_code(const Response& response, const CodeTests& tests, const ResourceLimits& limits,
                         Executor& executor) {
  RewardOutcome out;
  out.query_id = response.query_id;
  out.sample_index = response.sample_index;
  out.channel = "code";
  out.token_count = response.token_count;
  out.finish_reason = response.finish_reason;
  out.trail["language"] = std::string(to_string(tests.language_hint));

  const std::string& source = response.answer ? *response.answer : response.text;
  const auto code = extract_code(source, tests.language_hint);
  SandboxResult result;
  if (!code) {
    result.per_case.push_back({0, CaseStatus::fail, "no_code"});
  } else {
    try {
      result = run_code_tests(*code, tests, limits, executor);
    } catch (const EnvironmentError& e) {
      out.scored = false;
      out.reason = "environment_error";
      out.trail["error"] = e.what();
      return out;
    } catch (const TransportError& e) {
      out.scored = false;
      out.reason = "transport_error";
      out.trail["error"] = e.what();
      return out;
    }
  }

  out.score = result.score;
  out.reason = "pass";
  Json per = Json::array();
  for (const auto& c : result.per_case) {
    per.push_back({{"case_index", c.case_index}, {"status", to_string(c.status)}, {"detail", c.detail}});
    if (c.status != CaseStatus::pass && out.reason == "pass") {
      out.reason = c.detail == "no_code" ? "no_code" : std::string(to_string(c.status));
    }
  }
  out.trail["per_case"] = std::move(per);
  return out;
}

}  // namespace rlpipe::reward
