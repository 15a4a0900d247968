// Copyright (c) 2026, The rlpipe Authors
// SPDX-License-Identifier: Apache-2.0

#include "rlpipe/core/json_io.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

namespace rlpipe {
namespace {

bool is_identifier(std::string_view s) {
  if (s.empty()) return false;
  if (!(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
  for (char c : s) {
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_')) return false;
  }
  return true;
}

template <typename T>
T required(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw ValidationError(std::string("missing field '") + key + "'");
  return j.at(key).get<T>();
}

Json turns_to_json(const std::vector<Turn>& turns) {
  Json arr = Json::array();
  for (const auto& t : turns) arr.push_back({{"role", to_string(t.role)}, {"text", t.text}});
  return arr;
}

std::vector<Turn> turns_from_json(const Json& arr) {
  std::vector<Turn> turns;
  for (const auto& t : arr) {
    turns.push_back({parse_role(required<std::string>(t, "role")), required<std::string>(t, "text")});
  }
  return turns;
}

}  // namespace

Json to_json(const TestCase& tc) {
  return std::visit(
      [](const auto& c) -> Json {
        using T = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<T, MethodCallCase>) {
          return {{"type", "method_call"}, {"function_name", c.function_name}, {"inputs", c.inputs}, {"expected", c.expected}};
        } else {
          return {{"type", "stdio"}, {"stdin", c.stdin_text}, {"expected_stdout", c.expected_stdout}};
        }
      },
      tc);
}

TestCase test_case_from_json(const Json& j) {
  const auto type = required<std::string>(j, "type");
  if (type == "method_call") {
    MethodCallCase c;
    c.function_name = required<std::string>(j, "function_name");
    if (!is_identifier(c.function_name)) throw ValidationError("function_name is not an identifier: " + c.function_name);
    c.inputs = required<std::vector<Json>>(j, "inputs");
    if (!j.contains("expected")) throw ValidationError("missing field 'expected'");
    c.expected = j.at("expected");
    return c;
  }
  if (type == "stdio") {
    return StdioCase{required<std::string>(j, "stdin"), required<std::string>(j, "expected_stdout")};
  }
  throw ValidationError("unknown test case type: " + type);
}

Json to_json(const VerificationPayload& v) {
  return std::visit(
      [](const auto& p) -> Json {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, MathGroundTruth>) {
          return {{"type", "math"}, {"answer", p.answer}};
        } else if constexpr (std::is_same_v<T, CodeTests>) {
          Json cases = Json::array();
          for (const auto& c : p.cases) cases.push_back(to_json(c));
          return {{"type", "code"}, {"language", to_string(p.language_hint)}, {"cases", cases}};
        } else if constexpr (std::is_same_v<T, Instructions>) {
          return {{"type", "instructions"}, {"instruction_id_list", p.instruction_id_list}, {"kwargs", p.kwargs}};
        } else {
          return {{"type", "none"}};
        }
      },
      v);
}

VerificationPayload verification_from_json(const Json& j) {
  if (j.is_null()) return NoVerification{};
  const auto type = required<std::string>(j, "type");
  if (type == "math") return MathGroundTruth{required<std::string>(j, "answer")};
  if (type == "code") {
    CodeTests ct;
    ct.language_hint = parse_language(j.value("language", std::string("python")));
    for (const auto& c : required<Json>(j, "cases")) ct.cases.push_back(test_case_from_json(c));
    if (ct.cases.empty()) throw ValidationError("code tests must be non-empty");
    return ct;
  }
  if (type == "instructions") {
    Instructions ins;
    ins.instruction_id_list = required<std::vector<std::string>>(j, "instruction_id_list");
    ins.kwargs = required<std::vector<Json>>(j, "kwargs");
    if (ins.instruction_id_list.empty() || ins.instruction_id_list.size() != ins.kwargs.size()) {
      throw ValidationError("instruction_id_list and kwargs must be non-empty and equal-length");
    }
    return ins;
  }
  if (type == "none") return NoVerification{};
  throw ValidationError("unknown verification type: " + type);
}

Json to_json(const Query& q) {
  Json j{{"id", q.id},
         {"category", to_string(q.category)},
         {"turns", turns_to_json(q.turns)},
         {"verification", to_json(q.verification)},
         {"status", to_string(q.status)}};
  if (q.filter_reason) j["filter_reason"] = to_string(*q.filter_reason);
  if (q.pass_rate) j["pass_rate"] = {{"passed", q.pass_rate->passed}, {"total", q.pass_rate->total}};
  return j;
}

Query query_from_json(const Json& j) {
  Query q;
  q.id = required<std::string>(j, "id");
  q.category = parse_category(required<std::string>(j, "category"));
  q.turns = turns_from_json(required<Json>(j, "turns"));
  q.verification = verification_from_json(j.value("verification", Json()));
  q.status = parse_status(j.value("status", std::string("active")));
  if (j.contains("filter_reason") && !j["filter_reason"].is_null()) {
    q.filter_reason = parse_filter_reason(j["filter_reason"].get<std::string>());
  }
  if (j.contains("pass_rate") && !j["pass_rate"].is_null()) {
    const auto& pr = j["pass_rate"];
    q.pass_rate = PassRate{required<std::int64_t>(pr, "passed"), required<std::int64_t>(pr, "total")};
  }
  validate(q);
  return q;
}

Json to_json(const Response& r) {
  Json j{{"query_id", r.query_id},
         {"sample_index", r.sample_index},
         {"text", r.text},
         {"token_count", r.token_count},
         {"finish_reason", r.finish_reason}};
  if (r.ppl_score) j["ppl_score"] = *r.ppl_score;
  if (!r.turns.empty()) j["turns"] = turns_to_json(r.turns);
  return j;
}

Response response_from_json(const Json& j) {
  auto r = make_response(required<std::string>(j, "query_id"), j.value("sample_index", std::int64_t{0}),
                         required<std::string>(j, "text"), j.value("token_count", std::int64_t{0}));
  if (r.token_count < 0) throw ValidationError("token_count must be nonnegative");
  if (j.contains("ppl_score") && !j["ppl_score"].is_null()) {
    r.ppl_score = j["ppl_score"].get<double>();
    if (*r.ppl_score < 0) throw ValidationError("ppl_score must be nonnegative");
  }
  r.finish_reason = j.value("finish_reason", std::string("stop"));
  if (j.contains("turns")) r.turns = turns_from_json(j["turns"]);
  return r;
}

Json to_json(const RewardOutcome& o) {
  return {{"query_id", o.query_id},       {"sample_index", o.sample_index}, {"channel", o.channel},
          {"scored", o.scored},           {"score", o.score},               {"reason", o.reason},
          {"token_count", o.token_count}, {"finish_reason", o.finish_reason}, {"trail", o.trail}};
}

RewardOutcome outcome_from_json(const Json& j) {
  RewardOutcome o;
  o.query_id = required<std::string>(j, "query_id");
  o.sample_index = j.value("sample_index", std::int64_t{0});
  o.channel = j.value("channel", std::string());
  o.scored = j.value("scored", true);
  o.score = j.value("score", 0.0);
  o.reason = j.value("reason", std::string());
  o.token_count = j.value("token_count", std::int64_t{0});
  o.finish_reason = j.value("finish_reason", std::string("stop"));
  o.trail = j.value("trail", Json::object());
  return o;
}

std::vector<JsonlRecord> read_jsonl(const std::filesystem::path& path, bool strict, std::vector<JsonlError>* errors) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path.string());
  std::vector<JsonlRecord> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back({n, Json::parse(line)});
    } catch (const Json::parse_error& e) {
      if (strict) throw ValidationError(path.string() + ":" + std::to_string(n) + ": " + e.what());
      if (errors) errors->push_back({n, e.what()});
    }
  }
  return out;
}

JsonlWriter::JsonlWriter(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  file_ = std::fopen(path.c_str(), "wb");
  if (!file_) throw EnvironmentError("cannot write " + path.string());
}

JsonlWriter::~JsonlWriter() {
  if (file_) std::fclose(file_);
}

void JsonlWriter::write(const Json& j) {
  const auto s = j.dump(-1, ' ', false, Json::error_handler_t::replace);
  std::fwrite(s.data(), 1, s.size(), file_);
  std::fputc('\n', file_);
  ++count_;
}

void write_json_file(const std::filesystem::path& path, const Json& j) { write_text_file(path, j.dump(2) + "\n"); }

Json read_json_file(const std::filesystem::path& path) {
  try {
    return Json::parse(read_text_file(path));
  } catch (const Json::parse_error& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw EnvironmentError("cannot write " + path.string());
  out << text;
}

}  // namespace rlpipe
