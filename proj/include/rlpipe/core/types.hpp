// Copyright (c) 2026, The rlpipe Authors
// SPDX-License-Identifier: Apache-2.0
//
// Domain model shared by every stage of the pipeline: queries, their
// verification payloads, sampled responses and reward outcomes.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

namespace rlpipe {

using Json = nlohmann::json;

enum class Category { math, code, science, instruction_follow, general_chat };
enum class Role { user, assistant };
enum class CodeLanguage { python, cpp };

// Closed set of reasons a query or response can be dropped for.
enum class FilterReason {
  url,
  image_ref,
  exact_dup,
  near_dup,
  contaminated,
  unclear,
  proof,
  multi_subquestion,
  mcq_unparseable,
  ppl,
  ngram_repeat,
  structure,
};

enum class QueryStatus { active, filtered, rewritten };

struct Turn {
  Role role = Role::user;
  std::string text;
};

struct MethodCallCase {
  std::string function_name;
  std::vector<Json> inputs;
  Json expected;
};

struct StdioCase {
  std::string stdin_text;
  std::string expected_stdout;
};

using TestCase = std::variant<MethodCallCase, StdioCase>;

struct MathGroundTruth {
  std::string answer;
};

struct CodeTests {
  std::vector<TestCase> cases;
  CodeLanguage language_hint = CodeLanguage::python;
};

struct Instructions {
  std::vector<std::string> instruction_id_list;
  std::vector<Json> kwargs;
};

struct NoVerification {};

using VerificationPayload = std::variant<NoVerification, MathGroundTruth, CodeTests, Instructions>;

// passed/total, kept unreduced so the raw counts survive serialization.
struct PassRate {
  std::int64_t passed = 0;
  std::int64_t total = 0;

  double value() const { return total == 0 ? 0.0 : static_cast<double>(passed) / static_cast<double>(total); }
  bool is_zero() const { return passed == 0; }
  bool is_one() const { return total > 0 && passed == total; }
  friend bool operator==(const PassRate& a, const PassRate& b) { return a.passed * b.total == b.passed * a.total; }
};

struct Query {
  std::string id;
  Category category = Category::general_chat;
  std::vector<Turn> turns;
  VerificationPayload verification;
  QueryStatus status = QueryStatus::active;
  std::optional<FilterReason> filter_reason;
  std::optional<PassRate> pass_rate;

  // Concatenated user turns; the text every query-level filter looks at.
  std::string user_text() const;
  bool is_active() const { return status != QueryStatus::filtered; }
};

struct Response {
  std::string query_id;
  std::int64_t sample_index = 0;
  std::string text;
  std::optional<std::string> think;
  std::optional<std::string> answer;
  std::int64_t token_count = 0;
  std::optional<double> ppl_score;
  std::string finish_reason = "stop";
  // Full dialogue for multi-turn samples; empty for single-turn.
  std::vector<Turn> turns;
};

// Outcome of one reward channel on one (query, response) pair.
struct RewardOutcome {
  std::string query_id;
  std::int64_t sample_index = 0;
  std::string channel;
  bool scored = true;
  double score = 0.0;
  std::string reason;
  Json trail = Json::object();
  std::int64_t token_count = 0;
  std::string finish_reason = "stop";
};

std::string_view to_string(Category c);
std::string_view to_string(Role r);
std::string_view to_string(CodeLanguage l);
std::string_view to_string(FilterReason r);
std::string_view to_string(QueryStatus s);

Category parse_category(std::string_view s);
Role parse_role(std::string_view s);
CodeLanguage parse_language(std::string_view s);
FilterReason parse_filter_reason(std::string_view s);
QueryStatus parse_status(std::string_view s);

// Splits text into its <think> and <answer> blocks. Both are set only when
// exactly one complete block of each exists and think precedes answer.
struct ResponseBlocks {
  std::optional<std::string> think;
  std::optional<std::string> answer;
  bool well_formed() const { return think.has_value() && answer.has_value(); }
};
ResponseBlocks parse_response_blocks(std::string_view text);

// Builds a Response with think/answer populated from the text.
Response make_response(std::string query_id, std::int64_t sample_index, std::string text, std::int64_t token_count = 0);

void validate(const Query& q);

}  // namespace rlpipe
