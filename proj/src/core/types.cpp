// Copyright (c) 2026, The rlpipe Authors
// SPDX-License-Identifier: Apache-2.0

#include "rlpipe/core/types.hpp"

#include <array>
#include <utility>

#include "rlpipe/core/errors.hpp"

namespace rlpipe {
namespace {

template <typename E, std::size_t N>
E lookup(const std::array<std::pair<std::string_view, E>, N>& table, std::string_view s, const char* what) {
  for (const auto& [name, value] : table) {
    if (name == s) return value;
  }
  throw ValidationError(std::string("unknown ") + what + ": '" + std::string(s) + "'");
}

template <typename E, std::size_t N>
std::string_view name_of(const std::array<std::pair<std::string_view, E>, N>& table, E e) {
  for (const auto& [name, value] : table) {
    if (value == e) return name;
  }
  return "?";
}

constexpr std::array<std::pair<std::string_view, Category>, 5> kCategories{{
    {"math", Category::math},
    {"code", Category::code},
    {"science", Category::science},
    {"instruction_follow", Category::instruction_follow},
    {"general_chat", Category::general_chat},
}};

constexpr std::array<std::pair<std::string_view, Role>, 2> kRoles{{
    {"user", Role::user},
    {"assistant", Role::assistant},
}};

constexpr std::array<std::pair<std::string_view, CodeLanguage>, 2> kLanguages{{
    {"python", CodeLanguage::python},
    {"cpp", CodeLanguage::cpp},
}};

constexpr std::array<std::pair<std::string_view, FilterReason>, 12> kReasons{{
    {"url", FilterReason::url},
    {"image_ref", FilterReason::image_ref},
    {"exact_dup", FilterReason::exact_dup},
    {"near_dup", FilterReason::near_dup},
    {"contaminated", FilterReason::contaminated},
    {"unclear", FilterReason::unclear},
    {"proof", FilterReason::proof},
    {"multi_subquestion", FilterReason::multi_subquestion},
    {"mcq_unparseable", FilterReason::mcq_unparseable},
    {"ppl", FilterReason::ppl},
    {"ngram_repeat", FilterReason::ngram_repeat},
    {"structure", FilterReason::structure},
}};

constexpr std::array<std::pair<std::string_view, QueryStatus>, 3> kStatuses{{
    {"active", QueryStatus::active},
    {"filtered", QueryStatus::filtered},
    {"rewritten", QueryStatus::rewritten},
}};

// Finds the single occurrence of open...close. Returns false when the open
// tag is missing, the block is unterminated, or a second block exists.
bool find_single_block(std::string_view text, std::string_view open, std::string_view close, std::size_t& begin,
                       std::size_t& end) {
  const auto o = text.find(open);
  if (o == std::string_view::npos) return false;
  const auto c = text.find(close, o + open.size());
  if (c == std::string_view::npos) return false;
  if (text.find(open, o + open.size()) != std::string_view::npos) return false;
  if (text.find(close, c + close.size()) != std::string_view::npos) return false;
  begin = o;
  end = c + close.size();
  return true;
}

}  // namespace

std::string Query::user_text() const {
  std::string out;
  for (const auto& t : turns) {
    if (t.role != Role::user) continue;
    if (!out.empty()) out += '\n';
    out += t.text;
  }
  return out;
}

std::string_view to_string(Category c) { return name_of(kCategories, c); }
std::string_view to_string(Role r) { return name_of(kRoles, r); }
std::string_view to_string(CodeLanguage l) { return name_of(kLanguages, l); }
std::string_view to_string(FilterReason r) { return name_of(kReasons, r); }
std::string_view to_string(QueryStatus s) { return name_of(kStatuses, s); }

Category parse_category(std::string_view s) { return lookup(kCategories, s, "category"); }
Role parse_role(std::string_view s) { return lookup(kRoles, s, "role"); }
CodeLanguage parse_language(std::string_view s) { return lookup(kLanguages, s, "language"); }
FilterReason parse_filter_reason(std::string_view s) { return lookup(kReasons, s, "filter reason"); }
QueryStatus parse_status(std::string_view s) { return lookup(kStatuses, s, "status"); }

ResponseBlocks parse_response_blocks(std::string_view text) {
  constexpr std::string_view kThinkOpen = "<think>", kThinkClose = "</think>";
  constexpr std::string_view kAnswerOpen = "<answer>", kAnswerClose = "</answer>";
  ResponseBlocks out;
  std::size_t tb = 0, te = 0, ab = 0, ae = 0;
  if (!find_single_block(text, kThinkOpen, kThinkClose, tb, te)) return out;
  if (!find_single_block(text, kAnswerOpen, kAnswerClose, ab, ae)) return out;
  if (ab < te) return out;
  out.think = std::string(text.substr(tb + kThinkOpen.size(), te - kThinkClose.size() - tb - kThinkOpen.size()));
  out.answer = std::string(text.substr(ab + kAnswerOpen.size(), ae - kAnswerClose.size() - ab - kAnswerOpen.size()));
  return out;
}

Response make_response(std::string query_id, std::int64_t sample_index, std::string text, std::int64_t token_count) {
  Response r;
  r.query_id = std::move(query_id);
  r.sample_index = sample_index;
  r.text = std::move(text);
  r.token_count = token_count;
  auto blocks = parse_response_blocks(r.text);
  r.think = std::move(blocks.think);
  r.answer = std::move(blocks.answer);
  return r;
}

void validate(const Query& q) {
  if (q.id.empty()) throw ValidationError("query id is empty");
  if (q.turns.empty()) throw ValidationError("query " + q.id + " has no turns");
  if (q.turns.front().role != Role::user) throw ValidationError("query " + q.id + ": first turn must be a user turn");
  if (q.status == QueryStatus::filtered && !q.filter_reason) {
    throw ValidationError("query " + q.id + ": filtered status without a reason");
  }
  if (q.pass_rate) {
    const auto& pr = *q.pass_rate;
    if (pr.total <= 0 || pr.passed < 0 || pr.passed > pr.total) {
      throw ValidationError("query " + q.id + ": pass_rate outside [0,1]");
    }
  }
  if (const auto* ct = std::get_if<CodeTests>(&q.verification)) {
    if (ct->cases.empty()) throw ValidationError("query " + q.id + ": code tests are empty");
  }
  if (const auto* ins = std::get_if<Instructions>(&q.verification)) {
    if (ins->instruction_id_list.empty() || ins->instruction_id_list.size() != ins->kwargs.size()) {
      throw ValidationError("query " + q.id + ": instruction_id_list and kwargs must be non-empty and equal-length");
    }
  }
}

}  // namespace rlpipe
