// Copyright (c) 2026, The rlpipe Authors
// SPDX-License-Identifier: Apache-2.0

#include "rlpipe/reward/ifeval.hpp"

#include <algorithm>
#include <cctype>

namespace rlpipe::reward {
namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }
bool is_word_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::vector<std::string_view> lines_of(std::string_view text) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto nl = text.find('\n', start);
    out.push_back(text.substr(start, nl == std::string_view::npos ? std::string_view::npos : nl - start));
    if (nl == std::string_view::npos) break;
    start = nl + 1;
  }
  return out;
}

std::vector<std::string> string_list(const Json& kwargs, const char* key) {
  const auto it = kwargs.find(key);
  if (it == kwargs.end() || !it->is_array()) throw RegistryError(std::string("kwarg '") + key + "' must be a list");
  std::vector<std::string> out;
  for (const auto& v : *it) {
    if (!v.is_string()) throw RegistryError(std::string("kwarg '") + key + "' must hold strings");
    out.push_back(v.get<std::string>());
  }
  return out;
}

long long int_arg(const Json& kwargs, const char* key) {
  const auto it = kwargs.find(key);
  if (it == kwargs.end() || !it->is_number_integer()) throw RegistryError(std::string("kwarg '") + key + "' must be an integer");
  return it->get<long long>();
}

bool compare(const Json& kwargs, long long actual, long long target) {
  const auto it = kwargs.find("relation");
  if (it == kwargs.end() || !it->is_string()) throw RegistryError("kwarg 'relation' must be a string");
  const auto rel = it->get<std::string>();
  if (rel == "less than") return actual < target;
  if (rel == "at least") return actual >= target;
  throw RegistryError("unsupported relation: " + rel);
}

// Case-insensitive whole-word search.
bool contains_word(const std::string& hay_lower, const std::string& word_lower) {
  if (word_lower.empty()) return false;
  std::size_t pos = 0;
  while ((pos = hay_lower.find(word_lower, pos)) != std::string::npos) {
    const bool left = pos == 0 || !is_word_char(hay_lower[pos - 1]) || !is_word_char(word_lower.front());
    const std::size_t end = pos + word_lower.size();
    const bool right = end == hay_lower.size() || !is_word_char(hay_lower[end]) || !is_word_char(word_lower.back());
    if (left && right) return true;
    ++pos;
  }
  return false;
}

bool keywords_existence(const Json& kw, std::string_view text) {
  const auto hay = lower(text);
  for (const auto& k : string_list(kw, "keywords")) {
    if (hay.find(lower(k)) == std::string::npos) return false;
  }
  return true;
}

bool forbidden_words(const Json& kw, std::string_view text) {
  const auto hay = lower(text);
  for (const auto& w : string_list(kw, "forbidden_words")) {
    if (contains_word(hay, lower(w))) return false;
  }
  return true;
}

bool number_bullet_lists(const Json& kw, std::string_view text) {
  long long bullets = 0;
  for (auto line : lines_of(text)) {
    std::size_t i = 0;
    while (i < line.size() && is_space(line[i])) ++i;
    if (i >= line.size()) continue;
    if (line[i] == '-') ++bullets;
    else if (line[i] == '*' && i + 1 < line.size() && line[i + 1] != '*') ++bullets;
  }
  return bullets == int_arg(kw, "num_bullets");
}

bool has_title(const Json&, std::string_view text) {
  std::size_t pos = 0;
  while ((pos = text.find("<<", pos)) != std::string_view::npos) {
    const auto close = text.find(">>", pos + 2);
    if (close == std::string_view::npos) return false;
    const auto inner = text.substr(pos + 2, close - pos - 2);
    if (inner.find('\n') == std::string_view::npos &&
        std::any_of(inner.begin(), inner.end(), [](char c) { return !is_space(c) && c != '<' && c != '>'; })) {
      return true;
    }
    pos += 2;
  }
  return false;
}

bool quotation(const Json&, std::string_view text) {
  return text.size() >= 2 && text.front() == '"' && text.back() == '"';
}

bool no_comma(const Json&, std::string_view text) { return text.find(',') == std::string_view::npos; }

bool postscript(const Json& kw, std::string_view text) {
  const auto it = kw.find("postscript_marker");
  if (it == kw.end() || !it->is_string()) throw RegistryError("kwarg 'postscript_marker' must be a string");
  const auto marker = lower(it->get<std::string>());
  if (marker.empty()) throw RegistryError("postscript_marker must not be empty");
  for (auto line : lines_of(text)) {
    std::size_t i = 0;
    while (i < line.size() && is_space(line[i])) ++i;
    if (lower(line.substr(i)).rfind(marker, 0) == 0) return true;
  }
  return false;
}

InstructionRegistry make_builtin() {
  InstructionRegistry r;
  r.add("keywords:existence", {keywords_existence, {"keywords"}});
  r.add("keywords:forbidden_words", {forbidden_words, {"forbidden_words"}});
  r.add("length_constraints:number_words",
        {[](const Json& kw, std::string_view t) {
           return compare(kw, static_cast<long long>(count_words(t)), int_arg(kw, "num_words"));
         },
         {"relation", "num_words"}});
  r.add("length_constraints:number_sentences",
        {[](const Json& kw, std::string_view t) {
           return compare(kw, static_cast<long long>(count_sentences(t)), int_arg(kw, "num_sentences"));
         },
         {"relation", "num_sentences"}});
  r.add("detectable_format:number_bullet_lists", {number_bullet_lists, {"num_bullets"}});
  r.add("detectable_format:title", {has_title, {}});
  r.add("startend:quotation", {quotation, {}});
  r.add("punctuation:no_comma", {no_comma, {}});
  r.add("detectable_content:postscript", {postscript, {"postscript_marker"}});
  return r;
}

}  // namespace

std::vector<InstructionSpec> specs_from(const Instructions& payload) {
  if (payload.kwargs.size() > payload.instruction_id_list.size()) {
    throw ValidationError("more kwargs entries than instruction ids");
  }
  std::vector<InstructionSpec> out;
  for (std::size_t i = 0; i < payload.instruction_id_list.size(); ++i) {
    Json kw = i < payload.kwargs.size() && !payload.kwargs[i].is_null() ? payload.kwargs[i] : Json::object();
    out.push_back({payload.instruction_id_list[i], std::move(kw)});
  }
  return out;
}

const InstructionRegistry& InstructionRegistry::builtin() {
  static const InstructionRegistry registry = make_builtin();
  return registry;
}

void InstructionRegistry::add(std::string id, ValidatorEntry entry) {
  for (auto& [k, v] : entries_) {
    if (k == id) {
      v = std::move(entry);
      return;
    }
  }
  entries_.emplace_back(std::move(id), std::move(entry));
}

bool InstructionRegistry::contains(std::string_view id) const {
  return std::any_of(entries_.begin(), entries_.end(), [&](const auto& e) { return e.first == id; });
}

std::vector<std::string> InstructionRegistry::ids() const {
  std::vector<std::string> out;
  for (const auto& e : entries_) out.push_back(e.first);
  return out;
}

bool InstructionRegistry::validate_one(const InstructionSpec& spec, std::string_view text) const {
  const auto it = std::find_if(entries_.begin(), entries_.end(), [&](const auto& e) { return e.first == spec.instruction_id; });
  if (it == entries_.end()) throw RegistryError("unknown instruction id: " + spec.instruction_id);
  if (!spec.kwargs.is_object()) throw RegistryError("kwargs must be an object for " + spec.instruction_id);
  const auto& keys = it->second.keys;
  for (const auto& [k, v] : spec.kwargs.items()) {
    if (v.is_null()) continue;
    if (std::find(keys.begin(), keys.end(), k) == keys.end()) {
      throw RegistryError("unexpected kwarg '" + k + "' for " + spec.instruction_id);
    }
  }
  return it->second.check(spec.kwargs, text);
}

std::size_t count_words(std::string_view text) {
  std::size_t n = 0;
  bool in_word = false;
  for (char c : text) {
    if (is_space(c)) {
      in_word = false;
    } else if (!in_word) {
      in_word = true;
      ++n;
    }
  }
  return n;
}

std::size_t count_sentences(std::string_view text) {
  std::size_t n = 0;
  bool has_content = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    const bool terminator = (c == '.' || c == '!' || c == '?') && (i + 1 == text.size() || is_space(text[i + 1]));
    if (terminator) {
      if (has_content) ++n;
      has_content = false;
    } else if (!is_space(c) && c != '.' && c != '!' && c != '?') {
      has_content = true;
    }
  }
  if (has_content) ++n;
  return n;
}

bool validate_one(const InstructionSpec& spec, std::string_view text) {
  return InstructionRegistry::builtin().validate_one(spec, text);
}

RewardOutcome score_if(const std::vector<InstructionSpec>& specs, std::string_view response_text,
                       const InstructionRegistry& registry) {
  if (specs.empty()) throw ValidationError("instruction list must not be empty");
  RewardOutcome out;
  out.channel = "if";
  Json checks = Json::array();
  bool all = true;
  try {
    for (const auto& s : specs) {
      const bool ok = registry.validate_one(s, response_text);
      all = all && ok;
      checks.push_back({{"instruction_id", s.instruction_id}, {"followed", ok}});
    }
  } catch (const RegistryError& e) {
    out.scored = false;
    out.reason = "registry_error";
    out.trail["error"] = e.what();
    return out;
  }
  out.score = all ? 1.0 : 0.0;
  out.reason = all ? "all_followed" : "violated";
  out.trail["checks"] = std::move(checks);
  return out;
}

}  // namespace rlpipe::reward
