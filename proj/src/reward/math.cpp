// Copyright (c) 2026, The rlpipe Authors
// SPDX-License-Identifier: Apache-2.0

#include "rlpipe/reward/math.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <optional>

#include <boost/multiprecision/cpp_int.hpp>

namespace rlpipe::reward {
namespace {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

constexpr int kMaxExponent = 256;
constexpr std::size_t kMaxBits = 4096;

void replace_all(std::string& s, std::string_view from, std::string_view to) {
  if (from.empty()) return;
  std::size_t pos = 0;
  while ((pos = s.find(from, pos)) != std::string::npos) {
    s.replace(pos, from.size(), to);
    pos += to.size();
  }
}

// Index one past the brace group opening at s[open] ('{'), honoring
// backslash escapes. npos when unbalanced.
std::size_t match_brace_group(std::string_view s, std::size_t open) {
  int depth = 0;
  for (std::size_t i = open; i < s.size(); ++i) {
    const char c = s[i];
    if (c == '\\') {
      ++i;
      continue;
    }
    if (c == '{') ++depth;
    if (c == '}' && --depth == 0) return i + 1;
  }
  return std::string_view::npos;
}

// Replaces `\cmd{body}` with `body` for the given formatting commands.
void unwrap_command(std::string& s, std::string_view cmd) {
  std::size_t pos = 0;
  while ((pos = s.find(cmd, pos)) != std::string::npos) {
    const std::size_t open = pos + cmd.size();
    if (open >= s.size() || s[open] != '{') {
      pos = open;
      continue;
    }
    const std::size_t end = match_brace_group(s, open);
    if (end == std::string::npos) return;
    s = s.substr(0, pos) + s.substr(open + 1, end - open - 2) + s.substr(end);
  }
}

// Reads one macro argument at s[pos]: a brace group or a single character.
std::optional<std::pair<std::string, std::size_t>> read_argument(const std::string& s, std::size_t pos) {
  if (pos >= s.size()) return std::nullopt;
  if (s[pos] == '{') {
    const std::size_t end = match_brace_group(s, pos);
    if (end == std::string::npos) return std::nullopt;
    return std::make_pair(s.substr(pos + 1, end - pos - 2), end);
  }
  if (s[pos] == '\\' || s[pos] == '}') return std::nullopt;
  return std::make_pair(s.substr(pos, 1), pos + 1);
}

std::string rewrite_macros(const std::string& in);

std::string rewrite_frac(const std::string& in) {
  std::string s = in;
  std::size_t pos;
  while ((pos = s.find("\\frac")) != std::string::npos) {
    auto num = read_argument(s, pos + 5);
    if (!num) break;
    auto den = read_argument(s, num->second);
    if (!den) break;
    const std::string repl = "((" + rewrite_macros(num->first) + ")/(" + rewrite_macros(den->first) + "))";
    s = s.substr(0, pos) + repl + s.substr(den->second);
  }
  return s;
}

std::string rewrite_sqrt(const std::string& in) {
  std::string s = in;
  std::size_t pos = 0;
  while ((pos = s.find("\\sqrt", pos)) != std::string::npos) {
    auto arg = read_argument(s, pos + 5);
    if (!arg) {
      pos += 5;
      continue;
    }
    const std::string repl = "sqrt(" + rewrite_macros(arg->first) + ")";
    s = s.substr(0, pos) + repl + s.substr(arg->second);
  }
  return s;
}

std::string rewrite_macros(const std::string& in) { return rewrite_sqrt(rewrite_frac(in)); }

std::string clean(std::string_view raw) {
  std::string s(raw);
  for (const auto* cmd : {"\\left.", "\\right.", "\\left", "\\right", "\\displaystyle", "\\textstyle", "\\,", "\\;", "\\:",
                          "\\!", "\\ ", "~"}) {
    replace_all(s, cmd, "");
  }
  for (const auto* cmd : {"\\text", "\\textbf", "\\mathrm", "\\mathbf", "\\mbox"}) unwrap_command(s, cmd);
  replace_all(s, "\\dfrac", "\\frac");
  replace_all(s, "\\tfrac", "\\frac");
  replace_all(s, "^{\\circ}", "");
  replace_all(s, "^\\circ", "");
  replace_all(s, "\\cdot", "*");
  replace_all(s, "\\times", "*");
  replace_all(s, "\\div", "/");
  replace_all(s, "\\%", "%");
  std::string compact;
  compact.reserve(s.size());
  for (char c : s) {
    if (!std::isspace(static_cast<unsigned char>(c))) compact += c;
  }
  s = rewrite_macros(compact);
  replace_all(s, "\\{", "{");
  replace_all(s, "\\}", "}");
  while (!s.empty() && s.back() == '.') s.pop_back();
  while (s.size() >= 2 && s.front() == '$' && s.back() == '$') s = s.substr(1, s.size() - 2);
  while (!s.empty() && s.back() == '.') s.pop_back();
  return s;
}

bool brackets_balanced(std::string_view s) {
  std::vector<char> stack;
  for (char c : s) {
    if (c == '(' || c == '[' || c == '{') stack.push_back(c);
    if (c == ')' || c == ']' || c == '}') {
      if (stack.empty()) return false;
      const char open = stack.back();
      stack.pop_back();
      // Half-open intervals mix '(' with ']' and '[' with ')'.
      if (c == '}' && open != '{') return false;
      if (c != '}' && open == '{') return false;
    }
  }
  return stack.empty();
}

// Index of the bracket closing the one at s[0].
std::size_t closing_of_first(std::string_view s) {
  int depth = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const char c = s[i];
    if (c == '(' || c == '[' || c == '{') ++depth;
    if ((c == ')' || c == ']' || c == '}') && --depth == 0) return i;
  }
  return std::string_view::npos;
}

std::vector<std::string> split_top_level(std::string_view s) {
  std::vector<std::string> parts;
  int depth = 0;
  std::size_t start = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const char c = s[i];
    if (c == '(' || c == '[' || c == '{') ++depth;
    if (c == ')' || c == ']' || c == '}') --depth;
    if (c == ',' && depth == 0) {
      parts.emplace_back(s.substr(start, i - start));
      start = i + 1;
    }
  }
  parts.emplace_back(s.substr(start));
  return parts;
}

// Recursive-descent evaluator over exact rationals. Any construct outside
// the arithmetic subset makes it fail, which sends the caller to the
// symbolic fallback.
class RationalParser {
 public:
  explicit RationalParser(std::string_view s) : s_(s) {}

  std::optional<Rational> parse() {
    auto v = expr();
    if (!v || pos_ != s_.size()) return std::nullopt;
    return v;
  }

 private:
  bool eat(char c) {
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }
  char peek() const { return pos_ < s_.size() ? s_[pos_] : '\0'; }

  static bool too_big(const Rational& r) {
    return boost::multiprecision::msb(abs(boost::multiprecision::numerator(r)) + 1) > kMaxBits ||
           boost::multiprecision::msb(boost::multiprecision::denominator(r)) > kMaxBits;
  }

  std::optional<Rational> expr() {
    auto lhs = term();
    while (lhs) {
      if (eat('+')) {
        auto rhs = term();
        if (!rhs) return std::nullopt;
        *lhs += *rhs;
      } else if (eat('-')) {
        auto rhs = term();
        if (!rhs) return std::nullopt;
        *lhs -= *rhs;
      } else {
        break;
      }
    }
    return lhs;
  }

  std::optional<Rational> term() {
    auto lhs = unary();
    while (lhs) {
      if (eat('*')) {
        auto rhs = unary();
        if (!rhs) return std::nullopt;
        *lhs *= *rhs;
      } else if (eat('/')) {
        auto rhs = unary();
        if (!rhs || *rhs == 0) return std::nullopt;
        *lhs /= *rhs;
      } else if (peek() == '(' || peek() == '{') {
        auto rhs = unary();
        if (!rhs) return std::nullopt;
        *lhs *= *rhs;
      } else {
        break;
      }
      if (too_big(*lhs)) return std::nullopt;
    }
    return lhs;
  }

  std::optional<Rational> unary() {
    if (eat('-')) {
      auto v = unary();
      if (!v) return std::nullopt;
      return -*v;
    }
    if (eat('+')) return unary();
    return power();
  }

  std::optional<Rational> power() {
    auto base = postfix();
    if (!base || !eat('^')) return base;
    auto exponent = unary();
    if (!exponent || boost::multiprecision::denominator(*exponent) != 1) return std::nullopt;
    const BigInt e = boost::multiprecision::numerator(*exponent);
    if (e > kMaxExponent || e < -kMaxExponent) return std::nullopt;
    int n = static_cast<int>(e);
    if (n < 0 && *base == 0) return std::nullopt;
    Rational result = 1;
    const Rational b = n < 0 ? Rational(1) / *base : *base;
    for (int i = 0; i < std::abs(n); ++i) {
      result *= b;
      if (too_big(result)) return std::nullopt;
    }
    return result;
  }

  std::optional<Rational> postfix() {
    auto v = primary();
    while (v && eat('%')) *v /= 100;
    return v;
  }

  static std::optional<BigInt> exact_sqrt(const BigInt& x) {
    if (x < 0) return std::nullopt;
    const BigInt r = boost::multiprecision::sqrt(x);
    if (r * r != x) return std::nullopt;
    return r;
  }

  std::optional<Rational> primary() {
    if (eat('(')) {
      auto v = expr();
      if (!v || !eat(')')) return std::nullopt;
      return v;
    }
    if (eat('{')) {
      auto v = expr();
      if (!v || !eat('}')) return std::nullopt;
      return v;
    }
    if (s_.substr(pos_, 5) == "sqrt(") {
      pos_ += 5;
      auto v = expr();
      if (!v || !eat(')')) return std::nullopt;
      auto num = exact_sqrt(boost::multiprecision::numerator(*v));
      auto den = exact_sqrt(boost::multiprecision::denominator(*v));
      if (!num || !den) return std::nullopt;
      return Rational(*num, *den);
    }
    return number();
  }

  std::optional<Rational> number() {
    const std::size_t start = pos_;
    std::string digits;
    std::size_t frac_len = 0;
    bool seen_dot = false;
    while (pos_ < s_.size()) {
      const char c = s_[pos_];
      if (std::isdigit(static_cast<unsigned char>(c))) {
        digits += c;
        if (seen_dot) ++frac_len;
      } else if (c == '.' && !seen_dot) {
        seen_dot = true;
      } else {
        break;
      }
      ++pos_;
    }
    if (digits.empty()) {
      pos_ = start;
      return std::nullopt;
    }
    if (digits.size() > 1000) return std::nullopt;
    // cpp_int reads a leading 0 as an octal prefix.
    const auto nz = digits.find_first_not_of('0');
    digits = nz == std::string::npos ? "0" : digits.substr(nz);
    BigInt den = 1;
    for (std::size_t i = 0; i < frac_len; ++i) den *= 10;
    return Rational(BigInt(digits), den);
  }

  std::string_view s_;
  std::size_t pos_ = 0;
};

std::string rational_key(const Rational& r) {
  const BigInt num = boost::multiprecision::numerator(r);
  const BigInt den = boost::multiprecision::denominator(r);
  std::string key = "q:" + num.str();
  if (den != 1) key += "/" + den.str();
  return key;
}

std::string strip_redundant_parens(std::string s) {
  while (s.size() >= 2 && s.front() == '(' && closing_of_first(s) == s.size() - 1 && s.back() == ')') {
    s = s.substr(1, s.size() - 2);
  }
  return s;
}

std::string lowercase(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

CanonicalForm unparseable_form() { return {CanonicalForm::Kind::unparseable, "!unparseable", {}}; }

CanonicalForm canonicalize(const std::string& s, int depth);

CanonicalForm sequence_form(CanonicalForm::Kind kind, const std::vector<std::string>& parts, std::string open,
                            std::string close, int depth) {
  CanonicalForm form{kind, {}, {}};
  for (const auto& p : parts) {
    auto e = canonicalize(p, depth + 1);
    if (!e.parseable()) return unparseable_form();
    form.elements.push_back(std::move(e));
  }
  if (kind == CanonicalForm::Kind::set) {
    std::sort(form.elements.begin(), form.elements.end(),
              [](const CanonicalForm& a, const CanonicalForm& b) { return a.key < b.key; });
    form.elements.erase(std::unique(form.elements.begin(), form.elements.end()), form.elements.end());
  }
  form.key = open;
  for (std::size_t i = 0; i < form.elements.size(); ++i) {
    if (i) form.key += ",";
    form.key += form.elements[i].key;
  }
  form.key += close;
  return form;
}

CanonicalForm canonicalize(const std::string& s, int depth) {
  if (s.empty() || depth > 32 || !brackets_balanced(s)) return unparseable_form();

  const bool wrapped = closing_of_first(s) == s.size() - 1;
  if (wrapped && s.front() == '{') {
    const std::string inner = s.substr(1, s.size() - 2);
    if (inner.empty()) return {CanonicalForm::Kind::set, "set{}", {}};
    return sequence_form(CanonicalForm::Kind::set, split_top_level(inner), "set{", "}", depth);
  }
  if (wrapped && (s.front() == '(' || s.front() == '[')) {
    const auto parts = split_top_level(s.substr(1, s.size() - 2));
    if (parts.size() >= 2) {
      if (s.front() == '(' && s.back() == ')') {
        return sequence_form(CanonicalForm::Kind::tuple, parts, "tuple(", ")", depth);
      }
      return sequence_form(CanonicalForm::Kind::interval, parts, std::string("interval") + s.front(),
                           std::string(1, s.back()), depth);
    }
  }
  const auto top = split_top_level(s);
  if (top.size() >= 2) return sequence_form(CanonicalForm::Kind::set, top, "set{", "}", depth);

  if (auto value = RationalParser(s).parse()) {
    return {CanonicalForm::Kind::rational, rational_key(*value), {}};
  }
  const std::string sym = lowercase(strip_redundant_parens(s));
  if (sym.empty()) return unparseable_form();
  return {CanonicalForm::Kind::symbolic, "sym:" + sym, {}};
}

}  // namespace

std::string_view to_string(MathReason r) {
  switch (r) {
    case MathReason::match: return "match";
    case MathReason::mismatch: return "mismatch";
    case MathReason::no_boxed: return "no_boxed";
    case MathReason::unparseable: return "unparseable";
  }
  return "?";
}

BoxedExtraction extract_boxed_detailed(std::string_view text) {
  constexpr std::string_view kBoxed = "\\boxed";
  const auto pos = text.rfind(kBoxed);
  if (pos == std::string_view::npos) return {std::nullopt, MathReason::no_boxed};
  std::size_t open = pos + kBoxed.size();
  while (open < text.size() && text[open] == ' ') ++open;
  if (open >= text.size() || text[open] != '{') return {std::nullopt, MathReason::unparseable};
  const std::size_t end = match_brace_group(text, open);
  if (end == std::string_view::npos) return {std::nullopt, MathReason::unparseable};
  return {std::string(text.substr(open + 1, end - open - 2)), MathReason::match};
}

std::optional<std::string> extract_boxed(std::string_view text) { return extract_boxed_detailed(text).content; }

CanonicalForm normalize(std::string_view expr) { return canonicalize(clean(expr), 0); }

MathVerdict check_equivalence(std::string_view candidate, std::string_view reference) {
  const auto c = normalize(candidate);
  const auto r = normalize(reference);
  MathVerdict v;
  v.extracted = std::string(candidate);
  v.normalized_pair = {c.key, r.key};
  if (!c.parseable() || !r.parseable()) {
    v.reason = MathReason::unparseable;
    return v;
  }
  if (c == r) {
    v.score = 1;
    v.reason = MathReason::match;
  } else {
    v.reason = MathReason::mismatch;
  }
  return v;
}

RewardOutcome score_math(const Response& response, const MathGroundTruth& gt) {
  RewardOutcome out;
  out.query_id = response.query_id;
  out.sample_index = response.sample_index;
  out.channel = "math";
  out.token_count = response.token_count;
  out.finish_reason = response.finish_reason;

  const std::string_view source = response.answer ? std::string_view(*response.answer) : std::string_view(response.text);
  const auto boxed = extract_boxed_detailed(source);
  out.trail["used_answer_block"] = response.answer.has_value();
  if (!boxed.content) {
    out.score = 0;
    out.reason = std::string(to_string(boxed.status));
    return out;
  }
  const auto verdict = check_equivalence(*boxed.content, gt.answer);
  out.score = verdict.score;
  out.reason = std::string(to_string(verdict.reason));
  out.trail["extracted"] = *boxed.content;
  out.trail["normalized"] = {verdict.normalized_pair.first, verdict.normalized_pair.second};
  return out;
}

}  // namespace rlpipe::reward
