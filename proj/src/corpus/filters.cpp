// Copyright (c) 2026, The rlpipe Authors
// SPDX-License-Identifier: Apache-2.0

#include "rlpipe/corpus/filters.hpp"

#include <algorithm>
#include <cctype>
#include <regex>

#include "rlpipe/core/errors.hpp"
#include "rlpipe/reward/math.hpp"

namespace rlpipe::corpus {
namespace {

bool is_word(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-'; }

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return std::string(s);
}

bool any_user_turn(const Query& q, bool (*pred)(std::string_view, const void*), const void* ctx) {
  for (const auto& t : q.turns) {
    if (t.role == Role::user && pred(t.text, ctx)) return true;
  }
  return false;
}

const std::regex& url_regex() {
  static const std::regex re(R"(((https?|ftp)://[^\s/?#]+)|(\bwww\.[a-z0-9-]+(\.[a-z0-9-]+)+))", std::regex::icase);
  return re;
}

const std::regex& markdown_image_regex() {
  static const std::regex re(R"(!\[[^\]\n]*\]\([^)\n]*\)|<img\b)", std::regex::icase);
  return re;
}

bool phrase_at_boundary(const std::string& hay, const std::string& phrase) {
  std::size_t pos = 0;
  while ((pos = hay.find(phrase, pos)) != std::string::npos) {
    const std::size_t end = pos + phrase.size();
    const bool left = pos == 0 || !is_word(hay[pos - 1]);
    const bool right = end == hay.size() || !is_word(hay[end]);
    if (left && right) return true;
    ++pos;
  }
  return false;
}

}  // namespace

bool contains_url(std::string_view text) {
  return std::regex_search(text.begin(), text.end(), url_regex());
}

FilterVerdict filter_url(const Query& q) {
  const bool hit = any_user_turn(q, [](std::string_view t, const void*) { return contains_url(t); }, nullptr);
  return hit ? FilterVerdict::dropped(FilterReason::url) : FilterVerdict::kept();
}

ImageLexicon ImageLexicon::defaults() {
  return {{"image below", "image above", "in the image", "this image", "the image shown", "attached image",
           "the picture", "this picture", "the photo", "figure below", "figure above", "in the figure",
           "diagram below", "in the diagram", "graph below"},
          true};
}

bool references_image(std::string_view text, const ImageLexicon& lexicon) {
  if (lexicon.markdown_images && std::regex_search(text.begin(), text.end(), markdown_image_regex())) return true;
  const std::string hay = lower(text);
  for (const auto& p : lexicon.phrases) {
    if (phrase_at_boundary(hay, lower(p))) return true;
  }
  return false;
}

FilterVerdict filter_image_ref(const Query& q, const ImageLexicon& lexicon) {
  const bool hit = any_user_turn(
      q, [](std::string_view t, const void* lex) { return references_image(t, *static_cast<const ImageLexicon*>(lex)); },
      &lexicon);
  return hit ? FilterVerdict::dropped(FilterReason::image_ref) : FilterVerdict::kept();
}

bool looks_like_proof(std::string_view text) {
  static const std::regex proof(R"(\b(prove|show that|demonstrate that|verify that|justify that)\b)", std::regex::icase);
  static const std::regex ask(R"(\b(find|compute|calculate|evaluate|determine|what is|what are|how many|how much)\b)",
                              std::regex::icase);
  return std::regex_search(text.begin(), text.end(), proof) && !std::regex_search(text.begin(), text.end(), ask);
}

bool has_multiple_subquestions(std::string_view text) {
  auto in_order = [&](std::string_view a, std::string_view b) {
    const auto pa = text.find(a);
    return pa != std::string_view::npos && text.find(b, pa + a.size()) != std::string_view::npos;
  };
  if (in_order("(a)", "(b)") || in_order("(i)", "(ii)")) return true;
  static const std::regex line_parts(R"((^|\n)\s*a\)[^\n]*\n\s*b\))");
  return std::regex_search(text.begin(), text.end(), line_parts);
}

std::vector<McqOption> parse_mcq_options(std::string_view text, std::size_t* stem_end) {
  // Marker styles, tried in order: "(A)", "A)", "A.", "A:".
  struct Style {
    std::string open, close;
    bool need_space_before;
  };
  const Style styles[] = {{"(", ")", false}, {"", ")", true}, {"", ".", true}, {"", ":", true}};
  for (const auto& st : styles) {
    std::vector<std::pair<std::size_t, std::size_t>> spans;  // marker start, body start
    std::size_t from = 0;
    for (char letter = 'A'; letter <= 'E'; ++letter) {
      const std::string marker = st.open + letter + st.close;
      std::size_t pos = from;
      bool found = false;
      while ((pos = text.find(marker, pos)) != std::string_view::npos) {
        const bool before_ok = !st.need_space_before || pos == 0 || std::isspace(static_cast<unsigned char>(text[pos - 1]));
        const std::size_t after = pos + marker.size();
        const bool after_ok = after == text.size() || std::isspace(static_cast<unsigned char>(text[after]));
        if (before_ok && after_ok) {
          found = true;
          break;
        }
        ++pos;
      }
      if (!found) break;
      spans.emplace_back(pos, pos + marker.size());
      from = pos + marker.size();
    }
    if (spans.size() < 4) continue;
    std::vector<McqOption> out;
    for (std::size_t i = 0; i < spans.size(); ++i) {
      std::size_t end;
      if (i + 1 < spans.size()) {
        end = spans[i + 1].first;
      } else {
        end = text.find('\n', spans[i].second);
        if (end == std::string_view::npos) end = text.size();
      }
      std::string body = trim(text.substr(spans[i].second, end - spans[i].second));
      while (!body.empty() && (body.back() == ',' || body.back() == ';')) body.pop_back();
      out.push_back({static_cast<char>('A' + i), trim(body)});
    }
    if (stem_end) *stem_end = spans.front().first;
    return out;
  }
  return {};
}

MathSuitability classify_math_suitability(const Query& q) {
  MathSuitability out;
  const std::string text = q.user_text();
  if (looks_like_proof(text)) {
    out.kind = MathSuitability::Kind::drop;
    out.reason = FilterReason::proof;
    return out;
  }
  std::size_t stem_end = 0;
  auto options = parse_mcq_options(text, &stem_end);
  if (options.empty() && has_multiple_subquestions(text)) {
    out.kind = MathSuitability::Kind::drop;
    out.reason = FilterReason::multi_subquestion;
    return out;
  }
  if (options.empty()) return out;

  auto unparseable = [&] {
    out.kind = MathSuitability::Kind::drop;
    out.reason = FilterReason::mcq_unparseable;
    out.options = options;
    return out;
  };
  for (const auto& o : options) {
    if (o.body.empty() || !reward::normalize(o.body).parseable()) return unparseable();
  }
  const auto* gt = std::get_if<MathGroundTruth>(&q.verification);
  if (!gt) return unparseable();
  std::string key = trim(gt->answer);
  if (auto boxed = reward::extract_boxed(key)) key = trim(*boxed);
  while (!key.empty() && (key.front() == '(' || key.front() == '[')) key.erase(key.begin());
  while (!key.empty() && (key.back() == ')' || key.back() == ']' || key.back() == '.')) key.pop_back();

  const McqOption* chosen = nullptr;
  if (key.size() == 1 && std::isalpha(static_cast<unsigned char>(key[0]))) {
    const char letter = static_cast<char>(std::toupper(static_cast<unsigned char>(key[0])));
    for (const auto& o : options) {
      if (o.letter == letter) chosen = &o;
    }
  } else {
    for (const auto& o : options) {
      if (reward::check_equivalence(o.body, gt->answer).score == 1) {
        chosen = &o;
        break;
      }
    }
  }
  if (!chosen) return unparseable();

  out.kind = MathSuitability::Kind::rewrite_mcq;
  out.rewritten_text = trim(std::string_view(text).substr(0, stem_end)) + " Answer with the value.";
  out.rewritten_answer = chosen->body;
  out.options = options;
  return out;
}

std::vector<std::string_view> tokenize(std::string_view text) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    const std::size_t start = i;
    while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    if (i > start) out.push_back(text.substr(start, i - start));
  }
  return out;
}

bool has_consecutive_repeat(const std::vector<std::string_view>& tokens, std::size_t n, std::size_t min_repeats,
                            std::size_t max_period) {
  if (n == 0 || min_repeats < 2) throw ValidationError("ngram_n must be >= 1 and min_repeats >= 2");
  const std::size_t t = tokens.size();
  const std::size_t top = std::min(max_period, t / min_repeats);
  for (std::size_t p = n; p <= top; ++p) {
    // A phrase of length p repeats r times iff tokens[j] == tokens[j + p]
    // holds over a run of p * (r - 1) consecutive positions.
    const std::size_t need = p * (min_repeats - 1);
    std::size_t run = 0;
    for (std::size_t j = 0; j + p < t; ++j) {
      run = tokens[j] == tokens[j + p] ? run + 1 : 0;
      if (run >= need) return true;
    }
  }
  return false;
}

FilterVerdict filter_response(const Response& r, const ResponseFilterConfig& cfg) {
  if (cfg.ngram_n < 2 || cfg.min_repeats < 2) throw ValidationError("ngram_n and min_repeats must be >= 2");
  if (!parse_response_blocks(r.text).well_formed()) return FilterVerdict::dropped(FilterReason::structure);
  if (!r.turns.empty() && r.turns.back().role != Role::assistant) return FilterVerdict::dropped(FilterReason::structure);
  if (r.ppl_score && *r.ppl_score > cfg.ppl_threshold) return FilterVerdict::dropped(FilterReason::ppl);
  if (has_consecutive_repeat(tokenize(r.text), cfg.ngram_n, cfg.min_repeats, cfg.max_period)) {
    return FilterVerdict::dropped(FilterReason::ngram_repeat);
  }
  return FilterVerdict::kept();
}

PassRate compute_pass_rate(const std::vector<RewardOutcome>& outcomes) {
  if (outcomes.empty()) throw ValidationError("pass rate needs at least one outcome");
  PassRate pr;
  for (const auto& o : outcomes) {
    if (!o.scored) continue;
    ++pr.total;
    if (o.score >= 1.0) ++pr.passed;
  }
  if (pr.total == 0) throw ValidationError("pass rate needs at least one scored outcome");
  return pr;
}

PassRate compute_pass_rate(Query& q, const std::vector<RewardOutcome>& outcomes) {
  const auto pr = compute_pass_rate(outcomes);
  q.pass_rate = pr;
  return pr;
}

}  // namespace rlpipe::corpus
