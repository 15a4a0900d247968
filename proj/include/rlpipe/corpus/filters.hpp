// Copyright (c) 2026, The rlpipe Authors
// SPDX-License-Identifier: Apache-2.0
//
// Per-query and per-response classifiers. Every function here is pure: it
// looks at its input and returns a verdict without touching the query.

#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rlpipe/core/types.hpp"

namespace rlpipe::corpus {

struct FilterVerdict {
  std::optional<FilterReason> drop;

  bool keep() const { return !drop.has_value(); }
  static FilterVerdict kept() { return {}; }
  static FilterVerdict dropped(FilterReason r) { return {r}; }
  friend bool operator==(const FilterVerdict&, const FilterVerdict&) = default;
};

// True when the text contains http://, https://, ftp:// or a www. host.
bool contains_url(std::string_view text);
FilterVerdict filter_url(const Query& q);

struct ImageLexicon {
  // Matched case-insensitively on word boundaries; '-' counts as a word
  // character so "image-processing" never matches "image".
  std::vector<std::string> phrases;
  bool markdown_images = true;

  static ImageLexicon defaults();
};

bool references_image(std::string_view text, const ImageLexicon& lexicon);
FilterVerdict filter_image_ref(const Query& q, const ImageLexicon& lexicon = ImageLexicon::defaults());

// Math-specific screening.
struct McqOption {
  char letter = 'A';
  std::string body;
};

struct MathSuitability {
  enum class Kind { ok, drop, rewrite_mcq } kind = Kind::ok;
  std::optional<FilterReason> reason;
  // Set for rewrite_mcq.
  std::string rewritten_text;
  std::string rewritten_answer;
  std::vector<McqOption> options;
};

bool looks_like_proof(std::string_view text);
bool has_multiple_subquestions(std::string_view text);
// Options (A)..(D)/(E) in one consistent marker style, or empty.
std::vector<McqOption> parse_mcq_options(std::string_view text, std::size_t* stem_end = nullptr);

MathSuitability classify_math_suitability(const Query& q);

// Response screening.
struct ResponseFilterConfig {
  double ppl_threshold = 50.0;
  std::size_t ngram_n = 20;
  std::size_t min_repeats = 2;
  std::size_t max_period = 512;
};

// Whitespace tokens.
std::vector<std::string_view> tokenize(std::string_view text);

// True when some phrase of at least `n` tokens repeats `min_repeats` times
// back to back.
bool has_consecutive_repeat(const std::vector<std::string_view>& tokens, std::size_t n, std::size_t min_repeats,
                            std::size_t max_period = 512);

FilterVerdict filter_response(const Response& r, const ResponseFilterConfig& cfg = {});

// passed / scored over the outcomes; unscored outcomes are skipped.
// Throws ValidationError when nothing was scored.
PassRate compute_pass_rate(const std::vector<RewardOutcome>& outcomes);
PassRate compute_pass_rate(Query& q, const std::vector<RewardOutcome>& outcomes);

}  // namespace rlpipe::corpus
