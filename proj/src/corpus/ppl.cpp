// Copyright (c) 2026, The rlpipe Authors
// SPDX-License-Identifier: Apache-2.0

#include "rlpipe/corpus/ppl.hpp"

#include <cmath>

#include "rlpipe/core/errors.hpp"

namespace rlpipe::corpus {

namespace {
// Texts are padded on the left so the first characters have a context.
constexpr char kPad = '\x02';
}  // namespace

CharNgramScorer::CharNgramScorer(std::size_t order, double add_k) : order_(order), add_k_(add_k) {
  if (order_ < 1) throw ValidationError("n-gram order must be >= 1");
  if (!(add_k_ > 0.0)) throw ValidationError("add_k must be positive");
}

void CharNgramScorer::train(std::string_view text) {
  const std::string padded = std::string(order_ - 1, kPad) + std::string(text);
  for (std::size_t i = order_ - 1; i < padded.size(); ++i) {
    const std::string ctx = padded.substr(i + 1 - order_, order_ - 1);
    ++context_counts_[ctx];
    ++ngram_counts_[ctx + padded[i]];
  }
}

void CharNgramScorer::train(const std::vector<std::string>& texts) {
  for (const auto& t : texts) train(t);
}

double CharNgramScorer::perplexity(std::string_view text) const {
  if (text.empty()) return 1.0;
  const std::string padded = std::string(order_ - 1, kPad) + std::string(text);
  double log_sum = 0.0;
  std::size_t n = 0;
  for (std::size_t i = order_ - 1; i < padded.size(); ++i) {
    const std::string ctx = padded.substr(i + 1 - order_, order_ - 1);
    const auto c_it = context_counts_.find(ctx);
    const auto g_it = ngram_counts_.find(ctx + padded[i]);
    const double c = c_it == context_counts_.end() ? 0.0 : static_cast<double>(c_it->second);
    const double g = g_it == ngram_counts_.end() ? 0.0 : static_cast<double>(g_it->second);
    log_sum += std::log((g + add_k_) / (c + add_k_ * 256.0));
    ++n;
  }
  return std::exp(-log_sum / static_cast<double>(n));
}

}  // namespace rlpipe::corpus
