// Copyright (c) 2026, The rlpipe Authors
// SPDX-License-Identifier: Apache-2.0
//
// Perplexity scoring interface and a small character n-gram surrogate for
// corpora whose responses arrive without a recorded ppl_score.

#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace rlpipe::corpus {

class PplScorer {
 public:
  virtual ~PplScorer() = default;
  virtual double perplexity(std::string_view text) const = 0;
};

// Byte-level n-gram model with add-k smoothing over a 256-symbol alphabet.
class CharNgramScorer final : public PplScorer {
 public:
  explicit CharNgramScorer(std::size_t order = 3, double add_k = 0.1);

  void train(std::string_view text);
  void train(const std::vector<std::string>& texts);
  double perplexity(std::string_view text) const override;

 private:
  std::size_t order_;
  double add_k_;
  std::unordered_map<std::string, std::uint64_t> context_counts_;
  std::unordered_map<std::string, std::uint64_t> ngram_counts_;
};

}  // namespace rlpipe::corpus
