// Copyright (c) 2026, The rlpipe Authors
// SPDX-License-Identifier: Apache-2.0
//
// Exact and near-duplicate detection over character 5-shingles.
//
// Near-duplicate checks are two-phase: a 128-permutation MinHash estimate
// screens candidates (estimate >= threshold - kMinHashSlack), then the exact
// Jaccard over hashed shingle sets decides. Hash collisions can only make
// sets look more similar; with 32-bit hashes and short texts they are rare
// enough to ignore.

#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "rlpipe/core/types.hpp"
#include "rlpipe/corpus/filters.hpp"

namespace rlpipe::corpus {

constexpr std::size_t kShingleSize = 5;
constexpr std::size_t kMinHashPerms = 128;
constexpr double kMinHashSlack = 0.15;

// Lowercased, ASCII punctuation removed, whitespace runs collapsed to one
// space, trimmed.
std::string normalize_for_match(std::string_view text);

// Sorted, unique 32-bit hashes of all kShingleSize-character windows of the
// normalized text. Texts shorter than a shingle yield the whole text.
std::vector<std::uint32_t> shingle_hashes(std::string_view normalized);

// Exact Jaccard of two sorted unique sets; two empty sets count as 1.
double jaccard(const std::vector<std::uint32_t>& a, const std::vector<std::uint32_t>& b);

class MinHasher {
 public:
  explicit MinHasher(std::uint64_t seed = 0x5eed5eedULL);
  std::vector<std::uint32_t> signature(const std::vector<std::uint32_t>& shingles) const;
  double estimate(const std::vector<std::uint32_t>& a, const std::vector<std::uint32_t>& b) const;

 private:
  std::vector<std::uint32_t> mul_;
  std::vector<std::uint32_t> add_;
};

struct Fingerprint {
  std::string normalized;
  std::vector<std::uint32_t> shingles;
  std::vector<std::uint32_t> signature;
};

Fingerprint fingerprint(std::string_view text, const MinHasher& hasher);

struct DedupMatch {
  FilterVerdict verdict;
  // Index of the matched item (eval item or earlier corpus item), if any.
  std::optional<std::size_t> matched;
  double similarity = 0.0;
};

struct DecontaminationResult {
  std::vector<DedupMatch> matches;
  bool empty_eval_warning = false;
};

// Drops queries whose normalized user text equals an eval item or whose
// shingle Jaccard with one is >= threshold. Throws ValidationError unless
// 0 < threshold <= 1.
DecontaminationResult decontaminate(const std::vector<Query>& corpus, const std::vector<Query>& eval_set,
                                    double jaccard_threshold);

// Intra-corpus dedup over the whole input in order: the first member of
// each duplicate cluster is kept, later members drop with exact_dup or
// near_dup. Candidate lookup uses LSH banding over the signatures.
std::vector<DedupMatch> deduplicate(const std::vector<Query>& corpus, double jaccard_threshold);

}  // namespace rlpipe::corpus
