// Copyright (c) 2026, The rlpipe Authors
// SPDX-License-Identifier: Apache-2.0

#include "rlpipe/corpus/dedup.hpp"

#include <algorithm>
#include <cctype>
#include <limits>

#include "rlpipe/core/digest.hpp"
#include "rlpipe/core/errors.hpp"
#include "rlpipe/core/rng.hpp"
#include "rlpipe/kernels/kernels.hpp"

namespace rlpipe::corpus {
namespace {

constexpr std::size_t kBands = 32;
constexpr std::size_t kRows = kMinHashPerms / kBands;

std::uint32_t fold(std::uint64_t h) { return static_cast<std::uint32_t>(h ^ (h >> 32)); }

void check_threshold(double t) {
  if (!(t > 0.0 && t <= 1.0)) throw ValidationError("jaccard threshold must be in (0, 1]");
}

const MinHasher& default_hasher() {
  static const MinHasher hasher;
  return hasher;
}

std::uint64_t band_key(const std::vector<std::uint32_t>& sig, std::size_t band) {
  std::uint64_t h = fnv1a64(std::string_view(reinterpret_cast<const char*>(&band), sizeof band));
  const auto* rows = reinterpret_cast<const char*>(sig.data() + band * kRows);
  return fnv1a64(std::string_view(rows, kRows * sizeof(std::uint32_t)), h);
}

}  // namespace

std::string normalize_for_match(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool pending_space = false;
  for (unsigned char c : text) {
    if (std::isspace(c)) {
      pending_space = !out.empty();
    } else if (std::ispunct(c)) {
      continue;
    } else {
      if (pending_space) out += ' ';
      pending_space = false;
      out += static_cast<char>(std::tolower(c));
    }
  }
  return out;
}

std::vector<std::uint32_t> shingle_hashes(std::string_view normalized) {
  std::vector<std::uint32_t> out;
  if (normalized.empty()) return out;
  if (normalized.size() < kShingleSize) {
    out.push_back(fold(fnv1a64(normalized)));
    return out;
  }
  out.reserve(normalized.size() - kShingleSize + 1);
  for (std::size_t i = 0; i + kShingleSize <= normalized.size(); ++i) {
    out.push_back(fold(fnv1a64(normalized.substr(i, kShingleSize))));
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

double jaccard(const std::vector<std::uint32_t>& a, const std::vector<std::uint32_t>& b) {
  if (a.empty() && b.empty()) return 1.0;
  std::size_t i = 0, j = 0, inter = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] == b[j]) {
      ++inter, ++i, ++j;
    } else if (a[i] < b[j]) {
      ++i;
    } else {
      ++j;
    }
  }
  const std::size_t uni = a.size() + b.size() - inter;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

MinHasher::MinHasher(std::uint64_t seed) : mul_(kMinHashPerms), add_(kMinHashPerms) {
  Rng rng(seed);
  for (std::size_t k = 0; k < kMinHashPerms; ++k) {
    mul_[k] = static_cast<std::uint32_t>(rng.next_u64()) | 1u;
    add_[k] = static_cast<std::uint32_t>(rng.next_u64());
  }
}

std::vector<std::uint32_t> MinHasher::signature(const std::vector<std::uint32_t>& shingles) const {
  std::vector<std::uint32_t> sig(kMinHashPerms, std::numeric_limits<std::uint32_t>::max());
  kernels::minhash_update(shingles, mul_, add_, sig);
  return sig;
}

double MinHasher::estimate(const std::vector<std::uint32_t>& a, const std::vector<std::uint32_t>& b) const {
  return static_cast<double>(kernels::count_equal(a, b)) / static_cast<double>(kMinHashPerms);
}

Fingerprint fingerprint(std::string_view text, const MinHasher& hasher) {
  Fingerprint fp;
  fp.normalized = normalize_for_match(text);
  fp.shingles = shingle_hashes(fp.normalized);
  fp.signature = hasher.signature(fp.shingles);
  return fp;
}

DecontaminationResult decontaminate(const std::vector<Query>& corpus, const std::vector<Query>& eval_set,
                                    double jaccard_threshold) {
  check_threshold(jaccard_threshold);
  const auto& hasher = default_hasher();
  DecontaminationResult result;
  result.matches.resize(corpus.size());
  if (eval_set.empty()) {
    result.empty_eval_warning = true;
    return result;
  }

  std::vector<Fingerprint> eval;
  std::unordered_map<std::string, std::size_t> exact;
  eval.reserve(eval_set.size());
  for (std::size_t e = 0; e < eval_set.size(); ++e) {
    eval.push_back(fingerprint(eval_set[e].user_text(), hasher));
    exact.emplace(eval.back().normalized, e);
  }

  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const auto fp = fingerprint(corpus[i].user_text(), hasher);
    auto& m = result.matches[i];
    if (auto it = exact.find(fp.normalized); it != exact.end()) {
      m = {FilterVerdict::dropped(FilterReason::contaminated), it->second, 1.0};
      continue;
    }
    for (std::size_t e = 0; e < eval.size(); ++e) {
      if (hasher.estimate(fp.signature, eval[e].signature) < jaccard_threshold - kMinHashSlack) continue;
      const double j = jaccard(fp.shingles, eval[e].shingles);
      if (j > m.similarity) {
        m.similarity = j;
        m.matched = e;
      }
    }
    if (m.similarity >= jaccard_threshold) m.verdict = FilterVerdict::dropped(FilterReason::contaminated);
  }
  return result;
}

std::vector<DedupMatch> deduplicate(const std::vector<Query>& corpus, double jaccard_threshold) {
  check_threshold(jaccard_threshold);
  const auto& hasher = default_hasher();
  std::vector<DedupMatch> out(corpus.size());
  std::vector<Fingerprint> reps;
  std::vector<std::size_t> rep_index;
  std::unordered_map<std::string, std::size_t> exact;
  std::unordered_map<std::uint64_t, std::vector<std::size_t>> buckets;

  for (std::size_t i = 0; i < corpus.size(); ++i) {
    auto fp = fingerprint(corpus[i].user_text(), hasher);
    auto& m = out[i];
    if (auto it = exact.find(fp.normalized); it != exact.end()) {
      m = {FilterVerdict::dropped(FilterReason::exact_dup), rep_index[it->second], 1.0};
      continue;
    }
    std::vector<std::size_t> cand;
    for (std::size_t b = 0; b < kBands; ++b) {
      if (auto it = buckets.find(band_key(fp.signature, b)); it != buckets.end()) {
        cand.insert(cand.end(), it->second.begin(), it->second.end());
      }
    }
    std::sort(cand.begin(), cand.end());
    cand.erase(std::unique(cand.begin(), cand.end()), cand.end());
    for (auto r : cand) {
      if (hasher.estimate(fp.signature, reps[r].signature) < jaccard_threshold - kMinHashSlack) continue;
      const double j = jaccard(fp.shingles, reps[r].shingles);
      if (j > m.similarity) {
        m.similarity = j;
        m.matched = rep_index[r];
      }
    }
    if (m.similarity >= jaccard_threshold) {
      m.verdict = FilterVerdict::dropped(FilterReason::near_dup);
      continue;
    }
    m.matched.reset();
    m.similarity = 0.0;
    const std::size_t r = reps.size();
    for (std::size_t b = 0; b < kBands; ++b) buckets[band_key(fp.signature, b)].push_back(r);
    exact.emplace(fp.normalized, r);
    reps.push_back(std::move(fp));
    rep_index.push_back(i);
  }
  return out;
}

}  // namespace rlpipe::corpus
