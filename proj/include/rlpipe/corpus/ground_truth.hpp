// Copyright (c) 2026, The rlpipe Authors
// SPDX-License-Identifier: Apache-2.0
//
// Ground-truth cross-checking against answer oracles, plus the optional
// oracle-backed clarity screen.
//
// Oracle remote contract:
//   POST /answer
//   request:  {"model": string, "prompt": string, "sample_index": int}
//   response: {"answer": string}

#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "rlpipe/core/types.hpp"
#include "rlpipe/corpus/filters.hpp"

namespace rlpipe::corpus {

class OracleClient {
 public:
  virtual ~OracleClient() = default;
  // One sampled answer. Throws TransportError on transport failure.
  virtual std::string answer(const std::string& prompt, int sample_index) = 0;
};

// Scripted oracle: answers come from a callback, or from a per-prompt list
// cycled by sample index.
class MockOracle final : public OracleClient {
 public:
  using Fn = std::function<std::string(const std::string& prompt, int sample_index)>;
  explicit MockOracle(Fn fn) : fn_(std::move(fn)) {}
  explicit MockOracle(std::map<std::string, std::vector<std::string>> scripted, std::string fallback = "");

  std::string answer(const std::string& prompt, int sample_index) override { return fn_(prompt, sample_index); }

 private:
  Fn fn_;
};

class HttpOracle final : public OracleClient {
 public:
  HttpOracle(std::string endpoint, std::string model, double timeout_seconds = 60.0);
  std::string answer(const std::string& prompt, int sample_index) override;

 private:
  std::string endpoint_;
  std::string model_;
  double timeout_seconds_;
};

struct GroundTruthDecision {
  enum class Kind { confirmed, revised, unresolved } kind = Kind::unresolved;
  std::string new_answer;
  // Representative of the largest equivalence class among primary samples.
  std::string common;
  std::size_t common_votes = 0;
  std::vector<std::string> primary_answers;
  std::string secondary_answer;
};

std::string_view to_string(GroundTruthDecision::Kind k);

// Final answer inside an oracle reply: last \boxed{} when present, else the
// trimmed text.
std::string oracle_final_answer(const std::string& reply);

// Groups answers into math-equivalence classes; returns the index of the
// first member of the largest class (earliest class wins ties) and its size.
std::pair<std::size_t, std::size_t> most_common_answer(const std::vector<std::string>& answers);

// Throws ValidationError unless q is math with a MathGroundTruth and
// n_samples > 0. Transport errors propagate before anything is decided.
GroundTruthDecision verify_ground_truth(const Query& q, OracleClient& primary, OracleClient& secondary, int n_samples);

// Applies a decision: revised rewrites the ground truth and marks the query
// rewritten; the others leave it untouched.
void apply_decision(Query& q, const GroundTruthDecision& d);

// Oracle-backed clarity screen. The oracle is asked whether the query is
// clear and complete; a reply starting with "no" drops it as unclear.
FilterVerdict filter_clarity(const Query& q, OracleClient& oracle);

}  // namespace rlpipe::corpus
