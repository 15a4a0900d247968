// Copyright (c) 2026, The rlpipe Authors
// SPDX-License-Identifier: Apache-2.0
//
// Turns scored rollouts into advantage-annotated training batches and runs
// the two-stage curriculum: pass-rate gating, overlong masking, batch
// shaping, and the stage-1 -> stage-2 transition.
//
// Advantage of rollout i in a group, over the unmasked entries U:
//
//   a_i = (r_i - mean_U) / (std_U + epsilon_std)     std_U = population std
//
// Masked rollouts get exactly 0. If U is empty or its rewards are all equal
// every advantage is 0 and the group is flagged degenerate.

#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "rlpipe/core/types.hpp"

namespace rlpipe::grpo {

enum class Stage { one = 1, two = 2 };

struct GrpoConfig {
  std::size_t group_size = 16;
  std::size_t batch_queries = 256;
  std::int64_t max_len_stage1 = 24576;
  std::int64_t max_len_stage2 = 32768;
  double lr_stage1 = 4e-6;
  double lr_stage2 = 1e-6;
  double epsilon_std = 1e-6;
  // Allow a final batch with fewer than batch_queries groups.
  bool allow_partial = false;

  // No KL term, by contract.
  static constexpr double kl_coeff = 0.0;

  std::int64_t max_len(Stage s) const { return s == Stage::one ? max_len_stage1 : max_len_stage2; }
  double lr(Stage s) const { return s == Stage::one ? lr_stage1 : lr_stage2; }

  // Throws ValidationError on zero sizes, max_len_stage2 <= max_len_stage1,
  // non-positive learning rates or epsilon_std.
  void validate() const;
};

Json to_json(const GrpoConfig& c);
GrpoConfig grpo_config_from_json(const Json& j);

struct Rollout {
  std::string query_id;
  std::int64_t sample_index = 0;
  double reward = 0.0;
  std::int64_t token_count = 0;
  std::string finish_reason = "stop";
};

// Unscored outcomes cannot be trained on; ValidationError.
Rollout rollout_from(const RewardOutcome& o);

// Math and code queries are gated; they must carry a pass rate.
bool is_gated(Category c);

// Active queries only. Gated categories are kept iff 0 < pass_rate < 1;
// others pass through untouched. Throws ValidationError when an active
// gated query has no pass rate.
std::vector<Query> gate_queries(const std::vector<Query>& queries);

// token_count >= max_len, or finish_reason "length" / "length_cap".
bool is_overlong(const Rollout& r, std::int64_t max_len);
std::vector<bool> mark_overlong(const std::vector<Rollout>& rollouts, std::int64_t max_len);

struct Advantages {
  std::vector<double> values;
  bool degenerate = false;
};

// Throws ValidationError when the mask length differs from the rewards.
Advantages compute_advantages(const std::vector<double>& rewards, const std::vector<bool>& overlong_mask,
                              double epsilon_std);

struct GrpoGroup {
  std::string query_id;
  std::vector<Rollout> rollouts;
  std::vector<double> rewards;
  std::vector<double> advantages;
  std::vector<bool> overlong_mask;
  bool degenerate = false;
};

// Rollouts are ordered by sample_index. Throws ValidationError unless there
// are exactly group_size rollouts, all of query_id, with distinct indices.
GrpoGroup build_group(const std::string& query_id, std::vector<Rollout> rollouts, const GrpoConfig& cfg, Stage stage);

// Groups every query's rollouts and builds the groups in parallel. Result
// is keyed by query id.
std::map<std::string, GrpoGroup> build_groups(const std::vector<Rollout>& rollouts, const GrpoConfig& cfg, Stage stage);

struct TrainingBatch {
  Stage stage = Stage::one;
  // Generation round the rollouts came from; a consumer asserts one update
  // per round.
  std::int64_t round_id = 0;
  double kl_coeff = GrpoConfig::kl_coeff;
  double lr = 0.0;
  std::int64_t max_len = 0;
  bool partial = false;
  std::vector<GrpoGroup> groups;

  std::size_t rollout_count() const;
};

// The first batch_queries gated queries (in order) that have a group.
// Throws ValidationError when fewer are available and partial batches are
// off, or when any group has the wrong size.
TrainingBatch assemble_batch(const std::vector<Query>& gated, const std::map<std::string, GrpoGroup>& groups,
                             const GrpoConfig& cfg, Stage stage, std::int64_t round_id);

struct BatchPlan {
  std::vector<TrainingBatch> batches;
  // Gated queries with a group that did not fit a full batch (strict mode).
  std::vector<std::string> leftover;
  // Gated queries with no group at all.
  std::vector<std::string> missing;
};

// Consecutive batches, round ids first_round, first_round + 1, ...
BatchPlan plan_batches(const std::vector<Query>& gated, const std::map<std::string, GrpoGroup>& groups,
                       const GrpoConfig& cfg, Stage stage, std::int64_t first_round);

// One rollout per line: query_id, sample_index, reward, advantage, mask,
// stage, round_id, kl_coeff.
void write_batch_jsonl(const TrainingBatch& batch, std::ostream& out);

struct Accuracy {
  std::int64_t correct = 0;
  std::int64_t total = 0;
};

// Per-query correctness tally over every stage-1 rollout seen so far. A
// rollout counts as correct when its reward is >= 1.
class AccuracyHistory {
 public:
  void record(const Rollout& r);
  void record(const std::vector<Rollout>& rs);
  const std::map<std::string, Accuracy>& tallies() const { return tallies_; }
  bool fully_solved(const std::string& query_id) const;

 private:
  std::map<std::string, Accuracy> tallies_;
};

struct SupplementSpec {
  std::size_t general_chat = 15000;
  std::size_t instruction_follow = 5000;
};

struct Stage2Set {
  std::vector<Query> queries;
  std::vector<std::string> pruned;
  std::size_t added_general_chat = 0;
  std::size_t added_instruction_follow = 0;
  // Fewer supplements available than requested.
  bool supplement_shortfall = false;
  Stage stage = Stage::two;
  std::int64_t max_len = 0;
  double lr = 0.0;
};

// Drops math/code queries whose every stage-1 rollout was correct, then
// appends the first `spec` supplements of each category from the pool
// (other categories and ids already present are skipped).
Stage2Set transition_stage(const std::vector<Query>& stage1, const AccuracyHistory& history,
                           const std::vector<Query>& supplement_pool, const SupplementSpec& spec, const GrpoConfig& cfg);

}  // namespace rlpipe::grpo
