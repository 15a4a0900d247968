// Copyright (c) 2026, The rlpipe Authors
// SPDX-License-Identifier: Apache-2.0
//
// The subcommands behind the rlpipe binary. Each reads its inputs, writes a
// run directory ending in manifest.json, and returns an exit status:
//
//   0  success
//   1  finished, but some work failed (unscored outcomes, digest mismatch)
//   2  invalid input or configuration (thrown as ValidationError, mapped by
//      the binary)
//   3  nothing to train: the difficulty gate left no query

#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "rlpipe/balancer/balancer.hpp"
#include "rlpipe/cli/config.hpp"

namespace rlpipe::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitPartial = 1;
inline constexpr int kExitInvalid = 2;
inline constexpr int kExitNothingToTrain = 3;

struct CommandResult {
  int exit_code = kExitOk;
  Json summary = Json::object();
  std::vector<std::string> warnings;
};

struct FilterOptions {
  std::filesystem::path corpus;
  std::filesystem::path eval;
  std::optional<std::filesystem::path> responses;
  std::filesystem::path out;
  // Abort on the first malformed line instead of recording it.
  bool strict = false;
};

// Query filters, then response filters; responses of dropped queries go too.
// Writes queries.jsonl (kept), dropped.jsonl, filter_report.jsonl,
// responses.jsonl (when given) and summary.json.
CommandResult cmd_filter(const FilterOptions& opt, const PipelineConfig& cfg);

struct RewardOptions {
  std::filesystem::path corpus;
  std::filesystem::path responses;
  std::filesystem::path out;
  bool strict = false;
};

// Writes outcomes.jsonl (input order), queries.jsonl with pass rates,
// unscored.jsonl and summary.json. Throws ValidationError when a response
// names an unknown query.
CommandResult cmd_reward(const RewardOptions& opt, const PipelineConfig& cfg);

struct GrpoPrepOptions {
  std::filesystem::path corpus;
  // Reward outcomes or plain rollout records. Optional for a transition-only
  // run.
  std::optional<std::filesystem::path> rollouts;
  int stage = 1;
  bool transition = false;
  // Stage-1 training rollouts, for accuracy tallies.
  std::vector<std::filesystem::path> history;
  std::optional<std::filesystem::path> supplements;
  std::int64_t first_round = 0;
  std::filesystem::path out;
};

// gate -> groups -> batches/batch_NNNN.jsonl plus plan.json; with transition,
// also stage2_queries.jsonl and stage2.json.
CommandResult cmd_grpo_prep(const GrpoPrepOptions& opt, const PipelineConfig& cfg);

struct SimulateOptions {
  std::filesystem::path scenario;
  // Empty: the scenario's own strategy.
  std::vector<balancer::StrategyKind> strategies;
  std::optional<std::uint64_t> seed;
  std::filesystem::path out;
};

// Per strategy: report_<s>.jsonl and rates_<s>.csv. Also summary.csv,
// summary.txt (tables plus the strategy comparison) and summary.json.
CommandResult cmd_simulate(const SimulateOptions& opt, const PipelineConfig& cfg);

// Re-digests a run directory's outputs against its manifest.
CommandResult cmd_report(const std::filesystem::path& dir);

// Serves POST /execute on host:port with a local sandbox until stopped.
void serve_sandbox(const std::string& host, int port, const PipelineConfig& cfg);

}  // namespace rlpipe::cli
