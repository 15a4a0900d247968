// Copyright (c) 2026, The rlpipe Authors
// SPDX-License-Identifier: Apache-2.0
//
// Structured run configuration. Every field has a built-in default; a JSON
// file overrides any subset, and three environment variables override the
// remote endpoints only:
//
//   RLPIPE_SANDBOX_ENDPOINT   code execution (/execute)
//   RLPIPE_JUDGE_ENDPOINT     judge model (/judge)
//   RLPIPE_ORACLE_ENDPOINT    answer and clarity oracles (/answer)

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "rlpipe/core/types.hpp"
#include "rlpipe/corpus/pipeline.hpp"
#include "rlpipe/grpo/grpo.hpp"
#include "rlpipe/reward/sandbox.hpp"

namespace rlpipe::cli {

struct FilterSettings {
  corpus::QueryFilterConfig queries;
  corpus::ResponseFilterConfig responses;
  // Responses without a ppl_score are scored by a character n-gram model
  // trained on this file's lines, when set.
  std::optional<std::filesystem::path> ppl_reference;
  std::size_t ppl_order = 3;
  // Ground-truth cross-checking needs the oracle endpoint.
  bool verify_ground_truth = false;
  std::string primary_model = "primary";
  std::string secondary_model = "secondary";
  int gt_samples = 8;
};

struct RewardSettings {
  reward::ResourceLimits limits;
  std::size_t workers = 4;
  std::size_t queue_capacity = 64;
  double judge_s_max = 5.0;
  std::string judge_prompt;
  double remote_timeout_seconds = 120.0;
};

struct Endpoints {
  std::optional<std::string> sandbox;
  std::optional<std::string> judge;
  std::optional<std::string> oracle;
};

struct PipelineConfig {
  std::uint64_t seed = 1;
  FilterSettings filter;
  RewardSettings reward;
  grpo::GrpoConfig grpo;
  grpo::SupplementSpec supplements;
  Endpoints endpoints;
  double calibration_tolerance = 0.10;
};

// The default judge template; {{query}} and {{response}} are substituted.
std::string default_judge_prompt();

// Defaults, then the file (when given), then the environment. A relative
// judge_prompt_path resolves against the config file's directory.
PipelineConfig load_config(const std::optional<std::filesystem::path>& path);
PipelineConfig config_from_json(const Json& j, const std::filesystem::path& base_dir = {});
void apply_env_overrides(PipelineConfig& cfg);

// Endpoints are excluded: they change where work runs, not what it computes.
Json to_json(const PipelineConfig& cfg);
std::string config_hash(const PipelineConfig& cfg);

}  // namespace rlpipe::cli
