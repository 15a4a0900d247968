// Copyright (c) 2026, The rlpipe Authors
// SPDX-License-Identifier: Apache-2.0
//
// Scenario files:
//
//   {
//     "instances": 8, "max_active": 32,
//     "throughput": {"r_short": 60, "r_long": 50, "l_ref": 32768, "k_sat": 19}
//                or {"points": [[length, batch, rate], ...]},
//     "queries": 64, "samples_per_query": 16,
//     "lengths": {"type": "lognormal", "mu": 8.7, "sigma": 0.84, "query_sigma": 0.65, "cap": 24576},
//     "strategy": "static_bound", "seed": 1,
//     "streaming": {"alpha": 0.3, "prior_estimate": 4096, "prior_rate": 60, "oracle": false,
//                   "query_priority": true}
//   }

#pragma once

#include <optional>
#include <vector>

#include "rlpipe/core/types.hpp"
#include "rlpipe/sim/lengths.hpp"
#include "rlpipe/sim/simulator.hpp"

namespace rlpipe::sim {

struct Scenario {
  std::size_t instances = 8;
  std::size_t max_active = 32;
  ThroughputModel model;
  // Set when the model came from calibration points.
  std::optional<CalibrationResult> calibration;
  std::size_t queries = 64;
  std::size_t samples_per_query = 16;
  LengthDistribution lengths = LognormalLengths{};
  StrategyKind strategy = StrategyKind::static_bound;
  std::uint64_t seed = 1;
  balancer::StreamingConfig streaming;
};

Scenario scenario_from_json(const Json& j);
Json to_json(const Scenario& s);

// Jobs drawn with the scenario seed, so every strategy sees the same batch.
std::vector<RolloutJob> scenario_jobs(const Scenario& s);
std::vector<InstanceConfig> scenario_instances(const Scenario& s);

BatchReport run_scenario(const Scenario& s, SimOptions options = {});

}  // namespace rlpipe::sim
