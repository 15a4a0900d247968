// Copyright (c) 2026, The rlpipe Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <string>

namespace rlpipe::sim {

// One generation sample. target_length is fixed up front but schedulers
// only learn it when the job completes (unless running in oracle mode).
struct RolloutJob {
  std::string query_id;
  std::int64_t sample_index = 0;
  std::int64_t target_length = 1;
  std::optional<std::size_t> assigned_instance;
};

}  // namespace rlpipe::sim
