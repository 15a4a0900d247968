// Copyright (c) 2026, The rlpipe Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <variant>
#include <vector>

#include "rlpipe/core/types.hpp"
#include "rlpipe/sim/job.hpp"

namespace rlpipe::sim {

// log L = mu + query_sigma * z_query + sqrt(sigma^2 - query_sigma^2) * z_sample,
// rounded and clamped to [1, cap]. query_sigma is the part of the spread
// shared by all samples of one query; sigma is the total.
struct LognormalLengths {
  double mu = 8.0;
  double sigma = 0.8;
  double query_sigma = 0.0;
  std::int64_t cap = 24576;
};

// Seeded resample with replacement.
struct EmpiricalLengths {
  std::vector<std::int64_t> values;
};

using LengthDistribution = std::variant<LognormalLengths, EmpiricalLengths>;

// Throws ValidationError on non-finite mu, sigma < 0, query_sigma outside
// [0, sigma], cap < 1, or an empty / non-positive empirical list.
void validate(const LengthDistribution& dist);

// n independent lengths (each sample is its own query).
std::vector<std::int64_t> sample_lengths(const LengthDistribution& dist, std::size_t n, std::uint64_t seed);

// n_queries x samples_per_query jobs in query-major order, ids q0000, q0001, ...
std::vector<RolloutJob> make_jobs(const LengthDistribution& dist, std::size_t n_queries, std::size_t samples_per_query,
                                  std::uint64_t seed);

Json to_json(const LengthDistribution& dist);
LengthDistribution lengths_from_json(const Json& j);

}  // namespace rlpipe::sim
