// Copyright (c) 2026, The rlpipe Authors
// SPDX-License-Identifier: Apache-2.0

#include "rlpipe/sim/lengths.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "rlpipe/core/errors.hpp"
#include "rlpipe/core/rng.hpp"

namespace rlpipe::sim {
namespace {

std::int64_t round_length(double log_len, std::int64_t cap) {
  const double capped = std::min(std::exp(log_len), static_cast<double>(cap));
  return std::clamp<std::int64_t>(std::llround(capped), 1, cap);
}

std::string query_id(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "q%04zu", i);
  return buf;
}

}  // namespace

void validate(const LengthDistribution& dist) {
  if (const auto* ln = std::get_if<LognormalLengths>(&dist)) {
    if (!std::isfinite(ln->mu)) throw ValidationError("lognormal mu must be finite");
    if (!(ln->sigma >= 0.0) || !std::isfinite(ln->sigma)) throw ValidationError("lognormal sigma must be >= 0");
    if (!(ln->query_sigma >= 0.0) || ln->query_sigma > ln->sigma) {
      throw ValidationError("query_sigma must lie in [0, sigma]");
    }
    if (ln->cap < 1) throw ValidationError("length cap must be >= 1");
    return;
  }
  const auto& em = std::get<EmpiricalLengths>(dist);
  if (em.values.empty()) throw ValidationError("empirical length list is empty");
  for (const auto v : em.values) {
    if (v < 1) throw ValidationError("empirical lengths must be >= 1");
  }
}

std::vector<std::int64_t> sample_lengths(const LengthDistribution& dist, std::size_t n, std::uint64_t seed) {
  validate(dist);
  Rng rng(seed);
  std::vector<std::int64_t> out(n);
  if (const auto* ln = std::get_if<LognormalLengths>(&dist)) {
    for (auto& v : out) v = round_length(ln->mu + ln->sigma * rng.normal(), ln->cap);
  } else {
    const auto& values = std::get<EmpiricalLengths>(dist).values;
    for (auto& v : out) v = values[rng.below(values.size())];
  }
  return out;
}

std::vector<RolloutJob> make_jobs(const LengthDistribution& dist, std::size_t n_queries, std::size_t samples_per_query,
                                  std::uint64_t seed) {
  validate(dist);
  Rng rng(seed);
  std::vector<RolloutJob> jobs;
  jobs.reserve(n_queries * samples_per_query);
  const auto* ln = std::get_if<LognormalLengths>(&dist);
  const double sample_sigma = ln ? std::sqrt(ln->sigma * ln->sigma - ln->query_sigma * ln->query_sigma) : 0.0;
  for (std::size_t q = 0; q < n_queries; ++q) {
    const double center = ln ? ln->mu + ln->query_sigma * rng.normal() : 0.0;
    for (std::size_t s = 0; s < samples_per_query; ++s) {
      RolloutJob job;
      job.query_id = query_id(q);
      job.sample_index = static_cast<std::int64_t>(s);
      if (ln) {
        job.target_length = round_length(center + sample_sigma * rng.normal(), ln->cap);
      } else {
        const auto& values = std::get<EmpiricalLengths>(dist).values;
        job.target_length = values[rng.below(values.size())];
      }
      jobs.push_back(std::move(job));
    }
  }
  return jobs;
}

Json to_json(const LengthDistribution& dist) {
  if (const auto* ln = std::get_if<LognormalLengths>(&dist)) {
    return {{"type", "lognormal"}, {"mu", ln->mu}, {"sigma", ln->sigma}, {"query_sigma", ln->query_sigma}, {"cap", ln->cap}};
  }
  return {{"type", "empirical"}, {"values", std::get<EmpiricalLengths>(dist).values}};
}

LengthDistribution lengths_from_json(const Json& j) {
  const auto type = j.value("type", std::string("lognormal"));
  LengthDistribution d;
  if (type == "lognormal") {
    LognormalLengths ln;
    ln.mu = j.at("mu").get<double>();
    ln.sigma = j.at("sigma").get<double>();
    ln.query_sigma = j.value("query_sigma", 0.0);
    ln.cap = j.value("cap", ln.cap);
    d = ln;
  } else if (type == "empirical") {
    d = EmpiricalLengths{j.at("values").get<std::vector<std::int64_t>>()};
  } else {
    throw ValidationError("unknown length distribution: " + type);
  }
  validate(d);
  return d;
}

}  // namespace rlpipe::sim
