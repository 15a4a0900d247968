// Copyright (c) 2026, The rlpipe Authors
// SPDX-License-Identifier: Apache-2.0
//
// Job placement strategies for the rollout phase.
//
//   static_bound       every sample of a query on the query's instance
//   spread_static      samples dealt round-robin after a seeded shuffle
//   streaming_dynamic  each job placed when dispatched, by live metrics
//
// The streaming router only sees what a real balancer could observe:
// per-instance counts, estimated remaining work and smoothed throughput.

#pragma once

#include <cstdint>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

#include "rlpipe/core/types.hpp"
#include "rlpipe/sim/job.hpp"

namespace rlpipe::balancer {

using sim::RolloutJob;

enum class StrategyKind { static_bound, spread_static, streaming_dynamic };

std::string_view to_string(StrategyKind k);
StrategyKind parse_strategy(std::string_view s);

// Queries (in order of first appearance) round-robin over instances; each
// job gets its query's instance. Throws ValidationError on zero instances.
std::vector<std::size_t> assign_static_bound(const std::vector<RolloutJob>& jobs, std::size_t n_instances);

// Seeded dealing order: query order and the sample order inside each query
// are shuffled, and a query's samples stay consecutive.
std::vector<std::size_t> spread_order(const std::vector<RolloutJob>& jobs, std::uint64_t seed);

// Jobs in spread_order dealt round-robin with one running counter. A query's
// samples thus occupy consecutive instances, at most ceil(s / n) per
// instance, and per-instance job counts differ by at most one.
std::vector<std::size_t> assign_spread_static(const std::vector<RolloutJob>& jobs, std::size_t n_instances,
                                              std::uint64_t seed);

// Job indices per instance, in the given order (job order when empty).
std::vector<std::vector<std::size_t>> queues_from_assignment(const std::vector<std::size_t>& assignment,
                                                             std::size_t n_instances,
                                                             const std::vector<std::size_t>& order = {});

struct InstanceMetrics {
  std::size_t active_count = 0;
  double sum_remaining_estimate = 0.0;
  double recent_rate = 0.0;
  std::size_t queue_depth = 0;
};

Json to_json(const InstanceMetrics& m);

struct StreamingConfig {
  double alpha = 0.3;
  // Length prior before any job has completed.
  double prior_estimate = 4096.0;
  // Aggregate tokens/s prior before any progress was observed.
  double prior_rate = 60.0;
  // Bounding experiments only: estimates use the true lengths.
  bool oracle = false;
  // Dispatch the pending job with the largest length estimate first, where
  // a job's estimate is the mean completed length of its query's siblings.
  // The queue is interleaved by sample rank so every query reveals a few
  // lengths early. When false, jobs leave in spread order.
  bool query_priority = true;
};

// Length estimates learned from completions: per-query mean when a sibling
// has finished, else the global mean, else the prior.
class LengthEstimator {
 public:
  explicit LengthEstimator(double prior) : prior_(prior) {}

  void observe(const std::string& query_id, std::int64_t length);
  double estimate(const std::string& query_id) const;
  double global_mean() const;

 private:
  struct Tally {
    double sum = 0.0;
    std::size_t n = 0;
  };
  double prior_;
  Tally global_;
  std::unordered_map<std::string, Tally> per_query_;
};

// Spread order reshuffled into rounds: every query's first sample (in the
// spread order's query order), then every query's second sample, and so on.
std::vector<std::size_t> interleaved_order(const std::vector<RolloutJob>& jobs, std::uint64_t seed);

// Expected seconds to drain the instance after adding one more job.
double pressure(const InstanceMetrics& m, double default_estimate);

// Argmin pressure; ties by lowest active_count, then lowest id. When
// `eligible` is given only those instances are considered. Throws
// ValidationError when no instance is eligible.
std::size_t route_streaming(const std::vector<InstanceMetrics>& metrics, double default_estimate,
                            const std::vector<bool>* eligible = nullptr);

// Observable events that drive the metrics.
struct JobStarted {
  std::size_t instance;
  std::size_t job;
  double estimate;
};
struct JobProgressed {
  std::size_t instance;
  double dt;
  double tokens_per_sequence;
};
struct JobCompleted {
  std::size_t instance;
  std::size_t job;
  std::int64_t length;
};
struct JobQueued {
  std::size_t instance;
};
struct JobDequeued {
  std::size_t instance;
};
using InstanceEvent = std::variant<JobStarted, JobProgressed, JobCompleted, JobQueued, JobDequeued>;

// Metrics for every instance plus per-job remaining estimates. All methods
// lock, so snapshots are consistent under concurrent updates.
class MetricsStore {
 public:
  MetricsStore(std::size_t n_instances, StreamingConfig cfg);

  void apply(const InstanceEvent& e);
  void apply(const std::vector<InstanceEvent>& events);

  std::vector<InstanceMetrics> snapshot() const;
  InstanceMetrics metrics(std::size_t instance) const;
  // Mean of completed lengths, or the prior before the first completion.
  double default_estimate() const;
  std::size_t completed() const;

 private:
  mutable std::mutex mutex_;
  StreamingConfig cfg_;
  std::vector<InstanceMetrics> metrics_;
  std::vector<std::unordered_map<std::size_t, double>> remaining_;
  double completed_tokens_ = 0.0;
  std::size_t completed_ = 0;
};

struct RoutingDecision {
  double time = 0.0;
  std::size_t job = 0;
  std::size_t instance = 0;
  double default_estimate = 0.0;
  std::vector<double> pressures;
  std::vector<bool> eligible;
};

Json to_json(const RoutingDecision& d);

}  // namespace rlpipe::balancer
