// Copyright (c) 2026, The rlpipe Authors
// SPDX-License-Identifier: Apache-2.0
//
// Event-driven rollout simulator. Each instance has max_active decode slots;
// all sequences on an instance share the rate r(L_mean, |active|), so the
// mean length follows a closed-form curve and the next completion on an
// instance is the sequence with the least remaining work. The world jumps
// from one completion to the next; nothing is integrated numerically.
//
// Static strategies give every instance its own queue up front. The
// streaming strategy keeps one global queue and places a job whenever a slot
// frees, choosing among instances with a free slot by routing pressure.

#pragma once

#include <cstdint>
#include <deque>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "rlpipe/balancer/balancer.hpp"
#include "rlpipe/core/types.hpp"
#include "rlpipe/sim/job.hpp"
#include "rlpipe/sim/throughput.hpp"

namespace rlpipe::sim {

using balancer::StrategyKind;

struct InstanceConfig {
  ThroughputModel model;
  std::size_t max_active = 32;
};

struct SimOptions {
  balancer::StreamingConfig streaming;
  bool record_rate_trace = true;
  bool record_routing_trace = true;
};

enum class StepPolicy { next_event };

struct InstanceSummary {
  std::size_t id = 0;
  double busy_time = 0.0;
  double idle_time = 0.0;
  double finish_time = 0.0;
  std::size_t jobs_completed = 0;
  double tokens = 0.0;
};

struct JobTiming {
  std::size_t job = 0;
  std::string query_id;
  std::int64_t sample_index = 0;
  std::size_t instance = 0;
  double start_time = 0.0;
  double completion_time = 0.0;
  std::int64_t length = 0;
};

// Instance state from `time` until the next sample for that instance.
struct RateSample {
  double time = 0.0;
  std::size_t instance = 0;
  std::size_t active = 0;
  double mean_length = 0.0;
  double aggregate_rate = 0.0;
};

struct BatchReport {
  StrategyKind strategy = StrategyKind::static_bound;
  std::uint64_t seed = 0;
  double makespan = 0.0;
  double total_tokens = 0.0;     // sum of target lengths
  double produced_tokens = 0.0;  // integral of the aggregate rates
  std::vector<InstanceSummary> instances;
  std::vector<JobTiming> jobs;
  std::vector<RateSample> rate_trace;
  std::vector<balancer::RoutingDecision> routing_trace;

  // busy time over instances * makespan
  double utilization() const;
  // slowest instance finish / median instance finish
  double tail_ratio() const;
};

class SimWorld {
 public:
  // Throws ValidationError on empty instances, invalid models, zero slots
  // or a job with target_length < 1.
  SimWorld(std::vector<RolloutJob> jobs, std::vector<InstanceConfig> instances, StrategyKind strategy,
           std::uint64_t seed, SimOptions options = {});

  bool done() const;
  double time() const { return time_; }
  std::size_t active_count(std::size_t instance) const { return instances_.at(instance).jobs.size(); }
  std::size_t pending_count() const;

  // Advances to the next completion event. Throws ValidationError when no
  // job is active or pending.
  void step(StepPolicy policy = StepPolicy::next_event);

  BatchReport report() const;

 private:
  struct Instance {
    InstanceConfig config;
    std::vector<std::size_t> jobs;  // active job indices
    std::vector<double> remaining;  // parallel to jobs
    std::deque<std::size_t> queue;  // static strategies only
    double busy_time = 0.0;
    double finish_time = 0.0;
    double tokens = 0.0;
    std::size_t completed = 0;
  };

  double mean_length(const Instance& in) const;
  void start_job(std::size_t instance, std::size_t job);
  void fill_slots();
  void record_rates();

  std::vector<RolloutJob> jobs_;
  std::vector<Instance> instances_;
  StrategyKind strategy_;
  std::uint64_t seed_;
  SimOptions options_;
  std::vector<std::size_t> global_queue_;
  std::optional<balancer::MetricsStore> metrics_;
  std::optional<balancer::LengthEstimator> estimator_;
  std::vector<JobTiming> timings_;
  std::vector<RateSample> rate_trace_;
  std::vector<balancer::RoutingDecision> routing_trace_;
  double time_ = 0.0;
  std::size_t completed_ = 0;
};

BatchReport run_generation_batch(std::vector<RolloutJob> jobs, std::vector<InstanceConfig> instances,
                                 StrategyKind strategy, std::uint64_t seed, SimOptions options = {});

// One JSON object per line: a summary line, then instance, job, rate and
// route records, each tagged with "record".
void write_report_jsonl(const BatchReport& report, std::ostream& out);
std::string summary_table(const BatchReport& report);
// Plot data: time,instance,active,mean_length,aggregate_rate.
void write_rate_csv(const BatchReport& report, std::ostream& out);
Json summary_json(const BatchReport& report);

}  // namespace rlpipe::sim
