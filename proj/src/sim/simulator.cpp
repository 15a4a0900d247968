// Copyright (c) 2026, The rlpipe Authors
// SPDX-License-Identifier: Apache-2.0

#include "rlpipe/sim/simulator.hpp"

#include <algorithm>
#include <cstdio>
#include <limits>
#include <ostream>
#include <sstream>

#include "rlpipe/core/errors.hpp"
#include "rlpipe/kernels/kernels.hpp"

namespace rlpipe::sim {
namespace {

// Remaining work below this fraction of the target counts as finished; it
// absorbs rounding between time_to_advance and tokens_in.
constexpr double kCompletionTolerance = 1e-9;

}  // namespace

double BatchReport::utilization() const {
  if (instances.empty() || makespan <= 0.0) return 0.0;
  double busy = 0.0;
  for (const auto& in : instances) busy += in.busy_time;
  return busy / (makespan * static_cast<double>(instances.size()));
}

double BatchReport::tail_ratio() const {
  if (instances.empty()) return 0.0;
  std::vector<double> finish;
  for (const auto& in : instances) finish.push_back(in.finish_time);
  std::sort(finish.begin(), finish.end());
  const std::size_t n = finish.size();
  const double median = n % 2 ? finish[n / 2] : (finish[n / 2 - 1] + finish[n / 2]) / 2.0;
  return median > 0.0 ? finish.back() / median : 0.0;
}

SimWorld::SimWorld(std::vector<RolloutJob> jobs, std::vector<InstanceConfig> instances, StrategyKind strategy,
                   std::uint64_t seed, SimOptions options)
    : jobs_(std::move(jobs)), strategy_(strategy), seed_(seed), options_(options) {
  if (instances.empty()) throw ValidationError("simulation needs at least one instance");
  for (const auto& cfg : instances) {
    cfg.model.validate();
    if (cfg.max_active == 0) throw ValidationError("instances need at least one slot");
    instances_.push_back(Instance{cfg, {}, {}, {}, 0.0, 0.0, 0.0, 0});
  }
  for (const auto& j : jobs_) {
    if (j.target_length < 1) throw ValidationError("target_length must be >= 1");
  }
  const std::size_t n = instances_.size();
  timings_.resize(jobs_.size());
  for (std::size_t j = 0; j < jobs_.size(); ++j) {
    timings_[j].job = j;
    timings_[j].query_id = jobs_[j].query_id;
    timings_[j].sample_index = jobs_[j].sample_index;
    timings_[j].length = jobs_[j].target_length;
  }
  if (strategy_ == StrategyKind::streaming_dynamic) {
    metrics_.emplace(n, options_.streaming);
    estimator_.emplace(options_.streaming.prior_estimate);
    global_queue_ = options_.streaming.query_priority ? balancer::interleaved_order(jobs_, seed_)
                                                      : balancer::spread_order(jobs_, seed_);
  } else {
    const bool bound = strategy_ == StrategyKind::static_bound;
    const auto assignment =
        bound ? balancer::assign_static_bound(jobs_, n) : balancer::assign_spread_static(jobs_, n, seed_);
    const auto queues =
        balancer::queues_from_assignment(assignment, n, bound ? std::vector<std::size_t>{} : balancer::spread_order(jobs_, seed_));
    for (std::size_t i = 0; i < n; ++i) {
      instances_[i].queue.assign(queues[i].begin(), queues[i].end());
      for (const auto j : queues[i]) jobs_[j].assigned_instance = i;
    }
  }
  fill_slots();
  record_rates();
}

bool SimWorld::done() const { return completed_ == jobs_.size(); }

std::size_t SimWorld::pending_count() const {
  std::size_t n = global_queue_.size();
  for (const auto& in : instances_) n += in.queue.size();
  return n;
}

double SimWorld::mean_length(const Instance& in) const {
  if (in.jobs.empty()) return 0.0;
  double produced = 0.0;
  for (std::size_t k = 0; k < in.jobs.size(); ++k) {
    produced += static_cast<double>(jobs_[in.jobs[k]].target_length) - in.remaining[k];
  }
  return produced / static_cast<double>(in.jobs.size());
}

void SimWorld::start_job(std::size_t instance, std::size_t job) {
  auto& in = instances_[instance];
  in.jobs.push_back(job);
  in.remaining.push_back(static_cast<double>(jobs_[job].target_length));
  jobs_[job].assigned_instance = instance;
  timings_[job].instance = instance;
  timings_[job].start_time = time_;
}

void SimWorld::fill_slots() {
  if (strategy_ != StrategyKind::streaming_dynamic) {
    for (std::size_t i = 0; i < instances_.size(); ++i) {
      auto& in = instances_[i];
      while (in.jobs.size() < in.config.max_active && !in.queue.empty()) {
        const auto j = in.queue.front();
        in.queue.pop_front();
        start_job(i, j);
      }
    }
    return;
  }
  while (!global_queue_.empty()) {
    std::vector<bool> eligible(instances_.size());
    bool any = false;
    for (std::size_t i = 0; i < instances_.size(); ++i) {
      eligible[i] = instances_[i].jobs.size() < instances_[i].config.max_active;
      any = any || eligible[i];
    }
    if (!any) break;
    // Largest estimate first; the first in queue order wins ties.
    std::size_t pick = 0;
    if (options_.streaming.query_priority) {
      double best = -1.0;
      for (std::size_t k = 0; k < global_queue_.size(); ++k) {
        const double e = estimator_->estimate(jobs_[global_queue_[k]].query_id);
        if (e > best) {
          best = e;
          pick = k;
        }
      }
    }
    const auto j = global_queue_[pick];
    global_queue_.erase(global_queue_.begin() + static_cast<std::ptrdiff_t>(pick));
    const double d = options_.streaming.query_priority ? estimator_->estimate(jobs_[j].query_id)
                                                       : metrics_->default_estimate();
    const auto snapshot = metrics_->snapshot();
    const auto chosen = balancer::route_streaming(snapshot, d, &eligible);
    if (options_.record_routing_trace) {
      balancer::RoutingDecision dec{time_, j, chosen, d, {}, eligible};
      for (const auto& m : snapshot) dec.pressures.push_back(balancer::pressure(m, d));
      routing_trace_.push_back(std::move(dec));
    }
    const double estimate = options_.streaming.oracle ? static_cast<double>(jobs_[j].target_length) : d;
    start_job(chosen, j);
    metrics_->apply(balancer::JobStarted{chosen, j, estimate});
  }
}

void SimWorld::record_rates() {
  if (!options_.record_rate_trace) return;
  for (std::size_t i = 0; i < instances_.size(); ++i) {
    const auto& in = instances_[i];
    const double n = static_cast<double>(in.jobs.size());
    const double lbar = mean_length(in);
    rate_trace_.push_back({time_, i, in.jobs.size(), lbar, in.jobs.empty() ? 0.0 : in.config.model.aggregate_rate(lbar, n)});
  }
}

void SimWorld::step(StepPolicy) {
  const std::size_t n = instances_.size();
  std::vector<double> lbar(n, 0.0), min_rem(n, 0.0), dt_i(n, std::numeric_limits<double>::infinity());
  std::optional<std::size_t> first;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& in = instances_[i];
    if (in.jobs.empty()) continue;
    lbar[i] = mean_length(in);
    min_rem[i] = std::max(0.0, *std::min_element(in.remaining.begin(), in.remaining.end()));
    dt_i[i] = in.config.model.time_to_advance(lbar[i], static_cast<double>(in.jobs.size()), min_rem[i]);
    if (!first || dt_i[i] < dt_i[*first]) first = i;
  }
  if (!first) throw ValidationError("simulation has no active or pending jobs");
  const double dt = dt_i[*first];

  for (std::size_t i = 0; i < n; ++i) {
    auto& in = instances_[i];
    if (in.jobs.empty()) continue;
    const double batch = static_cast<double>(in.jobs.size());
    const double x = dt_i[i] == dt ? min_rem[i] : in.config.model.tokens_in(lbar[i], batch, dt);
    kernels::advance_remaining(in.remaining, x);
    in.tokens += x * batch;
    in.busy_time += dt;
    if (metrics_) metrics_->apply(balancer::JobProgressed{i, dt, x});
  }
  time_ += dt;

  for (std::size_t i = 0; i < n; ++i) {
    auto& in = instances_[i];
    for (std::size_t k = 0; k < in.jobs.size();) {
      const auto j = in.jobs[k];
      if (in.remaining[k] > kCompletionTolerance * static_cast<double>(jobs_[j].target_length)) {
        ++k;
        continue;
      }
      timings_[j].completion_time = time_;
      in.finish_time = time_;
      ++in.completed;
      ++completed_;
      if (metrics_) metrics_->apply(balancer::JobCompleted{i, j, jobs_[j].target_length});
      if (estimator_) estimator_->observe(jobs_[j].query_id, jobs_[j].target_length);
      in.jobs.erase(in.jobs.begin() + static_cast<std::ptrdiff_t>(k));
      in.remaining.erase(in.remaining.begin() + static_cast<std::ptrdiff_t>(k));
    }
  }
  fill_slots();
  record_rates();
}

BatchReport SimWorld::report() const {
  BatchReport r;
  r.strategy = strategy_;
  r.seed = seed_;
  r.makespan = time_;
  for (const auto& j : jobs_) r.total_tokens += static_cast<double>(j.target_length);
  for (std::size_t i = 0; i < instances_.size(); ++i) {
    const auto& in = instances_[i];
    r.instances.push_back({i, in.busy_time, time_ - in.busy_time, in.finish_time, in.completed, in.tokens});
    r.produced_tokens += in.tokens;
  }
  r.jobs = timings_;
  r.rate_trace = rate_trace_;
  r.routing_trace = routing_trace_;
  return r;
}

BatchReport run_generation_batch(std::vector<RolloutJob> jobs, std::vector<InstanceConfig> instances,
                                 StrategyKind strategy, std::uint64_t seed, SimOptions options) {
  if (jobs.empty()) throw ValidationError("generation batch needs at least one job");
  SimWorld world(std::move(jobs), std::move(instances), strategy, seed, options);
  while (!world.done()) world.step();
  return world.report();
}

Json summary_json(const BatchReport& r) {
  return {{"record", "summary"},
          {"strategy", balancer::to_string(r.strategy)},
          {"seed", r.seed},
          {"makespan", r.makespan},
          {"utilization", r.utilization()},
          {"tail_ratio", r.tail_ratio()},
          {"total_tokens", r.total_tokens},
          {"produced_tokens", r.produced_tokens},
          {"instances", r.instances.size()},
          {"jobs", r.jobs.size()}};
}

void write_report_jsonl(const BatchReport& r, std::ostream& out) {
  out << summary_json(r).dump() << '\n';
  for (const auto& in : r.instances) {
    out << Json{{"record", "instance"}, {"id", in.id}, {"busy_time", in.busy_time}, {"idle_time", in.idle_time},
                {"finish_time", in.finish_time}, {"jobs_completed", in.jobs_completed}, {"tokens", in.tokens}}
               .dump()
        << '\n';
  }
  for (const auto& j : r.jobs) {
    out << Json{{"record", "job"},       {"job", j.job},
                {"query_id", j.query_id}, {"sample_index", j.sample_index},
                {"instance", j.instance}, {"start_time", j.start_time},
                {"completion_time", j.completion_time}, {"length", j.length}}
               .dump()
        << '\n';
  }
  for (const auto& s : r.rate_trace) {
    out << Json{{"record", "rate"}, {"time", s.time}, {"instance", s.instance}, {"active", s.active},
                {"mean_length", s.mean_length}, {"aggregate_rate", s.aggregate_rate}}
               .dump()
        << '\n';
  }
  for (const auto& d : r.routing_trace) {
    auto j = balancer::to_json(d);
    j["record"] = "route";
    out << j.dump() << '\n';
  }
}

std::string summary_table(const BatchReport& r) {
  std::ostringstream os;
  char line[160];
  std::snprintf(line, sizeof line, "strategy %s  seed %llu  makespan %.2fs  utilization %.3f  tail %.3f\n",
                std::string(balancer::to_string(r.strategy)).c_str(), static_cast<unsigned long long>(r.seed), r.makespan,
                r.utilization(), r.tail_ratio());
  os << line;
  std::snprintf(line, sizeof line, "%8s %12s %12s %12s %8s %14s\n", "instance", "busy_s", "idle_s", "finish_s", "jobs",
                "tokens");
  os << line;
  for (const auto& in : r.instances) {
    std::snprintf(line, sizeof line, "%8zu %12.2f %12.2f %12.2f %8zu %14.0f\n", in.id, in.busy_time, in.idle_time,
                  in.finish_time, in.jobs_completed, in.tokens);
    os << line;
  }
  return os.str();
}

void write_rate_csv(const BatchReport& r, std::ostream& out) {
  out << "time,instance,active,mean_length,aggregate_rate\n";
  char line[128];
  for (const auto& s : r.rate_trace) {
    std::snprintf(line, sizeof line, "%.6f,%zu,%zu,%.3f,%.6f\n", s.time, s.instance, s.active, s.mean_length,
                  s.aggregate_rate);
    out << line;
  }
}

}  // namespace rlpipe::sim
