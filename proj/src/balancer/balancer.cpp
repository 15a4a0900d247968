// Copyright (c) 2026, The rlpipe Authors
// SPDX-License-Identifier: Apache-2.0

#include "rlpipe/balancer/balancer.hpp"

#include <algorithm>
#include <limits>
#include <map>

#include "rlpipe/core/errors.hpp"
#include "rlpipe/core/rng.hpp"

namespace rlpipe::balancer {
namespace {

void require_instances(std::size_t n) {
  if (n == 0) throw ValidationError("at least one instance is required");
}

// Query ids in order of first appearance, with the member job indices.
std::vector<std::vector<std::size_t>> group_by_query(const std::vector<RolloutJob>& jobs) {
  std::map<std::string, std::size_t> slot;
  std::vector<std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    const auto [it, fresh] = slot.try_emplace(jobs[i].query_id, groups.size());
    if (fresh) groups.emplace_back();
    groups[it->second].push_back(i);
  }
  return groups;
}

}  // namespace

std::string_view to_string(StrategyKind k) {
  switch (k) {
    case StrategyKind::static_bound:
      return "static_bound";
    case StrategyKind::spread_static:
      return "spread_static";
    case StrategyKind::streaming_dynamic:
      return "streaming_dynamic";
  }
  return "?";
}

StrategyKind parse_strategy(std::string_view s) {
  if (s == "static_bound") return StrategyKind::static_bound;
  if (s == "spread_static") return StrategyKind::spread_static;
  if (s == "streaming_dynamic") return StrategyKind::streaming_dynamic;
  throw ValidationError("unknown strategy: " + std::string(s));
}

std::vector<std::size_t> assign_static_bound(const std::vector<RolloutJob>& jobs, std::size_t n_instances) {
  require_instances(n_instances);
  std::vector<std::size_t> out(jobs.size());
  const auto groups = group_by_query(jobs);
  for (std::size_t g = 0; g < groups.size(); ++g) {
    for (const auto j : groups[g]) out[j] = g % n_instances;
  }
  return out;
}

std::vector<std::size_t> spread_order(const std::vector<RolloutJob>& jobs, std::uint64_t seed) {
  auto groups = group_by_query(jobs);
  Rng rng(seed);
  rng.shuffle(std::span(groups));
  for (auto& g : groups) rng.shuffle(std::span(g));
  std::vector<std::size_t> order;
  order.reserve(jobs.size());
  for (const auto& g : groups) order.insert(order.end(), g.begin(), g.end());
  return order;
}

std::vector<std::size_t> interleaved_order(const std::vector<RolloutJob>& jobs, std::uint64_t seed) {
  const auto order = spread_order(jobs, seed);
  std::vector<std::vector<std::size_t>> groups;
  for (std::size_t k = 0; k < order.size(); ++k) {
    if (k == 0 || jobs[order[k]].query_id != jobs[order[k - 1]].query_id) groups.emplace_back();
    groups.back().push_back(order[k]);
  }
  std::vector<std::size_t> out;
  out.reserve(order.size());
  for (std::size_t round = 0; out.size() < order.size(); ++round) {
    for (const auto& g : groups) {
      if (round < g.size()) out.push_back(g[round]);
    }
  }
  return out;
}

void LengthEstimator::observe(const std::string& query_id, std::int64_t length) {
  const double v = static_cast<double>(length);
  global_.sum += v;
  ++global_.n;
  auto& q = per_query_[query_id];
  q.sum += v;
  ++q.n;
}

double LengthEstimator::estimate(const std::string& query_id) const {
  const auto it = per_query_.find(query_id);
  if (it != per_query_.end() && it->second.n > 0) return it->second.sum / static_cast<double>(it->second.n);
  return global_mean();
}

double LengthEstimator::global_mean() const {
  return global_.n == 0 ? prior_ : global_.sum / static_cast<double>(global_.n);
}

std::vector<std::size_t> assign_spread_static(const std::vector<RolloutJob>& jobs, std::size_t n_instances,
                                              std::uint64_t seed) {
  require_instances(n_instances);
  std::vector<std::size_t> out(jobs.size());
  std::size_t counter = 0;
  for (const auto j : spread_order(jobs, seed)) out[j] = counter++ % n_instances;
  return out;
}

std::vector<std::vector<std::size_t>> queues_from_assignment(const std::vector<std::size_t>& assignment,
                                                             std::size_t n_instances,
                                                             const std::vector<std::size_t>& order) {
  std::vector<std::vector<std::size_t>> queues(n_instances);
  const auto place = [&](std::size_t j) {
    if (j >= assignment.size() || assignment[j] >= n_instances) throw ValidationError("assignment out of range");
    queues[assignment[j]].push_back(j);
  };
  if (order.empty()) {
    for (std::size_t j = 0; j < assignment.size(); ++j) place(j);
  } else {
    for (const auto j : order) place(j);
  }
  return queues;
}

Json to_json(const InstanceMetrics& m) {
  return {{"active_count", m.active_count},
          {"sum_remaining_estimate", m.sum_remaining_estimate},
          {"recent_rate", m.recent_rate},
          {"queue_depth", m.queue_depth}};
}

double pressure(const InstanceMetrics& m, double default_estimate) {
  const double rate = m.recent_rate > 0.0 ? m.recent_rate : std::numeric_limits<double>::min();
  return (m.sum_remaining_estimate + default_estimate) / rate;
}

std::size_t route_streaming(const std::vector<InstanceMetrics>& metrics, double default_estimate,
                            const std::vector<bool>* eligible) {
  std::optional<std::size_t> best;
  double best_p = 0.0;
  for (std::size_t i = 0; i < metrics.size(); ++i) {
    if (eligible && (i >= eligible->size() || !(*eligible)[i])) continue;
    const double p = pressure(metrics[i], default_estimate);
    if (!best || p < best_p || (p == best_p && metrics[i].active_count < metrics[*best].active_count)) {
      best = i;
      best_p = p;
    }
  }
  if (!best) throw ValidationError("no eligible instance to route to");
  return *best;
}

MetricsStore::MetricsStore(std::size_t n_instances, StreamingConfig cfg)
    : cfg_(cfg), metrics_(n_instances), remaining_(n_instances) {
  require_instances(n_instances);
  if (!(cfg.alpha > 0.0 && cfg.alpha <= 1.0)) throw ValidationError("alpha must be in (0, 1]");
  if (!(cfg.prior_rate > 0.0) || !(cfg.prior_estimate > 0.0)) throw ValidationError("priors must be positive");
  for (auto& m : metrics_) m.recent_rate = cfg.prior_rate;
}

void MetricsStore::apply(const InstanceEvent& e) {
  std::lock_guard lock(mutex_);
  const auto check = [&](std::size_t i) {
    if (i >= metrics_.size()) throw ValidationError("event for unknown instance");
    return i;
  };
  std::visit(
      [&](const auto& ev) {
        using T = std::decay_t<decltype(ev)>;
        auto& m = metrics_[check(ev.instance)];
        if constexpr (std::is_same_v<T, JobStarted>) {
          const double est = std::max(0.0, ev.estimate);
          remaining_[ev.instance][ev.job] = est;
          m.sum_remaining_estimate += est;
          ++m.active_count;
        } else if constexpr (std::is_same_v<T, JobProgressed>) {
          if (ev.dt <= 0.0 || m.active_count == 0) return;
          double sum = 0.0;
          for (auto& [job, rem] : remaining_[ev.instance]) {
            rem = std::max(0.0, rem - ev.tokens_per_sequence);
            sum += rem;
          }
          m.sum_remaining_estimate = sum;
          const double observed = ev.tokens_per_sequence * static_cast<double>(m.active_count) / ev.dt;
          m.recent_rate = cfg_.alpha * observed + (1.0 - cfg_.alpha) * m.recent_rate;
        } else if constexpr (std::is_same_v<T, JobCompleted>) {
          auto& jobs = remaining_[ev.instance];
          const auto it = jobs.find(ev.job);
          if (it == jobs.end()) throw ValidationError("completion for a job that is not active");
          m.sum_remaining_estimate -= it->second;
          jobs.erase(it);
          --m.active_count;
          if (jobs.empty()) m.sum_remaining_estimate = 0.0;
          completed_tokens_ += static_cast<double>(ev.length);
          ++completed_;
        } else if constexpr (std::is_same_v<T, JobQueued>) {
          ++m.queue_depth;
        } else {
          if (m.queue_depth == 0) throw ValidationError("dequeue from an empty instance queue");
          --m.queue_depth;
        }
      },
      e);
}

void MetricsStore::apply(const std::vector<InstanceEvent>& events) {
  for (const auto& e : events) apply(e);
}

std::vector<InstanceMetrics> MetricsStore::snapshot() const {
  std::lock_guard lock(mutex_);
  return metrics_;
}

InstanceMetrics MetricsStore::metrics(std::size_t instance) const {
  std::lock_guard lock(mutex_);
  return metrics_.at(instance);
}

double MetricsStore::default_estimate() const {
  std::lock_guard lock(mutex_);
  return completed_ == 0 ? cfg_.prior_estimate : completed_tokens_ / static_cast<double>(completed_);
}

std::size_t MetricsStore::completed() const {
  std::lock_guard lock(mutex_);
  return completed_;
}

Json to_json(const RoutingDecision& d) {
  return {{"time", d.time},         {"job", d.job},         {"instance", d.instance},
          {"default_estimate", d.default_estimate}, {"pressures", d.pressures}, {"eligible", d.eligible}};
}

}  // namespace rlpipe::balancer
