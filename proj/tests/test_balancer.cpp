// Copyright (c) 2026, The rlpipe Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <thread>

#include "rlpipe/balancer/balancer.hpp"
#include "rlpipe/core/errors.hpp"
#include "rlpipe/sim/scenario.hpp"

using namespace rlpipe;
using namespace rlpipe::balancer;

namespace {

std::vector<RolloutJob> jobs_for(std::size_t queries, std::size_t samples = 16) {
  std::vector<RolloutJob> jobs;
  for (std::size_t q = 0; q < queries; ++q) {
    for (std::size_t s = 0; s < samples; ++s) jobs.push_back({"q" + std::to_string(q), static_cast<std::int64_t>(s), 100, {}});
  }
  return jobs;
}

std::vector<std::size_t> counts(const std::vector<std::size_t>& a, std::size_t n) {
  std::vector<std::size_t> c(n, 0);
  for (auto i : a) ++c[i];
  return c;
}

}  // namespace

TEST_CASE("static bound") {
  {
    const auto a = assign_static_bound(jobs_for(4), 4);
    for (std::size_t j = 0; j < a.size(); ++j) CHECK(a[j] == j / 16);
  }
  {
    const auto c = counts(assign_static_bound(jobs_for(1), 4), 4);
    CHECK(c == std::vector<std::size_t>{16, 0, 0, 0});
  }
  {
    const auto jobs = jobs_for(8);
    const auto a = assign_static_bound(jobs, 4);
    std::map<std::size_t, std::set<std::string>> groups;
    for (std::size_t j = 0; j < a.size(); ++j) groups[a[j]].insert(jobs[j].query_id);
    for (const auto& [i, g] : groups) CHECK(g.size() == 2);
    // every sample of a query on one instance
    for (std::size_t j = 0; j < a.size(); ++j) CHECK(a[j] == a[(j / 16) * 16]);
  }
  CHECK_THROWS_AS(assign_static_bound(jobs_for(1), 0), ValidationError);
}

TEST_CASE("spread static") {
  CHECK(counts(assign_spread_static(jobs_for(1), 4, 9), 4) == std::vector<std::size_t>{4, 4, 4, 4});
  CHECK(assign_spread_static(jobs_for(3), 1, 9) == assign_static_bound(jobs_for(3), 1));
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    for (std::size_t n : {2u, 3u, 5u, 8u}) {
      const auto jobs = jobs_for(1 + seed % 7, 16);
      const auto a = assign_spread_static(jobs, n, seed);
      const auto c = counts(a, n);
      CHECK(*std::max_element(c.begin(), c.end()) - *std::min_element(c.begin(), c.end()) <= 1);
      const std::size_t cap = (16 + n - 1) / n;
      std::map<std::pair<std::string, std::size_t>, std::size_t> per;
      for (std::size_t j = 0; j < a.size(); ++j) ++per[{jobs[j].query_id, a[j]}];
      for (const auto& [k, v] : per) CHECK(v <= cap);
    }
  }
  const auto jobs = jobs_for(5);
  CHECK(assign_spread_static(jobs, 3, 4) == assign_spread_static(jobs, 3, 4));
  auto order = spread_order(jobs, 4);
  std::sort(order.begin(), order.end());
  for (std::size_t i = 0; i < order.size(); ++i) CHECK(order[i] == i);
  auto inter = interleaved_order(jobs, 4);
  CHECK(jobs[inter[0]].query_id != jobs[inter[1]].query_id);
  std::sort(inter.begin(), inter.end());
  CHECK(inter == order);
}

TEST_CASE("streaming route examples") {
  std::vector<InstanceMetrics> m(3);
  for (auto& x : m) x.recent_rate = 100;
  CHECK(route_streaming(m, 500) == 0);

  std::vector<InstanceMetrics> ab(2);
  ab[0] = {1, 500, 100, 0};   // (500 + 500) / 100 = 10 s
  ab[1] = {1, 2500, 100, 0};  // 30 s
  CHECK(pressure(ab[0], 500) == doctest::Approx(10.0));
  CHECK(pressure(ab[1], 500) == doctest::Approx(30.0));
  CHECK(route_streaming(ab, 500) == 0);

  // two-step trace: A receives a job and its pressure passes B's
  MetricsStore store(2, StreamingConfig{});
  const double d = store.default_estimate();
  auto snap = store.snapshot();
  const auto first = route_streaming(snap, d);
  CHECK(first == 0);
  store.apply(JobStarted{first, 0, d});
  snap = store.snapshot();
  CHECK(pressure(snap[0], d) > pressure(snap[1], d));
  CHECK(route_streaming(snap, d) == 1);

  // ties on pressure fall to the lower active count
  std::vector<InstanceMetrics> tie(2);
  tie[0] = {3, 0, 100, 0};
  tie[1] = {1, 0, 100, 0};
  CHECK(route_streaming(tie, 100) == 1);

  std::vector<bool> only_last = {false, false, true};
  CHECK(route_streaming(m, 500, &only_last) == 2);
  std::vector<bool> none(3, false);
  CHECK_THROWS_AS(route_streaming(m, 500, &none), ValidationError);
}

TEST_CASE("metrics updates") {
  StreamingConfig cfg;
  cfg.prior_rate = 10.0;
  MetricsStore store(2, cfg);
  const auto before = store.snapshot();
  store.apply(std::vector<InstanceEvent>{});
  const auto after = store.snapshot();
  CHECK(after[0].recent_rate == before[0].recent_rate);
  CHECK(after[0].sum_remaining_estimate == before[0].sum_remaining_estimate);

  // constant true rate: two active jobs at 250 tok/s each, aggregate 500
  store.apply(JobStarted{0, 1, 1e9});
  store.apply(JobStarted{0, 2, 1e9});
  for (int i = 0; i < 20; ++i) store.apply(JobProgressed{0, 2.0, 500.0});
  CHECK(std::abs(store.metrics(0).recent_rate - 500.0) <= 0.01 * 500.0);
  // oracle for the smoothing recursion: closed form of the geometric series
  CHECK(store.metrics(0).recent_rate == doctest::Approx(500.0 - (500.0 - 10.0) * std::pow(0.7, 20)));

  MetricsStore s2(1, StreamingConfig{});
  s2.apply(JobStarted{0, 7, 300});
  s2.apply(JobStarted{0, 8, 1200});
  s2.apply(JobProgressed{0, 1.0, 100});
  CHECK(s2.metrics(0).sum_remaining_estimate == doctest::Approx(200 + 1100));
  s2.apply(JobCompleted{0, 8, 1500});
  CHECK(s2.metrics(0).sum_remaining_estimate == doctest::Approx(200));
  CHECK(s2.metrics(0).active_count == 1);
  s2.apply(JobProgressed{0, 1.0, 500});
  CHECK(s2.metrics(0).sum_remaining_estimate == 0.0);
  s2.apply(JobCompleted{0, 7, 900});
  CHECK(s2.metrics(0).sum_remaining_estimate == 0.0);
  CHECK(s2.default_estimate() == doctest::Approx(1200.0));
  CHECK_THROWS_AS(s2.apply(JobCompleted{0, 7, 900}), ValidationError);
  CHECK_THROWS_AS(s2.apply(JobDequeued{0}), ValidationError);
  s2.apply(JobQueued{0});
  CHECK(s2.metrics(0).queue_depth == 1);
  CHECK_THROWS_AS(MetricsStore(1, StreamingConfig{0.0}), ValidationError);
}

TEST_CASE("metrics store under concurrent updates") {
  MetricsStore store(4, StreamingConfig{});
  std::vector<std::thread> threads;
  for (std::size_t t = 0; t < 4; ++t) {
    threads.emplace_back([&, t] {
      for (std::size_t k = 0; k < 500; ++k) {
        const std::size_t job = t * 1000 + k;
        store.apply(JobStarted{t, job, 10});
        store.apply(JobProgressed{t, 0.1, 1});
        store.apply(JobCompleted{t, job, 10});
        const auto snap = store.snapshot();
        for (const auto& m : snap) CHECK(m.active_count <= 1);
      }
    });
  }
  for (auto& th : threads) th.join();
  CHECK(store.completed() == 2000);
  for (const auto& m : store.snapshot()) CHECK(m.active_count == 0);
}

TEST_CASE("length estimator") {
  LengthEstimator e(4000);
  CHECK(e.estimate("a") == 4000);
  e.observe("a", 100);
  e.observe("a", 300);
  e.observe("b", 2000);
  CHECK(e.estimate("a") == 200);
  CHECK(e.estimate("b") == 2000);
  CHECK(e.estimate("c") == doctest::Approx(800));
}

TEST_CASE("strategy conservation, greedy traces and symmetry") {
  sim::Scenario sc;
  sc.instances = 5;
  sc.queries = 12;
  sc.max_active = 6;
  sc.lengths = sim::LognormalLengths{std::log(2000.0), 0.84, 0.6, 24576};
  for (auto s : {StrategyKind::static_bound, StrategyKind::spread_static, StrategyKind::streaming_dynamic}) {
    sc.strategy = s;
    const auto r = sim::run_scenario(sc);
    std::set<std::size_t> seen;
    for (const auto& j : r.jobs) {
      CHECK(j.instance < sc.instances);
      seen.insert(j.job);
    }
    CHECK(seen.size() == sc.queries * sc.samples_per_query);
    std::size_t total = 0;
    for (const auto& in : r.instances) total += in.jobs_completed;
    CHECK(total == seen.size());
    if (s == StrategyKind::streaming_dynamic) {
      CHECK(r.routing_trace.size() == seen.size());
      for (const auto& d : r.routing_trace) {
        const double chosen = d.pressures[d.instance];
        for (std::size_t i = 0; i < d.pressures.size(); ++i) {
          if (d.eligible[i]) {
            CHECK(chosen <= d.pressures[i] + d.default_estimate);
            CHECK(chosen <= d.pressures[i]);
          }
        }
        CHECK(d.eligible[d.instance]);
      }
    }
  }

  std::vector<RolloutJob> same;
  for (int q = 0; q < 8; ++q) {
    for (int k = 0; k < 8; ++k) same.push_back({"q" + std::to_string(q), k, 1500, {}});
  }
  const std::vector<sim::InstanceConfig> inst(4, {sim::ThroughputModel{}, 5});
  const double a = sim::run_generation_batch(same, inst, StrategyKind::static_bound, 2).makespan;
  const double b = sim::run_generation_batch(same, inst, StrategyKind::spread_static, 2).makespan;
  const double c = sim::run_generation_batch(same, inst, StrategyKind::streaming_dynamic, 2).makespan;
  CHECK(a == doctest::Approx(b).epsilon(1e-12));
  CHECK(a == doctest::Approx(c).epsilon(1e-12));
}

TEST_CASE("strategy names") {
  for (auto s : {StrategyKind::static_bound, StrategyKind::spread_static, StrategyKind::streaming_dynamic}) {
    CHECK(parse_strategy(to_string(s)) == s);
  }
  CHECK_THROWS_AS(parse_strategy("random"), ValidationError);
}
