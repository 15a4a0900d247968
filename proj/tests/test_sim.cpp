// Copyright (c) 2026, The rlpipe Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "rlpipe/core/errors.hpp"
#include "rlpipe/core/rng.hpp"
#include "rlpipe/sim/lengths.hpp"
#include "rlpipe/sim/scenario.hpp"
#include "rlpipe/sim/simulator.hpp"
#include "rlpipe/sim/throughput.hpp"

using namespace rlpipe;
using namespace rlpipe::sim;

namespace {

const std::vector<CalibrationPoint> kMeasured = {
    {0.0, 1.0, 60.0}, {32768.0, 1.0, 50.0}, {32768.0, 16.0, 460.0 / 16.0}, {32768.0, 32.0, 19.0}};

ThroughputModel flat(double r, double k = 19.0) { return ThroughputModel{r, r, kDefaultReferenceLength, k}; }

// Oracle: RK4 on dL/dt = r1(L) * c until `tokens` are added.
double rk4_time(const ThroughputModel& m, double l0, double batch, double tokens) {
  const double c = (1.0 + m.k_sat) / (batch + m.k_sat);
  const auto f = [&](double l) {
    const double w = std::clamp(l / m.l_ref, 0.0, 1.0);
    return c * (m.r_short * (1.0 - w) + m.r_long * w);
  };
  // integrate t(L): dt/dL = 1 / f(L)
  const int steps = 20000;
  const double h = tokens / steps;
  double t = 0.0, l = l0;
  for (int i = 0; i < steps; ++i) {
    const double k1 = 1.0 / f(l), k2 = 1.0 / f(l + h / 2), k3 = k2, k4 = 1.0 / f(l + h);
    t += h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
    l += h;
  }
  return t;
}

// Oracle: fixed-step simulation of one instance with every job started at 0.
std::vector<double> stepped_completions(const ThroughputModel& m, const std::vector<double>& lengths, double dt) {
  std::vector<double> produced(lengths.size(), 0.0), done(lengths.size(), -1.0);
  double t = 0.0;
  while (std::any_of(done.begin(), done.end(), [](double d) { return d < 0; })) {
    double sum = 0.0;
    int n = 0;
    for (std::size_t i = 0; i < lengths.size(); ++i) {
      if (done[i] < 0) {
        sum += produced[i];
        ++n;
      }
    }
    const double lbar = sum / n;
    // midpoint in L for second-order accuracy
    const double r0 = m.rate(lbar, n);
    const double r = m.rate(lbar + r0 * dt / 2, n);
    for (std::size_t i = 0; i < lengths.size(); ++i) {
      if (done[i] >= 0) continue;
      const double need = lengths[i] - produced[i];
      if (need <= r * dt) {
        done[i] = t + need / r;
      }
    }
    for (std::size_t i = 0; i < lengths.size(); ++i) {
      if (done[i] < 0) produced[i] += r * dt;
    }
    t += dt;
  }
  return done;
}

std::vector<RolloutJob> uniform_jobs(std::size_t queries, std::size_t samples, std::int64_t length) {
  std::vector<RolloutJob> jobs;
  for (std::size_t q = 0; q < queries; ++q) {
    for (std::size_t s = 0; s < samples; ++s) jobs.push_back({"q" + std::to_string(q), static_cast<std::int64_t>(s), length, {}});
  }
  return jobs;
}

std::string jsonl(const BatchReport& r) {
  std::ostringstream os;
  write_report_jsonl(r, os);
  return os.str();
}

}  // namespace

TEST_CASE("saturation is monotone over a grid") {
  const ThroughputModel m{60, 50, kDefaultReferenceLength, 19};
  for (double l : {0.0, 1000.0, 16384.0, 32768.0, 50000.0}) {
    for (int b = 1; b < 128; ++b) {
      CHECK(m.rate(l, b + 1) < m.rate(l, b));
      CHECK(m.aggregate_rate(l, b + 1) > m.aggregate_rate(l, b));
    }
  }
  CHECK(m.single_rate(0) == 60.0);
  CHECK(m.single_rate(32768) == 50.0);
  CHECK(m.single_rate(1e6) == 50.0);
  CHECK(m.single_rate(16384) == doctest::Approx(55.0));
  CHECK_THROWS_AS((ThroughputModel{40, 50, 32768, 19}.validate()), ValidationError);
  CHECK_THROWS_AS((ThroughputModel{60, 50, 32768, 0}.validate()), ValidationError);
}

TEST_CASE("closed-form advance matches numerical integration") {
  const ThroughputModel m{60, 50, kDefaultReferenceLength, 19};
  for (double l0 : {0.0, 5000.0, 30000.0, 40000.0}) {
    for (double b : {1.0, 7.0, 32.0}) {
      for (double tokens : {10.0, 2500.0, 9000.0}) {
        const double t = m.time_to_advance(l0, b, tokens);
        CHECK(t == doctest::Approx(rk4_time(m, l0, b, tokens)).epsilon(1e-9));
        CHECK(m.tokens_in(l0, b, t) == doctest::Approx(tokens).epsilon(1e-12));
      }
    }
  }
  const auto f = flat(60);
  CHECK(f.time_to_advance(0, 1, 600) == doctest::Approx(10.0));
  CHECK(f.tokens_in(123, 1, 10) == doctest::Approx(600.0));
}

TEST_CASE("calibration on the measured points") {
  const auto res = calibrate(kMeasured);
  CHECK(res.max_relative_residual <= 0.10);
  CHECK(res.model.k_sat > 17.0);
  CHECK(res.model.k_sat < 21.0);
  CHECK(res.model.r_short >= res.model.r_long);

  // Oracle: brute-force grid over all three parameters.
  const auto obj = [&](double rs, double rl, double k) {
    double s = 0;
    for (const auto& p : kMeasured) {
      const double w = std::min(p.length / 32768.0, 1.0);
      const double pred = (rs * (1 - w) + rl * w) * (1 + k) / (p.batch + k);
      s += (pred / p.rate - 1) * (pred / p.rate - 1);
    }
    return s;
  };
  double best = 1e9, bk = 0;
  for (double rs = 55; rs <= 65; rs += 0.05) {
    for (double rl = 45; rl <= rs && rl <= 55; rl += 0.05) {
      for (double k = 10; k <= 30; k += 0.05) {
        const double v = obj(rs, rl, k);
        if (v < best) {
          best = v;
          bk = k;
        }
      }
    }
  }
  const double fitted = obj(res.model.r_short, res.model.r_long, res.model.k_sat);
  CHECK(fitted <= best + 1e-9);
  CHECK(res.model.k_sat == doctest::Approx(bk).epsilon(0.01));

  // Fixed-k two-point identity: 460 (16 + k) = 800 (1 + k) at r_long = 50.
  const double k_two = (460.0 * 16 - 800.0) / (800.0 - 460.0);
  CHECK(k_two == doctest::Approx(19.294).epsilon(1e-3));
}

TEST_CASE("calibration edge cases") {
  CalibrationOptions fixed;
  fixed.fixed_k = 19.0;
  const auto one = calibrate({{1000.0, 1.0, 57.0}}, fixed);
  CHECK(one.model.single_rate(1000.0) == doctest::Approx(57.0));
  CHECK(one.max_relative_residual < 1e-12);

  auto doubled = kMeasured;
  doubled.insert(doubled.end(), kMeasured.begin(), kMeasured.end());
  const auto a = calibrate(kMeasured), b = calibrate(doubled);
  CHECK(a.model.k_sat == doctest::Approx(b.model.k_sat).epsilon(1e-6));
  CHECK(a.model.r_short == doctest::Approx(b.model.r_short).epsilon(1e-6));
  CHECK(a.model.r_long == doctest::Approx(b.model.r_long).epsilon(1e-6));

  CHECK_THROWS_AS(calibrate({{0, 1, 60}, {0, 1, 61}, {0, 1, 59}}), ValidationError);
  CHECK_THROWS_AS(calibrate({{0, 1, 60}, {0, 4, 40}}), ValidationError);
  CHECK_THROWS_AS(calibrate({{0, 2, 60}, {0, 4, 40}, {0, 8, 30}}), ValidationError);
  CHECK_THROWS_AS(calibrate({{0, 1, 0}, {0, 4, 40}, {0, 8, 30}}), ValidationError);
}

TEST_CASE("step examples") {
  {
    SimWorld w({{"q", 0, 600, {}}}, {{flat(60), 32}}, StrategyKind::static_bound, 1);
    w.step();
    CHECK(w.done());
    CHECK(w.time() == doctest::Approx(10.0));
  }
  {
    SimWorld w({{"q", 0, 1000, {}}, {"q", 1, 1000, {}}}, {{flat(60), 32}}, StrategyKind::static_bound, 1);
    w.step();
    CHECK(w.done());
    CHECK(w.time() == doctest::Approx(1000.0 / (60.0 * 20.0 / 21.0)));
    const auto r = w.report();
    CHECK(r.jobs[0].completion_time == r.jobs[1].completion_time);
  }
  {
    SimWorld w({}, {{flat(60), 4}}, StrategyKind::static_bound, 1);
    CHECK(w.done());
    CHECK_THROWS_AS(w.step(), ValidationError);
  }
  CHECK_THROWS_AS(run_generation_batch({}, {{flat(60), 4}}, StrategyKind::static_bound, 1), ValidationError);
  CHECK_THROWS_AS(run_generation_batch(uniform_jobs(1, 1, 10), {}, StrategyKind::static_bound, 1), ValidationError);
  CHECK_THROWS_AS(run_generation_batch(uniform_jobs(1, 1, 0), {{flat(60), 4}}, StrategyKind::static_bound, 1),
                  ValidationError);
}

TEST_CASE("event times match a fixed-step oracle") {
  const ThroughputModel m{60, 50, 8000, 19};
  const std::vector<double> lengths = {900, 4000, 4000, 7000, 12000};
  std::vector<RolloutJob> jobs;
  for (std::size_t i = 0; i < lengths.size(); ++i) jobs.push_back({"q", static_cast<std::int64_t>(i), static_cast<std::int64_t>(lengths[i]), {}});
  const auto r = run_generation_batch(jobs, {{m, 8}}, StrategyKind::static_bound, 1);
  const auto oracle = stepped_completions(m, lengths, 1e-3);
  for (std::size_t i = 0; i < lengths.size(); ++i) {
    CHECK(r.jobs[i].completion_time == doctest::Approx(oracle[i]).epsilon(1e-4));
  }
}

TEST_CASE("identical jobs give identical idle-free makespans") {
  const ThroughputModel m{60, 50, kDefaultReferenceLength, 19};
  const auto jobs = uniform_jobs(8, 8, 3000);  // 64 jobs, 4 instances x 16 slots: one wave
  const std::vector<InstanceConfig> inst(4, {m, 16});
  const double single = m.time_to_advance(0, 16, 3000);
  std::vector<double> spans;
  for (auto s : {StrategyKind::static_bound, StrategyKind::spread_static, StrategyKind::streaming_dynamic}) {
    const auto r = run_generation_batch(jobs, inst, s, 7);
    spans.push_back(r.makespan);
    CHECK(r.makespan == doctest::Approx(single).epsilon(1e-12));
    for (const auto& in : r.instances) CHECK(in.idle_time == doctest::Approx(0.0).epsilon(1e-9));
  }
  // several waves
  const auto many = uniform_jobs(16, 16, 2000);
  std::vector<double> waves;
  for (auto s : {StrategyKind::static_bound, StrategyKind::spread_static, StrategyKind::streaming_dynamic}) {
    waves.push_back(run_generation_batch(many, inst, s, 3).makespan);
  }
  CHECK(waves[0] == doctest::Approx(waves[1]).epsilon(1e-12));
  CHECK(waves[0] == doctest::Approx(waves[2]).epsilon(1e-12));
  CHECK(waves[0] == doctest::Approx(4 * m.time_to_advance(0, 16, 2000)).epsilon(1e-12));
}

TEST_CASE("one long prompt bound to one instance is slower than spread") {
  const ThroughputModel m{60, 50, kDefaultReferenceLength, 19};
  const auto jobs = uniform_jobs(1, 16, 20000);
  const std::vector<InstanceConfig> inst(4, {m, 32});
  const auto bound = run_generation_batch(jobs, inst, StrategyKind::static_bound, 1);
  const auto spread = run_generation_batch(jobs, inst, StrategyKind::spread_static, 1);
  CHECK(bound.makespan > spread.makespan);
  std::size_t idle = 0;
  for (const auto& in : bound.instances) idle += in.jobs_completed == 0;
  CHECK(idle == 3);
}

TEST_CASE("lengths") {
  const auto s0 = sample_lengths(LognormalLengths{std::log(1000.0), 0.0, 0.0, 24576}, 50, 3);
  for (auto v : s0) CHECK(v == 1000);

  const auto capped = sample_lengths(LognormalLengths{std::log(20000.0), 1.5, 0.0, 24576}, 5000, 4);
  CHECK(*std::max_element(capped.begin(), capped.end()) <= 24576);
  CHECK(*std::min_element(capped.begin(), capped.end()) >= 1);
  CHECK(std::count(capped.begin(), capped.end(), 24576) > 0);

  const std::vector<std::int64_t> fixture = {120, 4500, 800, 32000, 77, 950};
  const auto em = sample_lengths(EmpiricalLengths{fixture}, 40, 11);
  Rng rng(11);
  for (auto v : em) CHECK(v == fixture[rng.below(fixture.size())]);

  CHECK(sample_lengths(LognormalLengths{8, 0.8, 0.4, 24576}, 100, 5) ==
        sample_lengths(LognormalLengths{8, 0.8, 0.4, 24576}, 100, 5));

  CHECK_THROWS_AS(sample_lengths(LognormalLengths{8, -1, 0, 24576}, 1, 1), ValidationError);
  CHECK_THROWS_AS(sample_lengths(LognormalLengths{8, 0.5, 0.6, 24576}, 1, 1), ValidationError);
  CHECK_THROWS_AS(sample_lengths(LognormalLengths{8, 0.5, 0, 0}, 1, 1), ValidationError);
  CHECK_THROWS_AS(sample_lengths(LognormalLengths{NAN, 0.5, 0, 10}, 1, 1), ValidationError);
  CHECK_THROWS_AS(sample_lengths(EmpiricalLengths{}, 1, 1), ValidationError);
  CHECK_THROWS_AS(sample_lengths(EmpiricalLengths{{3, 0}}, 1, 1), ValidationError);

  // p95/p50 of the total spread: exp(1.645 sigma) = 4 at sigma = ln 4 / 1.645.
  const double sigma = std::log(4.0) / 1.6448536;
  auto big = sample_lengths(LognormalLengths{std::log(3000.0), sigma, 0.0, 1 << 30}, 20000, 9);
  std::sort(big.begin(), big.end());
  const double ratio = static_cast<double>(big[19000]) / static_cast<double>(big[10000]);
  CHECK(ratio == doctest::Approx(4.0).epsilon(0.08));

  const auto jobs = make_jobs(LognormalLengths{8, 0.8, 0.5, 24576}, 3, 4, 2);
  REQUIRE(jobs.size() == 12);
  CHECK(jobs[0].query_id == "q0000");
  CHECK(jobs[11].query_id == "q0002");
  CHECK(jobs[11].sample_index == 3);
}

TEST_CASE("batch properties on heavy-tailed scenarios") {
  Scenario sc;
  sc.instances = 4;
  sc.queries = 16;
  sc.max_active = 8;
  sc.lengths = LognormalLengths{std::log(3000.0), 0.84, 0.6, 24576};
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    sc.seed = seed;
    for (auto s : {StrategyKind::static_bound, StrategyKind::spread_static, StrategyKind::streaming_dynamic}) {
      sc.strategy = s;
      const auto r = run_scenario(sc);
      // work conservation
      CHECK(std::abs(r.produced_tokens - r.total_tokens) <= 1e-6 * r.total_tokens);
      // barrier semantics
      double latest = 0.0;
      for (const auto& j : r.jobs) {
        CHECK(j.completion_time <= r.makespan);
        CHECK(j.start_time <= j.completion_time);
        latest = std::max(latest, j.completion_time);
      }
      CHECK(latest == r.makespan);
      // every job ran once, on one instance
      std::size_t done = 0;
      for (const auto& in : r.instances) {
        done += in.jobs_completed;
        CHECK(in.busy_time <= r.makespan + 1e-9);
        CHECK(in.idle_time >= -1e-9);
      }
      CHECK(done == r.jobs.size());
      // determinism
      CHECK(jsonl(r) == jsonl(run_scenario(sc)));
    }
  }
}

TEST_CASE("slot limit is respected and rate trace is consistent") {
  Scenario sc;
  sc.instances = 3;
  sc.queries = 10;
  sc.max_active = 5;
  sc.strategy = StrategyKind::streaming_dynamic;
  const auto r = run_scenario(sc);
  for (const auto& s : r.rate_trace) {
    CHECK(s.active <= 5);
    if (s.active > 0) CHECK(s.aggregate_rate == doctest::Approx(sc.model.aggregate_rate(s.mean_length, s.active)));
  }
  std::ostringstream csv;
  write_rate_csv(r, csv);
  CHECK(csv.str().rfind("time,instance,active,mean_length,aggregate_rate\n", 0) == 0);
  CHECK(summary_table(r).find("makespan") != std::string::npos);
}

TEST_CASE("scenario json") {
  const auto j = Json::parse(R"({
    "instances": 2, "max_active": 4, "queries": 3, "samples_per_query": 2,
    "throughput": {"points": [[0, 1, 60], [32768, 1, 50], [32768, 16, 28.75], [32768, 32, 19]]},
    "lengths": {"type": "empirical", "values": [100, 200, 300]},
    "strategy": "spread_static", "seed": 5, "streaming": {"alpha": 0.5}
  })");
  const auto s = scenario_from_json(j);
  CHECK(s.instances == 2);
  CHECK(s.strategy == StrategyKind::spread_static);
  REQUIRE(s.calibration);
  CHECK(s.calibration->max_relative_residual <= 0.10);
  CHECK(s.streaming.alpha == 0.5);
  CHECK(scenario_jobs(s).size() == 6);
  const auto back = scenario_from_json(to_json(s));
  CHECK(back.model.k_sat == s.model.k_sat);
  CHECK(jsonl(run_scenario(back)) == jsonl(run_scenario(s)));
  CHECK_THROWS_AS(scenario_from_json(Json{{"strategy", "fastest"}}), ValidationError);
  CHECK_THROWS_AS(scenario_from_json(Json{{"instances", 0}}), ValidationError);
}
