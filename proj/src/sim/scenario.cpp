// Copyright (c) 2026, The rlpipe Authors
// SPDX-License-Identifier: Apache-2.0

#include "rlpipe/sim/scenario.hpp"

#include "rlpipe/core/errors.hpp"

namespace rlpipe::sim {

Scenario scenario_from_json(const Json& j) {
  Scenario s;
  s.instances = j.value("instances", s.instances);
  s.max_active = j.value("max_active", s.max_active);
  if (s.instances == 0 || s.max_active == 0) throw ValidationError("scenario needs instances and slots");
  if (j.contains("throughput")) {
    const auto& t = j.at("throughput");
    if (t.contains("points")) {
      std::vector<CalibrationPoint> pts;
      for (const auto& p : t.at("points")) pts.push_back({p.at(0).get<double>(), p.at(1).get<double>(), p.at(2).get<double>()});
      CalibrationOptions opt;
      opt.l_ref = t.value("l_ref", kDefaultReferenceLength);
      if (t.contains("k_sat")) opt.fixed_k = t.at("k_sat").get<double>();
      s.calibration = calibrate(pts, opt);
      s.model = s.calibration->model;
    } else {
      s.model = throughput_from_json(t);
    }
  }
  s.queries = j.value("queries", s.queries);
  s.samples_per_query = j.value("samples_per_query", s.samples_per_query);
  if (s.queries == 0 || s.samples_per_query == 0) throw ValidationError("scenario needs queries and samples");
  if (j.contains("lengths")) s.lengths = lengths_from_json(j.at("lengths"));
  if (j.contains("strategy")) s.strategy = balancer::parse_strategy(j.at("strategy").get<std::string>());
  s.seed = j.value("seed", s.seed);
  if (j.contains("streaming")) {
    const auto& st = j.at("streaming");
    s.streaming.alpha = st.value("alpha", s.streaming.alpha);
    s.streaming.prior_estimate = st.value("prior_estimate", s.streaming.prior_estimate);
    s.streaming.prior_rate = st.value("prior_rate", s.streaming.prior_rate);
    s.streaming.oracle = st.value("oracle", s.streaming.oracle);
    s.streaming.query_priority = st.value("query_priority", s.streaming.query_priority);
  }
  return s;
}

Json to_json(const Scenario& s) {
  Json j{{"instances", s.instances},
         {"max_active", s.max_active},
         {"throughput", to_json(s.model)},
         {"queries", s.queries},
         {"samples_per_query", s.samples_per_query},
         {"lengths", to_json(s.lengths)},
         {"strategy", balancer::to_string(s.strategy)},
         {"seed", s.seed},
         {"streaming",
          {{"alpha", s.streaming.alpha},
           {"prior_estimate", s.streaming.prior_estimate},
           {"prior_rate", s.streaming.prior_rate},
           {"oracle", s.streaming.oracle},
           {"query_priority", s.streaming.query_priority}}}};
  if (s.calibration) j["calibration_max_residual"] = s.calibration->max_relative_residual;
  return j;
}

std::vector<RolloutJob> scenario_jobs(const Scenario& s) {
  return make_jobs(s.lengths, s.queries, s.samples_per_query, s.seed);
}

std::vector<InstanceConfig> scenario_instances(const Scenario& s) {
  return std::vector<InstanceConfig>(s.instances, InstanceConfig{s.model, s.max_active});
}

BatchReport run_scenario(const Scenario& s, SimOptions options) {
  options.streaming = s.streaming;
  return run_generation_batch(scenario_jobs(s), scenario_instances(s), s.strategy, s.seed, options);
}

}  // namespace rlpipe::sim
