// Copyright (c) 2026, The rlpipe Authors
// SPDX-License-Identifier: Apache-2.0

#include "rlpipe/grpo/grpo.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <ostream>
#include <set>
#include <thread>

#include "rlpipe/core/errors.hpp"
#include "rlpipe/kernels/kernels.hpp"

namespace rlpipe::grpo {
namespace {

std::vector<std::size_t> select_gated_with_groups(const std::vector<Query>& gated,
                                                  const std::map<std::string, GrpoGroup>& groups,
                                                  std::vector<std::string>* missing) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < gated.size(); ++i) {
    if (groups.count(gated[i].id)) {
      out.push_back(i);
    } else if (missing) {
      missing->push_back(gated[i].id);
    }
  }
  return out;
}

TrainingBatch make_batch(const std::vector<const GrpoGroup*>& members, const GrpoConfig& cfg, Stage stage,
                         std::int64_t round_id) {
  TrainingBatch b;
  b.stage = stage;
  b.round_id = round_id;
  b.lr = cfg.lr(stage);
  b.max_len = cfg.max_len(stage);
  b.partial = members.size() < cfg.batch_queries;
  for (const auto* g : members) {
    if (g->rollouts.size() != cfg.group_size || g->advantages.size() != cfg.group_size) {
      throw ValidationError("group " + g->query_id + " has the wrong size");
    }
    b.groups.push_back(*g);
  }
  return b;
}

}  // namespace

void GrpoConfig::validate() const {
  if (group_size == 0 || batch_queries == 0) throw ValidationError("group_size and batch_queries must be positive");
  if (max_len_stage1 <= 0 || max_len_stage2 <= max_len_stage1) {
    throw ValidationError("max_len_stage2 must exceed max_len_stage1 > 0");
  }
  if (!(lr_stage1 > 0.0) || !(lr_stage2 > 0.0)) throw ValidationError("learning rates must be positive");
  if (!(epsilon_std > 0.0)) throw ValidationError("epsilon_std must be positive");
}

Json to_json(const GrpoConfig& c) {
  return {{"group_size", c.group_size},       {"batch_queries", c.batch_queries}, {"max_len_stage1", c.max_len_stage1},
          {"max_len_stage2", c.max_len_stage2}, {"lr_stage1", c.lr_stage1},       {"lr_stage2", c.lr_stage2},
          {"epsilon_std", c.epsilon_std},     {"allow_partial", c.allow_partial}, {"kl_coeff", GrpoConfig::kl_coeff}};
}

GrpoConfig grpo_config_from_json(const Json& j) {
  GrpoConfig c;
  c.group_size = j.value("group_size", c.group_size);
  c.batch_queries = j.value("batch_queries", c.batch_queries);
  c.max_len_stage1 = j.value("max_len_stage1", c.max_len_stage1);
  c.max_len_stage2 = j.value("max_len_stage2", c.max_len_stage2);
  c.lr_stage1 = j.value("lr_stage1", c.lr_stage1);
  c.lr_stage2 = j.value("lr_stage2", c.lr_stage2);
  c.epsilon_std = j.value("epsilon_std", c.epsilon_std);
  c.allow_partial = j.value("allow_partial", c.allow_partial);
  if (j.contains("kl_coeff") && j.at("kl_coeff").get<double>() != 0.0) {
    throw ValidationError("kl_coeff is fixed at 0");
  }
  c.validate();
  return c;
}

Rollout rollout_from(const RewardOutcome& o) {
  if (!o.scored) throw ValidationError("rollout " + o.query_id + "#" + std::to_string(o.sample_index) + " is unscored");
  return {o.query_id, o.sample_index, o.score, o.token_count, o.finish_reason};
}

bool is_gated(Category c) { return c == Category::math || c == Category::code; }

std::vector<Query> gate_queries(const std::vector<Query>& queries) {
  std::vector<Query> out;
  for (const auto& q : queries) {
    if (!q.is_active()) continue;
    if (!is_gated(q.category)) {
      out.push_back(q);
      continue;
    }
    if (!q.pass_rate) throw ValidationError("query " + q.id + " has no pass rate");
    const auto& pr = *q.pass_rate;
    if (pr.total > 0 && !pr.is_zero() && !pr.is_one()) out.push_back(q);
  }
  return out;
}

bool is_overlong(const Rollout& r, std::int64_t max_len) {
  return r.token_count >= max_len || r.finish_reason == "length" || r.finish_reason == "length_cap";
}

std::vector<bool> mark_overlong(const std::vector<Rollout>& rollouts, std::int64_t max_len) {
  std::vector<bool> mask;
  mask.reserve(rollouts.size());
  for (const auto& r : rollouts) mask.push_back(is_overlong(r, max_len));
  return mask;
}

Advantages compute_advantages(const std::vector<double>& rewards, const std::vector<bool>& overlong_mask,
                              double epsilon_std) {
  if (rewards.size() != overlong_mask.size()) throw ValidationError("mask and rewards differ in length");
  Advantages out;
  out.values.assign(rewards.size(), 0.0);
  std::vector<std::uint8_t> keep(rewards.size());
  std::optional<double> first;
  bool all_equal = true;
  for (std::size_t i = 0; i < rewards.size(); ++i) {
    keep[i] = overlong_mask[i] ? 0 : 1;
    if (!keep[i]) continue;
    if (!first) first = rewards[i];
    all_equal = all_equal && rewards[i] == *first;
  }
  if (!first || all_equal) {
    out.degenerate = true;
    return out;
  }
  const auto m = kernels::masked_moments(rewards, keep);
  const double std_dev = std::sqrt(m.m2 / static_cast<double>(m.count));
  kernels::normalize_masked(rewards, keep, m.mean, 1.0 / (std_dev + epsilon_std), out.values);
  return out;
}

GrpoGroup build_group(const std::string& query_id, std::vector<Rollout> rollouts, const GrpoConfig& cfg, Stage stage) {
  if (rollouts.size() != cfg.group_size) {
    throw ValidationError("group " + query_id + " has " + std::to_string(rollouts.size()) + " rollouts, expected " +
                          std::to_string(cfg.group_size));
  }
  std::sort(rollouts.begin(), rollouts.end(), [](const Rollout& a, const Rollout& b) { return a.sample_index < b.sample_index; });
  for (std::size_t i = 0; i < rollouts.size(); ++i) {
    if (rollouts[i].query_id != query_id) throw ValidationError("rollout of another query in group " + query_id);
    if (i > 0 && rollouts[i].sample_index == rollouts[i - 1].sample_index) {
      throw ValidationError("duplicate sample index in group " + query_id);
    }
  }
  GrpoGroup g;
  g.query_id = query_id;
  for (const auto& r : rollouts) g.rewards.push_back(r.reward);
  g.overlong_mask = mark_overlong(rollouts, cfg.max_len(stage));
  auto adv = compute_advantages(g.rewards, g.overlong_mask, cfg.epsilon_std);
  g.advantages = std::move(adv.values);
  g.degenerate = adv.degenerate;
  g.rollouts = std::move(rollouts);
  return g;
}

std::map<std::string, GrpoGroup> build_groups(const std::vector<Rollout>& rollouts, const GrpoConfig& cfg, Stage stage) {
  std::map<std::string, std::vector<Rollout>> by_query;
  for (const auto& r : rollouts) by_query[r.query_id].push_back(r);
  std::vector<std::pair<const std::string*, std::vector<Rollout>*>> work;
  for (auto& [id, rs] : by_query) work.emplace_back(&id, &rs);

  std::vector<GrpoGroup> built(work.size());
  std::vector<std::exception_ptr> errors(work.size());
  const std::size_t n_threads =
      work.size() < 64 ? 1 : std::clamp<std::size_t>(std::thread::hardware_concurrency(), 1, 8);
  const auto run = [&](std::size_t t) {
    for (std::size_t i = t; i < work.size(); i += n_threads) {
      try {
        built[i] = build_group(*work[i].first, std::move(*work[i].second), cfg, stage);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (n_threads == 1) {
    run(0);
  } else {
    std::vector<std::thread> threads;
    for (std::size_t t = 0; t < n_threads; ++t) threads.emplace_back(run, t);
    for (auto& th : threads) th.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  std::map<std::string, GrpoGroup> out;
  for (auto& g : built) {
    auto id = g.query_id;
    out.emplace(std::move(id), std::move(g));
  }
  return out;
}

std::size_t TrainingBatch::rollout_count() const {
  std::size_t n = 0;
  for (const auto& g : groups) n += g.rollouts.size();
  return n;
}

TrainingBatch assemble_batch(const std::vector<Query>& gated, const std::map<std::string, GrpoGroup>& groups,
                             const GrpoConfig& cfg, Stage stage, std::int64_t round_id) {
  const auto idx = select_gated_with_groups(gated, groups, nullptr);
  if (idx.size() < cfg.batch_queries && !cfg.allow_partial) {
    throw ValidationError("only " + std::to_string(idx.size()) + " gated queries with groups, batch needs " +
                          std::to_string(cfg.batch_queries));
  }
  if (idx.empty()) throw ValidationError("no gated query has a group");
  std::vector<const GrpoGroup*> members;
  for (std::size_t k = 0; k < idx.size() && k < cfg.batch_queries; ++k) members.push_back(&groups.at(gated[idx[k]].id));
  return make_batch(members, cfg, stage, round_id);
}

BatchPlan plan_batches(const std::vector<Query>& gated, const std::map<std::string, GrpoGroup>& groups,
                       const GrpoConfig& cfg, Stage stage, std::int64_t first_round) {
  BatchPlan plan;
  const auto idx = select_gated_with_groups(gated, groups, &plan.missing);
  std::int64_t round = first_round;
  std::size_t k = 0;
  for (; k + cfg.batch_queries <= idx.size(); k += cfg.batch_queries) {
    std::vector<const GrpoGroup*> members;
    for (std::size_t m = k; m < k + cfg.batch_queries; ++m) members.push_back(&groups.at(gated[idx[m]].id));
    plan.batches.push_back(make_batch(members, cfg, stage, round++));
  }
  if (k < idx.size()) {
    if (cfg.allow_partial) {
      std::vector<const GrpoGroup*> members;
      for (std::size_t m = k; m < idx.size(); ++m) members.push_back(&groups.at(gated[idx[m]].id));
      plan.batches.push_back(make_batch(members, cfg, stage, round++));
    } else {
      for (std::size_t m = k; m < idx.size(); ++m) plan.leftover.push_back(gated[idx[m]].id);
    }
  }
  return plan;
}

void write_batch_jsonl(const TrainingBatch& batch, std::ostream& out) {
  for (const auto& g : batch.groups) {
    for (std::size_t i = 0; i < g.rollouts.size(); ++i) {
      out << Json{{"query_id", g.query_id},
                  {"sample_index", g.rollouts[i].sample_index},
                  {"reward", g.rewards[i]},
                  {"advantage", g.advantages[i]},
                  {"mask", static_cast<bool>(g.overlong_mask[i])},
                  {"stage", static_cast<int>(batch.stage)},
                  {"round_id", batch.round_id},
                  {"kl_coeff", batch.kl_coeff}}
                 .dump()
          << '\n';
    }
  }
}

void AccuracyHistory::record(const Rollout& r) {
  auto& a = tallies_[r.query_id];
  ++a.total;
  if (r.reward >= 1.0) ++a.correct;
}

void AccuracyHistory::record(const std::vector<Rollout>& rs) {
  for (const auto& r : rs) record(r);
}

bool AccuracyHistory::fully_solved(const std::string& query_id) const {
  const auto it = tallies_.find(query_id);
  return it != tallies_.end() && it->second.total > 0 && it->second.correct == it->second.total;
}

Stage2Set transition_stage(const std::vector<Query>& stage1, const AccuracyHistory& history,
                           const std::vector<Query>& supplement_pool, const SupplementSpec& spec, const GrpoConfig& cfg) {
  Stage2Set out;
  out.max_len = cfg.max_len(Stage::two);
  out.lr = cfg.lr(Stage::two);
  std::set<std::string> ids;
  for (const auto& q : stage1) {
    if (is_gated(q.category) && history.fully_solved(q.id)) {
      out.pruned.push_back(q.id);
      continue;
    }
    ids.insert(q.id);
    out.queries.push_back(q);
  }
  for (const auto& q : supplement_pool) {
    if (!q.is_active() || ids.count(q.id)) continue;
    std::size_t* added = nullptr;
    std::size_t want = 0;
    if (q.category == Category::general_chat) {
      added = &out.added_general_chat;
      want = spec.general_chat;
    } else if (q.category == Category::instruction_follow) {
      added = &out.added_instruction_follow;
      want = spec.instruction_follow;
    }
    if (!added || *added >= want) continue;
    ++*added;
    ids.insert(q.id);
    out.queries.push_back(q);
  }
  out.supplement_shortfall =
      out.added_general_chat < spec.general_chat || out.added_instruction_follow < spec.instruction_follow;
  return out;
}

}  // namespace rlpipe::grpo
