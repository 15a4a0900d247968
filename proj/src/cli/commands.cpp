// Copyright (c) 2026, The rlpipe Authors
// SPDX-License-Identifier: Apache-2.0

#include "rlpipe/cli/commands.hpp"

#include <cstdio>
#include <fstream>
#include <future>
#include <map>
#include <memory>
#include <set>
#include <sstream>

#include <httplib.h>

#include "rlpipe/cli/manifest.hpp"
#include "rlpipe/cli/route.hpp"
#include "rlpipe/core/errors.hpp"
#include "rlpipe/core/json_io.hpp"
#include "rlpipe/corpus/ground_truth.hpp"
#include "rlpipe/reward/code.hpp"
#include "rlpipe/reward/executor.hpp"
#include "rlpipe/reward/ifeval.hpp"
#include "rlpipe/reward/judge.hpp"
#include "rlpipe/reward/math.hpp"
#include "rlpipe/sim/scenario.hpp"

namespace rlpipe::cli {

namespace fs = std::filesystem;

namespace {

template <typename T>
std::vector<T> read_records(const fs::path& path, bool strict, T (*parse)(const Json&), std::vector<JsonlError>& errors) {
  if (!fs::is_regular_file(path)) throw ValidationError("input not found: " + path.string());
  return read_jsonl_as<T>(path, strict, std::function<T(const Json&)>(parse), &errors);
}

Json error_rows(const fs::path& path, const std::vector<JsonlError>& errors) {
  Json a = Json::array();
  for (const auto& e : errors) a.push_back({{"file", path.filename().string()}, {"line", e.line}, {"message", e.message}});
  return a;
}

void check_unique_ids(const std::vector<Query>& qs, const fs::path& path) {
  std::set<std::string> seen;
  for (const auto& q : qs) {
    if (!seen.insert(q.id).second) throw ValidationError(path.string() + ": duplicate query id " + q.id);
  }
}

template <typename Range, typename ToJson>
void write_jsonl(const fs::path& path, const Range& items, ToJson&& to) {
  JsonlWriter w(path);
  for (const auto& x : items) w.write(to(x));
}

RunManifest base_manifest(std::string command, const PipelineConfig& cfg) {
  RunManifest m;
  m.command = std::move(command);
  m.config_hash = config_hash(cfg);
  m.seed = cfg.seed;
  return m;
}

std::string response_key(const std::string& qid, std::int64_t idx) { return qid + "#" + std::to_string(idx); }

}  // namespace

// ---------------------------------------------------------------------------
// filter

CommandResult cmd_filter(const FilterOptions& opt, const PipelineConfig& cfg) {
  fs::create_directories(opt.out);
  CommandResult result;
  RunManifest manifest = base_manifest("filter", cfg);

  std::vector<JsonlError> corpus_errors, eval_errors, response_errors;
  auto corpus_q = read_records<Query>(opt.corpus, opt.strict, &query_from_json, corpus_errors);
  const auto eval_q = read_records<Query>(opt.eval, opt.strict, &query_from_json, eval_errors);
  check_unique_ids(corpus_q, opt.corpus);
  manifest.inputs = {digest_input(opt.corpus), digest_input(opt.eval)};
  const std::size_t n_input = corpus_q.size();
  std::size_t already_filtered = 0;
  for (const auto& q : corpus_q) already_filtered += q.is_active() ? 0 : 1;

  std::unique_ptr<corpus::OracleClient> clarity;
  if (cfg.endpoints.oracle) {
    clarity = std::make_unique<corpus::HttpOracle>(*cfg.endpoints.oracle, cfg.filter.primary_model, cfg.reward.remote_timeout_seconds);
  }
  auto qr = corpus::filter_queries(std::move(corpus_q), eval_q, cfg.filter.queries, clarity.get());
  if (qr.empty_eval_warning) result.warnings.push_back("evaluation set is empty; decontamination skipped");

  std::vector<corpus::FilterReportRow> rows = std::move(qr.report);
  if (cfg.filter.verify_ground_truth) {
    if (!cfg.endpoints.oracle) throw ValidationError("filter.verify_ground_truth needs an oracle endpoint");
    corpus::HttpOracle primary(*cfg.endpoints.oracle, cfg.filter.primary_model, cfg.reward.remote_timeout_seconds);
    corpus::HttpOracle secondary(*cfg.endpoints.oracle, cfg.filter.secondary_model, cfg.reward.remote_timeout_seconds);
    auto gt = corpus::verify_corpus_ground_truth(qr.queries, primary, secondary, cfg.filter.gt_samples);
    rows.insert(rows.end(), gt.begin(), gt.end());
  }

  // Per-stage drop counts, each drop attributed to the first stage in chain
  // order that flagged it. Every configured stage appears, even at zero.
  Json by_stage = Json::object();
  for (const auto& s : cfg.filter.queries.stages) {
    if (s == "clarity" && !clarity) continue;
    by_stage[s] = {{"total", 0}, {"reasons", Json::object()}};
  }
  std::set<std::string> attributed;
  for (const auto& r : rows) {
    if (r.verdict != "drop" || !attributed.insert(r.id).second) continue;
    auto& slot = by_stage[r.stage];
    slot["total"] = slot["total"].get<std::size_t>() + 1;
    const std::string reason = r.reason ? std::string(to_string(*r.reason)) : "unspecified";
    slot["reasons"][reason] = slot["reasons"].value(reason, std::size_t{0}) + 1;
  }

  std::vector<Query> kept, dropped;
  std::set<std::string> kept_ids;
  std::size_t rewritten = 0;
  for (auto& q : qr.queries) {
    if (q.is_active()) {
      rewritten += q.status == QueryStatus::rewritten ? 1 : 0;
      kept_ids.insert(q.id);
      kept.push_back(std::move(q));
    } else {
      dropped.push_back(std::move(q));
    }
  }

  std::vector<std::string> outputs = {"queries.jsonl", "dropped.jsonl", "filter_report.jsonl", "summary.json"};
  Json response_summary = nullptr;
  if (opt.responses) {
    auto responses = read_records<Response>(*opt.responses, opt.strict, &response_from_json, response_errors);
    manifest.inputs.push_back(digest_input(*opt.responses));
    std::vector<Response> candidates;
    std::size_t orphaned = 0;
    for (auto& r : responses) {
      if (kept_ids.count(r.query_id)) {
        candidates.push_back(std::move(r));
      } else {
        ++orphaned;
        rows.push_back({response_key(r.query_id, r.sample_index), "query", "drop", std::nullopt, {{"query_kept", false}}});
      }
    }
    std::unique_ptr<corpus::CharNgramScorer> scorer;
    if (cfg.filter.ppl_reference) {
      scorer = std::make_unique<corpus::CharNgramScorer>(cfg.filter.ppl_order);
      std::istringstream in(read_text_file(*cfg.filter.ppl_reference));
      for (std::string line; std::getline(in, line);) scorer->train(line);
    }
    auto rr = corpus::filter_responses(std::move(candidates), cfg.filter.responses, scorer.get());
    Json reasons = Json::object();
    for (const auto& row : rr.report) {
      if (row.verdict != "drop") continue;
      const std::string reason = row.reason ? std::string(to_string(*row.reason)) : "unspecified";
      reasons[reason] = reasons.value(reason, std::size_t{0}) + 1;
    }
    if (orphaned) reasons["query_dropped"] = orphaned;
    rows.insert(rows.end(), rr.report.begin(), rr.report.end());
    write_jsonl(opt.out / "responses.jsonl", rr.kept, [](const Response& r) { return to_json(r); });
    outputs.push_back("responses.jsonl");
    response_summary = {{"input", responses.size()},
                        {"kept", rr.kept.size()},
                        {"dropped", responses.size() - rr.kept.size()},
                        {"malformed", response_errors.size()},
                        {"reasons", std::move(reasons)}};
  }

  write_jsonl(opt.out / "queries.jsonl", kept, [](const Query& q) { return to_json(q); });
  write_jsonl(opt.out / "dropped.jsonl", dropped, [](const Query& q) { return to_json(q); });
  {
    JsonlWriter w(opt.out / "filter_report.jsonl");
    for (const auto& path_errors : {std::pair{opt.corpus, &corpus_errors}, std::pair{opt.eval, &eval_errors}}) {
      for (const auto& e : error_rows(path_errors.first, *path_errors.second)) {
        w.write({{"id", e["file"].get<std::string>() + ":" + std::to_string(e["line"].get<std::size_t>())},
                 {"stage", "parse"},
                 {"verdict", "error"},
                 {"detail", {{"message", e["message"]}}}});
      }
    }
    if (opt.responses) {
      for (const auto& e : error_rows(*opt.responses, response_errors)) {
        w.write({{"id", e["file"].get<std::string>() + ":" + std::to_string(e["line"].get<std::size_t>())},
                 {"stage", "parse"},
                 {"verdict", "error"},
                 {"detail", {{"message", e["message"]}}}});
      }
    }
    for (const auto& r : rows) w.write(corpus::to_json(r));
  }

  result.summary = {{"command", "filter"},
                    {"queries",
                     {{"input", n_input},
                      {"kept", kept.size()},
                      {"rewritten", rewritten},
                      {"dropped", dropped.size() - already_filtered},
                      {"already_filtered", already_filtered},
                      {"malformed", corpus_errors.size()},
                      {"drops_by_stage", std::move(by_stage)}}},
                    {"eval", {{"input", eval_q.size()}, {"malformed", eval_errors.size()}}},
                    {"responses", response_summary},
                    {"warnings", result.warnings}};
  write_json_file(opt.out / "summary.json", result.summary);
  write_manifest(opt.out, std::move(manifest), outputs);
  return result;
}

// ---------------------------------------------------------------------------
// reward

CommandResult cmd_reward(const RewardOptions& opt, const PipelineConfig& cfg) {
  fs::create_directories(opt.out);
  CommandResult result;
  RunManifest manifest = base_manifest("reward", cfg);

  std::vector<JsonlError> corpus_errors, response_errors;
  auto queries = read_records<Query>(opt.corpus, opt.strict, &query_from_json, corpus_errors);
  const auto responses = read_records<Response>(opt.responses, opt.strict, &response_from_json, response_errors);
  check_unique_ids(queries, opt.corpus);
  manifest.inputs = {digest_input(opt.corpus), digest_input(opt.responses)};

  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < queries.size(); ++i) index[queries[i].id] = i;
  std::vector<std::size_t> owner(responses.size());
  std::vector<Channel> channel(responses.size());
  std::set<std::string> unknown;
  for (std::size_t i = 0; i < responses.size(); ++i) {
    const auto it = index.find(responses[i].query_id);
    if (it == index.end()) {
      unknown.insert(responses[i].query_id);
      continue;
    }
    owner[i] = it->second;
    channel[i] = route_for(queries[it->second]);
  }
  if (!unknown.empty()) {
    std::string list;
    for (const auto& id : unknown) list += (list.empty() ? "" : ", ") + id;
    throw ValidationError("responses reference unknown query ids: " + list);
  }

  std::unique_ptr<reward::Executor> remote;
  if (cfg.endpoints.sandbox) remote = std::make_unique<reward::RemoteExecutor>(*cfg.endpoints.sandbox, cfg.reward.remote_timeout_seconds);
  std::unique_ptr<reward::JudgeClient> judge;
  if (cfg.endpoints.judge) {
    judge = std::make_unique<reward::HttpJudge>(*cfg.endpoints.judge, cfg.reward.judge_prompt, cfg.reward.judge_s_max,
                                               cfg.reward.remote_timeout_seconds);
  } else {
    judge = std::make_unique<reward::MockJudge>(cfg.reward.judge_s_max);
  }

  const auto score_one = [&](std::size_t i) -> RewardOutcome {
    const Response& r = responses[i];
    const Query& q = queries[owner[i]];
    const std::string& answer = r.answer ? *r.answer : r.text;
    try {
      switch (channel[i]) {
        case Channel::math:
          return reward::score_math(r, std::get<MathGroundTruth>(q.verification));
        case Channel::code: {
          if (remote) return reward::score_code(r, std::get<CodeTests>(q.verification), cfg.reward.limits, *remote);
          // One sandbox per task keeps workers from sharing scratch state.
          reward::LocalExecutor local;
          return reward::score_code(r, std::get<CodeTests>(q.verification), cfg.reward.limits, local);
        }
        case Channel::instruction_follow:
          return reward::score_if(reward::specs_from(std::get<Instructions>(q.verification)), answer);
        case Channel::judge:
          return reward::score_judge(q.user_text(), answer, *judge);
      }
    } catch (const Error& e) {
      RewardOutcome o;
      o.query_id = r.query_id;
      o.sample_index = r.sample_index;
      o.channel = std::string(to_string(channel[i]));
      o.scored = false;
      o.reason = "error";
      o.trail["error"] = e.what();
      o.token_count = r.token_count;
      o.finish_reason = r.finish_reason;
      return o;
    }
    throw ValidationError("unroutable response");
  };

  std::vector<RewardOutcome> outcomes(responses.size());
  {
    reward::BoundedWorkerPool pool(cfg.reward.workers, cfg.reward.queue_capacity);
    std::vector<std::future<RewardOutcome>> futures;
    futures.reserve(responses.size());
    for (std::size_t i = 0; i < responses.size(); ++i) futures.push_back(pool.submit([&, i] { return score_one(i); }));
    for (std::size_t i = 0; i < responses.size(); ++i) outcomes[i] = futures[i].get();
  }
  // score_judge and score_if see only text; carry the response identity over.
  for (std::size_t i = 0; i < responses.size(); ++i) {
    outcomes[i].query_id = responses[i].query_id;
    outcomes[i].sample_index = responses[i].sample_index;
    outcomes[i].token_count = responses[i].token_count;
    outcomes[i].finish_reason = responses[i].finish_reason;
  }

  const std::size_t with_rates = corpus::assign_pass_rates(queries, outcomes);
  std::vector<RewardOutcome> unscored;
  std::map<std::string, std::tuple<std::size_t, std::size_t, double>> tally;
  for (const auto& o : outcomes) {
    auto& [count, scored, sum] = tally[o.channel];
    ++count;
    if (o.scored) {
      ++scored;
      sum += o.score;
    } else {
      unscored.push_back(o);
    }
  }
  Json by_channel = Json::object();
  for (const auto& [ch, t] : tally) {
    const auto& [count, scored, sum] = t;
    by_channel[ch] = {{"count", count}, {"scored", scored}, {"mean_score", scored ? sum / static_cast<double>(scored) : 0.0}};
  }

  write_jsonl(opt.out / "outcomes.jsonl", outcomes, [](const RewardOutcome& o) { return to_json(o); });
  write_jsonl(opt.out / "unscored.jsonl", unscored, [](const RewardOutcome& o) { return to_json(o); });
  write_jsonl(opt.out / "queries.jsonl", queries, [](const Query& q) { return to_json(q); });

  const std::size_t malformed = corpus_errors.size() + response_errors.size();
  if (!unscored.empty()) result.warnings.push_back(std::to_string(unscored.size()) + " outcomes unscored; see unscored.jsonl");
  if (malformed) result.warnings.push_back(std::to_string(malformed) + " malformed input lines skipped");
  Json errors = error_rows(opt.corpus, corpus_errors);
  for (const auto& e : error_rows(opt.responses, response_errors)) errors.push_back(e);
  result.summary = {{"command", "reward"},
                    {"responses", responses.size()},
                    {"scored", responses.size() - unscored.size()},
                    {"unscored", unscored.size()},
                    {"queries_with_pass_rate", with_rates},
                    {"by_channel", std::move(by_channel)},
                    {"malformed", std::move(errors)},
                    {"remote", {{"sandbox", cfg.endpoints.sandbox.has_value()}, {"judge", cfg.endpoints.judge.has_value()}}},
                    {"warnings", result.warnings}};
  write_json_file(opt.out / "summary.json", result.summary);
  write_manifest(opt.out, std::move(manifest), {"outcomes.jsonl", "unscored.jsonl", "queries.jsonl", "summary.json"});
  result.exit_code = unscored.empty() && malformed == 0 ? kExitOk : kExitPartial;
  return result;
}

// ---------------------------------------------------------------------------
// grpo-prep

namespace {

grpo::Rollout rollout_from_json(const Json& j) {
  if (j.contains("channel")) return grpo::rollout_from(outcome_from_json(j));
  grpo::Rollout r;
  r.query_id = j.at("query_id").get<std::string>();
  r.sample_index = j.at("sample_index").get<std::int64_t>();
  r.reward = j.at("reward").get<double>();
  r.token_count = j.value("token_count", std::int64_t{0});
  r.finish_reason = j.value("finish_reason", std::string("stop"));
  return r;
}

std::vector<grpo::Rollout> read_rollouts(const fs::path& path) {
  std::vector<JsonlError> errors;
  return read_records<grpo::Rollout>(path, true, &rollout_from_json, errors);
}

Json batch_entry(const grpo::TrainingBatch& b, const std::string& file) {
  std::size_t degenerate = 0;
  for (const auto& g : b.groups) degenerate += g.degenerate ? 1 : 0;
  return {{"file", file},
          {"round_id", b.round_id},
          {"stage", static_cast<int>(b.stage)},
          {"queries", b.groups.size()},
          {"rollouts", b.rollout_count()},
          {"partial", b.partial},
          {"degenerate_groups", degenerate},
          {"lr", b.lr},
          {"max_len", b.max_len},
          {"kl_coeff", b.kl_coeff}};
}

}  // namespace

CommandResult cmd_grpo_prep(const GrpoPrepOptions& opt, const PipelineConfig& cfg) {
  if (opt.stage != 1 && opt.stage != 2) throw ValidationError("stage must be 1 or 2");
  if (opt.transition && opt.stage != 2) throw ValidationError("a stage transition prepares stage 2");
  if (opt.transition && (opt.history.empty() || !opt.supplements)) {
    throw ValidationError("a stage transition needs --history and --supplements");
  }
  fs::create_directories(opt.out);
  CommandResult result;
  RunManifest manifest = base_manifest("grpo-prep", cfg);
  manifest.stage = opt.stage;
  const auto stage = opt.stage == 1 ? grpo::Stage::one : grpo::Stage::two;

  std::vector<JsonlError> errors;
  const auto queries = read_records<Query>(opt.corpus, true, &query_from_json, errors);
  check_unique_ids(queries, opt.corpus);
  manifest.inputs.push_back(digest_input(opt.corpus));

  std::vector<std::string> outputs = {"gated_queries.jsonl", "plan.json"};
  std::vector<Query> gated = grpo::gate_queries(queries);
  Json stage2 = nullptr;
  if (opt.transition) {
    grpo::AccuracyHistory history;
    for (const auto& h : opt.history) {
      history.record(read_rollouts(h));
      manifest.inputs.push_back(digest_input(h));
    }
    const auto pool = read_records<Query>(*opt.supplements, true, &query_from_json, errors);
    manifest.inputs.push_back(digest_input(*opt.supplements));
    const auto s2 = grpo::transition_stage(gated, history, pool, cfg.supplements, cfg.grpo);
    if (s2.supplement_shortfall) result.warnings.push_back("supplement pool smaller than requested");
    write_jsonl(opt.out / "stage2_queries.jsonl", s2.queries, [](const Query& q) { return to_json(q); });
    stage2 = {{"pruned", s2.pruned},
              {"added_general_chat", s2.added_general_chat},
              {"added_instruction_follow", s2.added_instruction_follow},
              {"supplement_shortfall", s2.supplement_shortfall},
              {"queries", s2.queries.size()},
              {"max_len", s2.max_len},
              {"lr", s2.lr}};
    write_json_file(opt.out / "stage2.json", stage2);
    outputs.insert(outputs.end(), {"stage2_queries.jsonl", "stage2.json"});
    gated = s2.queries;
  }
  write_jsonl(opt.out / "gated_queries.jsonl", gated, [](const Query& q) { return to_json(q); });

  Json plan_json{{"stage", opt.stage}, {"gated", gated.size()}, {"batches", Json::array()}};
  if (gated.empty()) {
    result.exit_code = kExitNothingToTrain;
    result.warnings.push_back("nothing to train: no query passed the difficulty gate");
  } else if (opt.rollouts) {
    manifest.inputs.push_back(digest_input(*opt.rollouts));
    std::set<std::string> ids;
    for (const auto& q : gated) ids.insert(q.id);
    std::vector<grpo::Rollout> rollouts;
    for (auto& r : read_rollouts(*opt.rollouts)) {
      if (ids.count(r.query_id)) rollouts.push_back(std::move(r));
    }
    const auto groups = grpo::build_groups(rollouts, cfg.grpo, stage);
    const auto plan = grpo::plan_batches(gated, groups, cfg.grpo, stage, opt.first_round);
    fs::create_directories(opt.out / "batches");
    for (std::size_t b = 0; b < plan.batches.size(); ++b) {
      char name[32];
      std::snprintf(name, sizeof(name), "batches/batch_%04zu.jsonl", b);
      std::ofstream out(opt.out / name, std::ios::binary);
      grpo::write_batch_jsonl(plan.batches[b], out);
      if (!out) throw EnvironmentError(std::string("cannot write ") + name);
      plan_json["batches"].push_back(batch_entry(plan.batches[b], name));
      outputs.emplace_back(name);
    }
    plan_json["leftover"] = plan.leftover;
    plan_json["missing"] = plan.missing;
    if (!plan.missing.empty()) result.warnings.push_back(std::to_string(plan.missing.size()) + " gated queries have no rollouts");
    if (plan.batches.empty()) {
      result.exit_code = kExitNothingToTrain;
      result.warnings.push_back("nothing to train: too few complete groups for one batch");
    }
  }
  plan_json["nothing_to_train"] = result.exit_code == kExitNothingToTrain;
  write_json_file(opt.out / "plan.json", plan_json);

  result.summary = {{"command", "grpo-prep"},
                    {"stage", opt.stage},
                    {"input_queries", queries.size()},
                    {"gated", gated.size()},
                    {"batches", plan_json["batches"].size()},
                    {"stage2", stage2},
                    {"warnings", result.warnings}};
  write_manifest(opt.out, std::move(manifest), outputs);
  return result;
}

// ---------------------------------------------------------------------------
// simulate

CommandResult cmd_simulate(const SimulateOptions& opt, const PipelineConfig& cfg) {
  fs::create_directories(opt.out);
  CommandResult result;
  RunManifest manifest = base_manifest("simulate", cfg);
  manifest.inputs.push_back(digest_input(opt.scenario));

  auto scenario = sim::scenario_from_json(read_json_file(opt.scenario));
  if (opt.seed) scenario.seed = *opt.seed;
  manifest.seed = scenario.seed;
  auto strategies = opt.strategies.empty() ? std::vector<balancer::StrategyKind>{scenario.strategy} : opt.strategies;
  {
    std::set<balancer::StrategyKind> seen;
    for (auto s : strategies) {
      if (!seen.insert(s).second) throw ValidationError("strategy listed twice: " + std::string(balancer::to_string(s)));
    }
  }

  Json calibration = nullptr;
  if (scenario.calibration) {
    const auto& c = *scenario.calibration;
    calibration = {{"max_relative_residual", c.max_relative_residual},
                   {"relative_residuals", c.relative_residuals},
                   {"tolerance", cfg.calibration_tolerance}};
    if (c.max_relative_residual > cfg.calibration_tolerance) {
      result.warnings.push_back("calibration residual " + std::to_string(c.max_relative_residual) + " exceeds tolerance " +
                                std::to_string(cfg.calibration_tolerance));
    }
  }

  // Strategies are independent runs over the same job set.
  std::vector<std::future<sim::BatchReport>> runs;
  for (auto s : strategies) {
    auto sc = scenario;
    sc.strategy = s;
    runs.push_back(std::async(std::launch::async, [sc] { return sim::run_scenario(sc); }));
  }
  std::vector<sim::BatchReport> reports;
  for (auto& r : runs) reports.push_back(r.get());

  std::vector<std::string> outputs = {"summary.csv", "summary.txt", "summary.json"};
  std::ostringstream csv, text;
  csv << "strategy,seed,makespan,utilization,tail_ratio,total_tokens,vs_first\n";
  Json results = Json::array();
  const double base = reports.front().makespan;
  for (const auto& rep : reports) {
    const std::string name(balancer::to_string(rep.strategy));
    {
      std::ofstream out(opt.out / ("report_" + name + ".jsonl"), std::ios::binary);
      sim::write_report_jsonl(rep, out);
    }
    {
      std::ofstream out(opt.out / ("rates_" + name + ".csv"), std::ios::binary);
      sim::write_rate_csv(rep, out);
    }
    outputs.push_back("report_" + name + ".jsonl");
    outputs.push_back("rates_" + name + ".csv");
    char row[256];
    std::snprintf(row, sizeof(row), "%s,%llu,%.6f,%.6f,%.6f,%.0f,%.6f\n", name.c_str(),
                  static_cast<unsigned long long>(rep.seed), rep.makespan, rep.utilization(), rep.tail_ratio(),
                  rep.total_tokens, rep.makespan / base);
    csv << row;
    text << sim::summary_table(rep) << "\n";
    results.push_back(sim::summary_json(rep));
  }
  if (reports.size() > 1) {
    text << "strategy comparison (makespan relative to " << balancer::to_string(reports.front().strategy) << ")\n";
    char line[160];
    std::snprintf(line, sizeof(line), "%-20s %12s %10s %11s %10s\n", "strategy", "makespan_s", "relative", "improvement",
                  "tail");
    text << line;
    for (const auto& rep : reports) {
      std::snprintf(line, sizeof(line), "%-20s %12.2f %10.4f %10.2f%% %10.4f\n",
                    std::string(balancer::to_string(rep.strategy)).c_str(), rep.makespan, rep.makespan / base,
                    100.0 * (1.0 - rep.makespan / base), rep.tail_ratio());
      text << line;
    }
  }
  for (const auto& w : result.warnings) text << "warning: " << w << "\n";
  write_text_file(opt.out / "summary.csv", csv.str());
  write_text_file(opt.out / "summary.txt", text.str());

  result.summary = {{"command", "simulate"},
                    {"scenario", sim::to_json(scenario)},
                    {"calibration", calibration},
                    {"results", std::move(results)},
                    {"warnings", result.warnings}};
  write_json_file(opt.out / "summary.json", result.summary);
  write_manifest(opt.out, std::move(manifest), outputs);
  return result;
}

// ---------------------------------------------------------------------------
// report

CommandResult cmd_report(const fs::path& dir) {
  const auto path = dir / "manifest.json";
  if (!fs::is_regular_file(path)) throw ValidationError("no manifest.json in " + dir.string());
  const auto manifest = manifest_from_json(read_json_file(path));
  CommandResult result;
  const auto bad = verify_manifest(dir, manifest);
  for (const auto& b : bad) result.warnings.push_back("digest mismatch: " + b);
  result.summary = {{"command", "report"}, {"manifest", to_json(manifest)}, {"mismatched", bad}, {"verified", bad.empty()}};
  if (fs::is_regular_file(dir / "summary.json")) result.summary["run_summary"] = read_json_file(dir / "summary.json");
  result.exit_code = bad.empty() ? kExitOk : kExitPartial;
  return result;
}

// ---------------------------------------------------------------------------
// sandbox server

void serve_sandbox(const std::string& host, int port, const PipelineConfig& cfg) {
  httplib::Server server;
  const std::size_t workers = cfg.reward.workers;
  server.new_task_queue = [workers] { return new httplib::ThreadPool(workers); };
  server.Post("/execute", [](const httplib::Request& req, httplib::Response& res) {
    try {
      reward::LocalExecutor executor;
      res.set_content(handle_execute_request(Json::parse(req.body), executor).dump(), "application/json");
    } catch (const EnvironmentError& e) {
      res.status = 503;
      res.set_content(e.what(), "text/plain");
    } catch (const std::exception& e) {
      res.status = 400;
      res.set_content(e.what(), "text/plain");
    }
  });
  if (!server.listen(host, port)) throw EnvironmentError("cannot listen on " + host + ":" + std::to_string(port));
}

}  // namespace rlpipe::cli
