// Copyright (c) 2026, The rlpipe Authors
// SPDX-License-Identifier: Apache-2.0
//
// rlpipe: corpus filtering, reward scoring, GRPO batch preparation and
// rollout simulation from the command line.

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rlpipe/cli/commands.hpp"
#include "rlpipe/core/errors.hpp"

using namespace rlpipe;
using namespace rlpipe::cli;

namespace {

int finish(const CommandResult& r, bool quiet) {
  for (const auto& w : r.warnings) std::cerr << "warning: " << w << "\n";
  if (!quiet) std::cout << r.summary.dump(2) << "\n";
  return r.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"rlpipe: RL data and rollout pipeline"};
  app.require_subcommand(1);
  std::string config_path;
  bool quiet = false;
  app.add_option("--config", config_path, "JSON config file (defaults apply otherwise)");
  app.add_flag("-q,--quiet", quiet, "Do not print the run summary");

  FilterOptions fo;
  std::string fo_responses;
  auto* filter = app.add_subcommand("filter", "Filter a query corpus (and optionally its responses)");
  filter->add_option("--corpus", fo.corpus, "Query JSONL")->required();
  filter->add_option("--eval", fo.eval, "Evaluation-set query JSONL for decontamination")->required();
  filter->add_option("--responses", fo_responses, "Response JSONL");
  filter->add_option("--out", fo.out, "Run directory")->required();
  filter->add_flag("--strict", fo.strict, "Abort on the first malformed line");

  RewardOptions ro;
  auto* reward = app.add_subcommand("reward", "Score responses through the per-category reward channels");
  reward->add_option("--corpus", ro.corpus, "Query JSONL")->required();
  reward->add_option("--responses", ro.responses, "Response JSONL")->required();
  reward->add_option("--out", ro.out, "Run directory")->required();
  reward->add_flag("--strict", ro.strict, "Abort on the first malformed line");

  GrpoPrepOptions go;
  std::string go_rollouts, go_supplements;
  auto* prep = app.add_subcommand("grpo-prep", "Gate queries and assemble advantage-annotated batches");
  prep->add_option("--corpus", go.corpus, "Query JSONL with pass rates")->required();
  prep->add_option("--rollouts", go_rollouts, "Reward outcomes or rollout JSONL");
  prep->add_option("--stage", go.stage, "Training stage (1 or 2)")->check(CLI::IsMember({1, 2}));
  prep->add_flag("--transition", go.transition, "Build the stage-2 query set");
  prep->add_option("--history", go.history, "Stage-1 rollout files for accuracy tallies");
  prep->add_option("--supplements", go_supplements, "Query pool for stage-2 supplements");
  prep->add_option("--first-round", go.first_round, "Round id of the first batch");
  prep->add_option("--out", go.out, "Run directory")->required();

  SimulateOptions so;
  std::string so_strategies;
  std::optional<std::uint64_t> so_seed;
  auto* simulate = app.add_subcommand("simulate", "Simulate a rollout batch under placement strategies");
  simulate->add_option("--scenario", so.scenario, "Scenario JSON")->required();
  simulate->add_option("--strategies", so_strategies, "Comma-separated: static_bound,spread_static,streaming_dynamic");
  simulate->add_option("--seed", so_seed, "Override the scenario seed");
  simulate->add_option("--out", so.out, "Run directory")->required();

  std::string report_dir;
  auto* report = app.add_subcommand("report", "Summarize a run directory and verify its manifest");
  report->add_option("--dir", report_dir, "Run directory")->required();

  std::string host = "127.0.0.1";
  int port = 8080;
  auto* server = app.add_subcommand("sandbox-server", "Serve POST /execute with the local sandbox");
  server->add_option("--host", host, "Bind address");
  server->add_option("--port", port, "Port");

  CLI11_PARSE(app, argc, argv);

  try {
    const auto cfg = load_config(config_path.empty() ? std::nullopt : std::optional<std::filesystem::path>(config_path));
    if (*filter) {
      if (!fo_responses.empty()) fo.responses = fo_responses;
      return finish(cmd_filter(fo, cfg), quiet);
    }
    if (*reward) return finish(cmd_reward(ro, cfg), quiet);
    if (*prep) {
      if (!go_rollouts.empty()) go.rollouts = go_rollouts;
      if (!go_supplements.empty()) go.supplements = go_supplements;
      return finish(cmd_grpo_prep(go, cfg), quiet);
    }
    if (*simulate) {
      std::string item;
      for (std::size_t i = 0; i <= so_strategies.size(); ++i) {
        if (i == so_strategies.size() || so_strategies[i] == ',') {
          if (!item.empty()) so.strategies.push_back(balancer::parse_strategy(item));
          item.clear();
        } else {
          item += so_strategies[i];
        }
      }
      so.seed = so_seed;
      return finish(cmd_simulate(so, cfg), quiet);
    }
    if (*report) return finish(cmd_report(report_dir), quiet);
    if (*server) {
      std::cerr << "sandbox server on " << host << ":" << port << "\n";
      serve_sandbox(host, port, cfg);
      return kExitOk;
    }
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitPartial;
  }
  return kExitInvalid;
}
