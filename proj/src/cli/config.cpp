// Copyright (c) 2026, The rlpipe Authors
// SPDX-License-Identifier: Apache-2.0

#include "rlpipe/cli/config.hpp"

#include <cstdlib>

#include "rlpipe/core/digest.hpp"
#include "rlpipe/core/errors.hpp"
#include "rlpipe/core/json_io.hpp"

namespace rlpipe::cli {

namespace {

std::optional<std::string> optional_string(const Json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<std::string>();
}

void override_from_env(std::optional<std::string>& slot, const char* name) {
  if (const char* v = std::getenv(name); v != nullptr && *v != '\0') slot = v;
}

}  // namespace

std::string default_judge_prompt() {
  return "You are grading an assistant's reply.\n"
         "Rate it on helpfulness, correctness and coherence, each an integer from 0 to 5.\n"
         "Answer with a JSON object {\"helpfulness\": h, \"correctness\": c, \"coherence\": k}.\n\n"
         "[User]\n{{query}}\n\n[Assistant]\n{{response}}\n";
}

PipelineConfig config_from_json(const Json& j, const std::filesystem::path& base_dir) {
  if (!j.is_object()) throw ValidationError("config must be a JSON object");
  PipelineConfig c;
  c.reward.judge_prompt = default_judge_prompt();
  // Duplicates go first so a copied item is reported as a copy, whatever
  // else is wrong with it.
  c.filter.queries.stages = {"dedup", "url", "image_ref", "decontaminate", "clarity", "math_suitability"};
  c.seed = j.value("seed", c.seed);
  c.calibration_tolerance = j.value("calibration_tolerance", c.calibration_tolerance);

  if (j.contains("filter")) {
    const auto& f = j.at("filter");
    auto& q = c.filter.queries;
    if (f.contains("stages")) q.stages = f.at("stages").get<std::vector<std::string>>();
    q.jaccard_threshold = f.value("jaccard_threshold", q.jaccard_threshold);
    if (f.contains("image_phrases")) q.lexicon.phrases = f.at("image_phrases").get<std::vector<std::string>>();
    q.lexicon.markdown_images = f.value("markdown_images", q.lexicon.markdown_images);
    auto& r = c.filter.responses;
    r.ppl_threshold = f.value("ppl_threshold", r.ppl_threshold);
    r.ngram_n = f.value("ngram_n", r.ngram_n);
    r.min_repeats = f.value("min_repeats", r.min_repeats);
    r.max_period = f.value("max_period", r.max_period);
    if (auto p = optional_string(f, "ppl_reference")) {
      std::filesystem::path path(*p);
      c.filter.ppl_reference = path.is_relative() && !base_dir.empty() ? base_dir / path : path;
    }
    c.filter.ppl_order = f.value("ppl_order", c.filter.ppl_order);
    c.filter.verify_ground_truth = f.value("verify_ground_truth", c.filter.verify_ground_truth);
    c.filter.primary_model = f.value("primary_model", c.filter.primary_model);
    c.filter.secondary_model = f.value("secondary_model", c.filter.secondary_model);
    c.filter.gt_samples = f.value("gt_samples", c.filter.gt_samples);
  }

  if (j.contains("reward")) {
    const auto& r = j.at("reward");
    c.reward.limits = reward::limits_from_json(r.value("limits", Json::object()), c.reward.limits);
    c.reward.workers = r.value("workers", c.reward.workers);
    c.reward.queue_capacity = r.value("queue_capacity", c.reward.queue_capacity);
    c.reward.judge_s_max = r.value("judge_s_max", c.reward.judge_s_max);
    c.reward.remote_timeout_seconds = r.value("remote_timeout_seconds", c.reward.remote_timeout_seconds);
    if (auto p = optional_string(r, "judge_prompt_path")) {
      std::filesystem::path path(*p);
      if (path.is_relative() && !base_dir.empty()) path = base_dir / path;
      c.reward.judge_prompt = read_text_file(path);
    } else if (auto t = optional_string(r, "judge_prompt")) {
      c.reward.judge_prompt = *t;
    }
  }

  if (j.contains("grpo")) c.grpo = grpo::grpo_config_from_json(j.at("grpo"));
  if (j.contains("supplements")) {
    const auto& s = j.at("supplements");
    c.supplements.general_chat = s.value("general_chat", c.supplements.general_chat);
    c.supplements.instruction_follow = s.value("instruction_follow", c.supplements.instruction_follow);
  }
  if (j.contains("endpoints")) {
    const auto& e = j.at("endpoints");
    c.endpoints.sandbox = optional_string(e, "sandbox");
    c.endpoints.judge = optional_string(e, "judge");
    c.endpoints.oracle = optional_string(e, "oracle");
  }

  if (c.reward.workers == 0 || c.reward.queue_capacity == 0) throw ValidationError("reward.workers and queue_capacity must be positive");
  if (c.reward.judge_s_max <= 0) throw ValidationError("reward.judge_s_max must be positive");
  if (c.filter.gt_samples <= 0) throw ValidationError("filter.gt_samples must be positive");
  if (!(c.calibration_tolerance > 0)) throw ValidationError("calibration_tolerance must be positive");
  return c;
}

void apply_env_overrides(PipelineConfig& cfg) {
  override_from_env(cfg.endpoints.sandbox, "RLPIPE_SANDBOX_ENDPOINT");
  override_from_env(cfg.endpoints.judge, "RLPIPE_JUDGE_ENDPOINT");
  override_from_env(cfg.endpoints.oracle, "RLPIPE_ORACLE_ENDPOINT");
}

PipelineConfig load_config(const std::optional<std::filesystem::path>& path) {
  PipelineConfig cfg = path ? config_from_json(read_json_file(*path), path->parent_path()) : config_from_json(Json::object());
  apply_env_overrides(cfg);
  return cfg;
}

Json to_json(const PipelineConfig& c) {
  const auto& q = c.filter.queries;
  const auto& r = c.filter.responses;
  Json filter{{"stages", q.stages},
              {"jaccard_threshold", q.jaccard_threshold},
              {"image_phrases", q.lexicon.phrases},
              {"markdown_images", q.lexicon.markdown_images},
              {"ppl_threshold", r.ppl_threshold},
              {"ngram_n", r.ngram_n},
              {"min_repeats", r.min_repeats},
              {"max_period", r.max_period},
              {"ppl_order", c.filter.ppl_order},
              {"verify_ground_truth", c.filter.verify_ground_truth},
              {"primary_model", c.filter.primary_model},
              {"secondary_model", c.filter.secondary_model},
              {"gt_samples", c.filter.gt_samples}};
  // The reference corpus enters by content, never by path.
  filter["ppl_reference_digest"] = c.filter.ppl_reference ? Json(sha256_file(*c.filter.ppl_reference)) : Json(nullptr);
  Json reward{{"limits", reward::to_json(c.reward.limits)},
              {"judge_s_max", c.reward.judge_s_max},
              {"judge_prompt_digest", sha256_hex(c.reward.judge_prompt)}};
  return {{"seed", c.seed},
          {"calibration_tolerance", c.calibration_tolerance},
          {"filter", std::move(filter)},
          {"reward", std::move(reward)},
          {"grpo", grpo::to_json(c.grpo)},
          {"supplements", {{"general_chat", c.supplements.general_chat}, {"instruction_follow", c.supplements.instruction_follow}}}};
}

std::string config_hash(const PipelineConfig& cfg) { return sha256_hex(to_json(cfg).dump()); }

}  // namespace rlpipe::cli
