// Copyright (c) 2026, The rlpipe Authors
// SPDX-License-Identifier: Apache-2.0

#include "rlpipe/corpus/pipeline.hpp"

#include <map>

#include "rlpipe/core/errors.hpp"
#include "rlpipe/corpus/dedup.hpp"

namespace rlpipe::corpus {
namespace {

struct StageVerdict {
  std::string verdict = "keep";
  std::optional<FilterReason> reason;
  Json detail = Json::object();
};

StageVerdict from_filter(const FilterVerdict& v) {
  StageVerdict s;
  if (!v.keep()) {
    s.verdict = "drop";
    s.reason = v.drop;
  }
  return s;
}

std::string response_id(const Response& r) { return r.query_id + "#" + std::to_string(r.sample_index); }

}  // namespace

Json to_json(const FilterReportRow& row) {
  Json j{{"id", row.id}, {"stage", row.stage}, {"verdict", row.verdict}};
  j["reason"] = row.reason ? Json(std::string(to_string(*row.reason))) : Json();
  if (!row.detail.empty()) j["detail"] = row.detail;
  return j;
}

QueryFilterResult filter_queries(std::vector<Query> corpus, const std::vector<Query>& eval_set,
                                 const QueryFilterConfig& cfg, OracleClient* clarity_oracle) {
  QueryFilterResult result;
  std::vector<std::size_t> active;
  std::vector<Query> subset;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    if (corpus[i].status == QueryStatus::active) {
      active.push_back(i);
      subset.push_back(corpus[i]);
    }
  }

  // stage name -> verdict per active query
  std::vector<std::pair<std::string, std::vector<StageVerdict>>> table;
  std::vector<MathSuitability> suitability(subset.size());
  for (const auto& stage : cfg.stages) {
    std::vector<StageVerdict> v(subset.size());
    if (stage == "url") {
      for (std::size_t k = 0; k < subset.size(); ++k) v[k] = from_filter(filter_url(subset[k]));
    } else if (stage == "image_ref") {
      for (std::size_t k = 0; k < subset.size(); ++k) v[k] = from_filter(filter_image_ref(subset[k], cfg.lexicon));
    } else if (stage == "decontaminate") {
      const auto dc = decontaminate(subset, eval_set, cfg.jaccard_threshold);
      result.empty_eval_warning = dc.empty_eval_warning;
      for (std::size_t k = 0; k < subset.size(); ++k) {
        v[k] = from_filter(dc.matches[k].verdict);
        if (dc.matches[k].matched && !dc.matches[k].verdict.keep()) {
          v[k].detail = {{"eval_id", eval_set[*dc.matches[k].matched].id}, {"similarity", dc.matches[k].similarity}};
        }
      }
    } else if (stage == "dedup") {
      const auto dd = deduplicate(subset, cfg.jaccard_threshold);
      for (std::size_t k = 0; k < subset.size(); ++k) {
        v[k] = from_filter(dd[k].verdict);
        if (dd[k].matched) v[k].detail = {{"duplicate_of", subset[*dd[k].matched].id}, {"similarity", dd[k].similarity}};
      }
    } else if (stage == "clarity") {
      if (!clarity_oracle) continue;
      for (std::size_t k = 0; k < subset.size(); ++k) {
        try {
          v[k] = from_filter(filter_clarity(subset[k], *clarity_oracle));
        } catch (const TransportError& e) {
          v[k].verdict = "error";
          v[k].detail = {{"error", e.what()}};
        }
      }
    } else if (stage == "math_suitability") {
      for (std::size_t k = 0; k < subset.size(); ++k) {
        if (subset[k].category != Category::math) continue;
        suitability[k] = classify_math_suitability(subset[k]);
        const auto& s = suitability[k];
        if (s.kind == MathSuitability::Kind::drop) {
          v[k].verdict = "drop";
          v[k].reason = s.reason;
        } else if (s.kind == MathSuitability::Kind::rewrite_mcq) {
          v[k].verdict = "rewrite";
          v[k].detail = {{"answer", s.rewritten_answer}};
        }
      }
    } else {
      throw ValidationError("unknown filter stage: " + stage);
    }
    table.emplace_back(stage, std::move(v));
  }

  for (std::size_t k = 0; k < subset.size(); ++k) {
    Query& q = corpus[active[k]];
    bool dropped = false;
    for (const auto& [stage, verdicts] : table) {
      const auto& sv = verdicts[k];
      result.report.push_back({q.id, stage, sv.verdict, sv.reason, sv.detail});
      if (!dropped && sv.verdict == "drop") {
        dropped = true;
        q.status = QueryStatus::filtered;
        q.filter_reason = sv.reason;
      }
    }
    if (!dropped && suitability[k].kind == MathSuitability::Kind::rewrite_mcq) {
      q.turns = {Turn{Role::user, suitability[k].rewritten_text}};
      q.verification = MathGroundTruth{suitability[k].rewritten_answer};
      q.status = QueryStatus::rewritten;
    }
  }
  result.queries = std::move(corpus);
  return result;
}

std::vector<FilterReportRow> verify_corpus_ground_truth(std::vector<Query>& queries, OracleClient& primary,
                                                        OracleClient& secondary, int n_samples) {
  std::vector<FilterReportRow> rows;
  for (auto& q : queries) {
    if (!q.is_active() || q.category != Category::math || !std::holds_alternative<MathGroundTruth>(q.verification)) {
      continue;
    }
    try {
      const auto d = verify_ground_truth(q, primary, secondary, n_samples);
      Json detail{{"common", d.common}, {"votes", d.common_votes}};
      if (d.kind != GroundTruthDecision::Kind::confirmed) detail["secondary"] = d.secondary_answer;
      if (d.kind == GroundTruthDecision::Kind::revised) {
        detail["previous"] = std::get<MathGroundTruth>(q.verification).answer;
      }
      apply_decision(q, d);
      rows.push_back({q.id, "ground_truth", std::string(to_string(d.kind)), std::nullopt, std::move(detail)});
    } catch (const TransportError& e) {
      rows.push_back({q.id, "ground_truth", "error", std::nullopt, {{"error", e.what()}, {"retriable", true}}});
    }
  }
  return rows;
}

ResponseFilterResult filter_responses(std::vector<Response> responses, const ResponseFilterConfig& cfg,
                                      const PplScorer* scorer) {
  ResponseFilterResult result;
  for (auto& r : responses) {
    if (!r.ppl_score && scorer) r.ppl_score = scorer->perplexity(r.text);
    const auto v = filter_response(r, cfg);
    FilterReportRow row{response_id(r), "response", v.keep() ? "keep" : "drop", v.drop, Json::object()};
    if (r.ppl_score) row.detail["ppl"] = *r.ppl_score;
    result.report.push_back(std::move(row));
    if (v.keep()) result.kept.push_back(std::move(r));
  }
  return result;
}

std::size_t assign_pass_rates(std::vector<Query>& queries, const std::vector<RewardOutcome>& outcomes) {
  std::map<std::string, std::vector<RewardOutcome>> by_query;
  for (const auto& o : outcomes) by_query[o.query_id].push_back(o);
  std::size_t updated = 0;
  for (auto& q : queries) {
    const auto it = by_query.find(q.id);
    if (it == by_query.end()) continue;
    bool any_scored = false;
    for (const auto& o : it->second) any_scored = any_scored || o.scored;
    if (!any_scored) continue;
    compute_pass_rate(q, it->second);
    ++updated;
  }
  return updated;
}

}  // namespace rlpipe::corpus
