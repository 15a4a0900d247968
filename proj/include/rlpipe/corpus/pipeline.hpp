// Copyright (c) 2026, The rlpipe Authors
// SPDX-License-Identifier: Apache-2.0
//
// Filter chains over whole corpora. Every stage classifies the original
// input independently; a query's final status comes from the first stage in
// chain order that drops it. The set of dropped queries therefore does not
// depend on the order, only the recorded reason does.

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "rlpipe/core/types.hpp"
#include "rlpipe/corpus/filters.hpp"
#include "rlpipe/corpus/ground_truth.hpp"
#include "rlpipe/corpus/ppl.hpp"

namespace rlpipe::corpus {

struct FilterReportRow {
  std::string id;
  std::string stage;
  // keep | drop | rewrite | confirmed | revised | unresolved | error
  std::string verdict;
  std::optional<FilterReason> reason;
  Json detail = Json::object();
};

Json to_json(const FilterReportRow& row);

struct QueryFilterConfig {
  // Stage names: url, image_ref, decontaminate, dedup, clarity, math_suitability.
  std::vector<std::string> stages = {"url", "image_ref", "decontaminate", "dedup", "clarity", "math_suitability"};
  ImageLexicon lexicon = ImageLexicon::defaults();
  double jaccard_threshold = 0.85;
};

struct QueryFilterResult {
  std::vector<Query> queries;
  std::vector<FilterReportRow> report;
  bool empty_eval_warning = false;
};

// Queries already filtered on input pass through untouched. The clarity
// stage is skipped when no oracle is given.
QueryFilterResult filter_queries(std::vector<Query> corpus, const std::vector<Query>& eval_set,
                                 const QueryFilterConfig& cfg, OracleClient* clarity_oracle = nullptr);

// Runs verify_ground_truth on active math queries with a ground truth and
// applies the decisions. A transport failure records an "error" row and
// leaves that query unchanged.
std::vector<FilterReportRow> verify_corpus_ground_truth(std::vector<Query>& queries, OracleClient& primary,
                                                        OracleClient& secondary, int n_samples);

struct ResponseFilterResult {
  std::vector<Response> kept;
  std::vector<FilterReportRow> report;
};

// Responses without a recorded ppl_score get one from `scorer` when given.
ResponseFilterResult filter_responses(std::vector<Response> responses, const ResponseFilterConfig& cfg,
                                      const PplScorer* scorer = nullptr);

// Groups outcomes by query id and stores pass rates on matching queries.
// Returns the number of queries updated.
std::size_t assign_pass_rates(std::vector<Query>& queries, const std::vector<RewardOutcome>& outcomes);

}  // namespace rlpipe::corpus
