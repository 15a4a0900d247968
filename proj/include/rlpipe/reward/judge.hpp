// Copyright (c) 2026, The rlpipe Authors
// SPDX-License-Identifier: Apache-2.0
//
// Judge channel for responses without a verifier. A JudgeClient returns
// helpfulness, correctness and coherence on [0, s_max]; the reward is their
// mean divided by s_max.
//
// Remote contract:
//   POST /judge
//   request:  {"prompt": string, "query": string, "response": string, "s_max": number}
//   response: {"helpfulness": number, "correctness": number, "coherence": number}

#pragma once

#include <functional>
#include <string>

#include "rlpipe/core/types.hpp"

namespace rlpipe::reward {

struct JudgeScores {
  double helpfulness = 0.0;
  double correctness = 0.0;
  double coherence = 0.0;
  double s_max = 5.0;
};

// Throws ValidationError unless s_max > 0 and every axis is in [0, s_max].
void validate(const JudgeScores& s);

// Mean of the three axes over s_max.
double final_score(const JudgeScores& s);

class JudgeClient {
 public:
  virtual ~JudgeClient() = default;
  virtual JudgeScores judge(const std::string& query, const std::string& response) = 0;
};

// Returns scores from a callback; the default callback derives stable
// pseudo-scores from a hash of (query, response).
class MockJudge final : public JudgeClient {
 public:
  using Fn = std::function<JudgeScores(const std::string&, const std::string&)>;
  explicit MockJudge(double s_max = 5.0);
  explicit MockJudge(Fn fn) : fn_(std::move(fn)) {}

  JudgeScores judge(const std::string& query, const std::string& response) override { return fn_(query, response); }

 private:
  Fn fn_;
};

// {{query}} and {{response}} are substituted in the template.
std::string render_judge_prompt(const std::string& tmpl, const std::string& query, const std::string& response);

class HttpJudge final : public JudgeClient {
 public:
  HttpJudge(std::string endpoint, std::string prompt_template, double s_max = 5.0, double timeout_seconds = 60.0);
  JudgeScores judge(const std::string& query, const std::string& response) override;

 private:
  std::string endpoint_;
  std::string template_;
  double s_max_;
  double timeout_seconds_;
};

// Reward channel "judge". Transport failures give an unscored outcome;
// out-of-range scores throw ValidationError.
RewardOutcome score_judge(const std::string& query_text, const std::string& response_text, JudgeClient& judge);

}  // namespace rlpipe::reward
