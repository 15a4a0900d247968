// Copyright (c) 2026, The rlpipe Authors
// SPDX-License-Identifier: Apache-2.0

#include "rlpipe/reward/judge.hpp"

#include <httplib.h>

#include <cmath>

#include "rlpipe/core/digest.hpp"
#include "rlpipe/core/errors.hpp"

namespace rlpipe::reward {

void validate(const JudgeScores& s) {
  if (!(s.s_max > 0.0) || !std::isfinite(s.s_max)) throw ValidationError("judge s_max must be positive");
  for (double v : {s.helpfulness, s.correctness, s.coherence}) {
    if (!(v >= 0.0 && v <= s.s_max)) {
      throw ValidationError("judge score " + std::to_string(v) + " outside [0, " + std::to_string(s.s_max) + "]");
    }
  }
}

double final_score(const JudgeScores& s) {
  validate(s);
  return (s.helpfulness + s.correctness + s.coherence) / 3.0 / s.s_max;
}

MockJudge::MockJudge(double s_max)
    : fn_([s_max](const std::string& q, const std::string& r) {
        const auto h = sha256_hex(q + '\0' + r);
        auto axis = [&](std::size_t off) {
          const unsigned v = static_cast<unsigned>(std::stoul(h.substr(off, 4), nullptr, 16));
          return s_max * static_cast<double>(v) / 65535.0;
        };
        return JudgeScores{axis(0), axis(4), axis(8), s_max};
      }) {}

std::string render_judge_prompt(const std::string& tmpl, const std::string& query, const std::string& response) {
  std::string out;
  out.reserve(tmpl.size() + query.size() + response.size());
  std::size_t i = 0;
  while (i < tmpl.size()) {
    if (tmpl.compare(i, 9, "{{query}}") == 0) {
      out += query;
      i += 9;
    } else if (tmpl.compare(i, 12, "{{response}}") == 0) {
      out += response;
      i += 12;
    } else {
      out += tmpl[i++];
    }
  }
  return out;
}

HttpJudge::HttpJudge(std::string endpoint, std::string prompt_template, double s_max, double timeout_seconds)
    : endpoint_(std::move(endpoint)),
      template_(std::move(prompt_template)),
      s_max_(s_max),
      timeout_seconds_(timeout_seconds) {}

JudgeScores HttpJudge::judge(const std::string& query, const std::string& response) {
  httplib::Client client(endpoint_);
  const auto secs = static_cast<time_t>(timeout_seconds_);
  client.set_read_timeout(secs, 0);
  client.set_connection_timeout(10, 0);
  const Json req{{"prompt", render_judge_prompt(template_, query, response)},
                 {"query", query},
                 {"response", response},
                 {"s_max", s_max_}};
  auto res = client.Post("/judge", req.dump(), "application/json");
  if (!res) throw TransportError("judge endpoint " + endpoint_ + ": " + httplib::to_string(res.error()));
  if (res->status != 200) throw TransportError("judge endpoint returned HTTP " + std::to_string(res->status));
  Json body;
  try {
    body = Json::parse(res->body);
    return {body.at("helpfulness").get<double>(), body.at("correctness").get<double>(),
            body.at("coherence").get<double>(), s_max_};
  } catch (const Json::exception& e) {
    throw TransportError(std::string("malformed judge response: ") + e.what());
  }
}

RewardOutcome score_judge(const std::string& query_text, const std::string& response_text, JudgeClient& judge) {
  RewardOutcome out;
  out.channel = "judge";
  JudgeScores s;
  try {
    s = judge.judge(query_text, response_text);
  } catch (const TransportError& e) {
    out.scored = false;
    out.reason = "transport_error";
    out.trail["error"] = e.what();
    return out;
  }
  out.score = final_score(s);
  out.reason = "judged";
  out.trail = {{"helpfulness", s.helpfulness}, {"correctness", s.correctness}, {"coherence", s.coherence}, {"s_max", s.s_max}};
  return out;
}

}  // namespace rlpipe::reward
