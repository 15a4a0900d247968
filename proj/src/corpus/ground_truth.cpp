// Copyright (c) 2026, The rlpipe Authors
// SPDX-License-Identifier: Apache-2.0

#include "rlpipe/corpus/ground_truth.hpp"

#include <httplib.h>

#include <cctype>

#include "rlpipe/core/errors.hpp"
#include "rlpipe/reward/math.hpp"

namespace rlpipe::corpus {
namespace {

std::string trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return std::string(s);
}

bool equivalent(const std::string& a, const std::string& b) { return reward::check_equivalence(a, b).score == 1; }

constexpr const char* kClarityPrompt =
    "Is the following question clear and complete enough to have a single well-defined answer? "
    "Reply with yes or no.\n\n";

}  // namespace

MockOracle::MockOracle(std::map<std::string, std::vector<std::string>> scripted, std::string fallback)
    : fn_([scripted = std::move(scripted), fallback = std::move(fallback)](const std::string& prompt, int i) {
        const auto it = scripted.find(prompt);
        if (it == scripted.end() || it->second.empty()) return fallback;
        return it->second[static_cast<std::size_t>(i) % it->second.size()];
      }) {}

HttpOracle::HttpOracle(std::string endpoint, std::string model, double timeout_seconds)
    : endpoint_(std::move(endpoint)), model_(std::move(model)), timeout_seconds_(timeout_seconds) {}

std::string HttpOracle::answer(const std::string& prompt, int sample_index) {
  httplib::Client client(endpoint_);
  client.set_read_timeout(static_cast<time_t>(timeout_seconds_), 0);
  client.set_connection_timeout(10, 0);
  const Json req{{"model", model_}, {"prompt", prompt}, {"sample_index", sample_index}};
  auto res = client.Post("/answer", req.dump(), "application/json");
  if (!res) throw TransportError("oracle endpoint " + endpoint_ + ": " + httplib::to_string(res.error()));
  if (res->status != 200) throw TransportError("oracle endpoint returned HTTP " + std::to_string(res->status));
  try {
    return Json::parse(res->body).at("answer").get<std::string>();
  } catch (const Json::exception& e) {
    throw TransportError(std::string("malformed oracle response: ") + e.what());
  }
}

std::string_view to_string(GroundTruthDecision::Kind k) {
  switch (k) {
    case GroundTruthDecision::Kind::confirmed: return "confirmed";
    case GroundTruthDecision::Kind::revised: return "revised";
    case GroundTruthDecision::Kind::unresolved: return "unresolved";
  }
  return "?";
}

std::string oracle_final_answer(const std::string& reply) {
  if (auto boxed = reward::extract_boxed(reply)) return trim(*boxed);
  return trim(reply);
}

std::pair<std::size_t, std::size_t> most_common_answer(const std::vector<std::string>& answers) {
  if (answers.empty()) throw ValidationError("no answers to vote over");
  // classes[k] = (first index, size)
  std::vector<std::pair<std::size_t, std::size_t>> classes;
  for (std::size_t i = 0; i < answers.size(); ++i) {
    bool placed = false;
    for (auto& c : classes) {
      if (equivalent(answers[c.first], answers[i])) {
        ++c.second;
        placed = true;
        break;
      }
    }
    if (!placed) classes.emplace_back(i, 1);
  }
  auto best = classes.front();
  for (const auto& c : classes) {
    if (c.second > best.second) best = c;
  }
  return best;
}

GroundTruthDecision verify_ground_truth(const Query& q, OracleClient& primary, OracleClient& secondary, int n_samples) {
  if (q.category != Category::math) throw ValidationError("ground-truth verification needs a math query: " + q.id);
  const auto* gt = std::get_if<MathGroundTruth>(&q.verification);
  if (!gt) throw ValidationError("math query without ground truth: " + q.id);
  if (n_samples <= 0) throw ValidationError("n_samples must be positive");

  GroundTruthDecision d;
  const std::string prompt = q.user_text();
  for (int i = 0; i < n_samples; ++i) d.primary_answers.push_back(oracle_final_answer(primary.answer(prompt, i)));
  const auto [idx, votes] = most_common_answer(d.primary_answers);
  d.common = d.primary_answers[idx];
  d.common_votes = votes;
  if (equivalent(d.common, gt->answer)) {
    d.kind = GroundTruthDecision::Kind::confirmed;
    return d;
  }
  d.secondary_answer = oracle_final_answer(secondary.answer(prompt, 0));
  if (equivalent(d.secondary_answer, d.common)) {
    d.kind = GroundTruthDecision::Kind::revised;
    d.new_answer = d.secondary_answer;
  } else {
    d.kind = GroundTruthDecision::Kind::unresolved;
  }
  return d;
}

void apply_decision(Query& q, const GroundTruthDecision& d) {
  if (d.kind != GroundTruthDecision::Kind::revised) return;
  q.verification = MathGroundTruth{d.new_answer};
  q.status = QueryStatus::rewritten;
}

FilterVerdict filter_clarity(const Query& q, OracleClient& oracle) {
  std::string reply = trim(oracle.answer(kClarityPrompt + q.user_text(), 0));
  for (auto& c : reply) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  const bool unclear = reply.rfind("no", 0) == 0 && (reply.size() == 2 || !std::isalpha(static_cast<unsigned char>(reply[2])));
  return unclear ? FilterVerdict::dropped(FilterReason::unclear) : FilterVerdict::kept();
}

}  // namespace rlpipe::corpus
