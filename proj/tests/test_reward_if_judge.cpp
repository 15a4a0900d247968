// Copyright (c) 2026, The rlpipe Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>
#include <httplib.h>

#include <algorithm>
#include <thread>

#include "rlpipe/core/errors.hpp"
#include "rlpipe/core/rng.hpp"
#include "rlpipe/reward/executor.hpp"
#include "rlpipe/reward/ifeval.hpp"
#include "rlpipe/reward/judge.hpp"

using namespace rlpipe;
using namespace rlpipe::reward;

namespace {

InstructionSpec spec(std::string id, Json kw = Json::object()) { return {std::move(id), std::move(kw)}; }

// Brute-force word count: split on every whitespace char, drop empties.
std::size_t oracle_words(const std::string& s) {
  std::size_t n = 0;
  std::string cur;
  for (char c : s + " ") {
    if (c == ' ' || c == '\n' || c == '\t' || c == '\r' || c == '\v' || c == '\f') {
      if (!cur.empty()) ++n;
      cur.clear();
    } else {
      cur += c;
    }
  }
  return n;
}

}  // namespace

TEST_CASE("validator examples") {
  CHECK_FALSE(validate_one(spec("length_constraints:number_words", {{"relation", "at least"}, {"num_words", 5}}),
                           "only three words"));
  CHECK(validate_one(spec("length_constraints:number_words", {{"relation", "less than"}, {"num_words", 5}}),
                     "only three words"));
  CHECK(validate_one(spec("keywords:existence", {{"keywords", {"gravity"}}}), "It is all about Gravity here."));
  CHECK_FALSE(validate_one(spec("keywords:existence", {{"keywords", {"gravity", "mass"}}}), "gravity only"));
  CHECK(validate_one(spec("startend:quotation"), "\"wrapped reply\""));
  CHECK_FALSE(validate_one(spec("startend:quotation"), " \"wrapped reply\""));
  CHECK_FALSE(validate_one(spec("startend:quotation"), "\""));
}

TEST_CASE("remaining validators") {
  CHECK(validate_one(spec("keywords:forbidden_words", {{"forbidden_words", {"cat"}}}), "concatenate strings"));
  CHECK_FALSE(validate_one(spec("keywords:forbidden_words", {{"forbidden_words", {"cat"}}}), "A CAT sat."));
  CHECK(validate_one(spec("length_constraints:number_sentences", {{"relation", "at least"}, {"num_sentences", 3}}),
                     "One. Two! Three?"));
  CHECK(validate_one(spec("length_constraints:number_sentences", {{"relation", "less than"}, {"num_sentences", 2}}),
                     "Version 2.5 is out."));
  CHECK(validate_one(spec("detectable_format:number_bullet_lists", {{"num_bullets", 2}}), "Intro\n* one\n- two\n**bold**"));
  CHECK_FALSE(validate_one(spec("detectable_format:number_bullet_lists", {{"num_bullets", 3}}), "* one\n* two"));
  CHECK(validate_one(spec("detectable_format:title"), "<<My Title>>\nbody"));
  CHECK_FALSE(validate_one(spec("detectable_format:title"), "<< >> body"));
  CHECK(validate_one(spec("punctuation:no_comma"), "no commas here"));
  CHECK_FALSE(validate_one(spec("punctuation:no_comma"), "one, two"));
  CHECK(validate_one(spec("detectable_content:postscript", {{"postscript_marker", "P.S."}}), "Hi.\n\np.s. see you"));
  CHECK_FALSE(validate_one(spec("detectable_content:postscript", {{"postscript_marker", "P.S."}}), "Hi. P.S."));
}

TEST_CASE("registry errors stay distinct from false") {
  CHECK_THROWS_AS(validate_one(spec("language:response_language"), "x"), RegistryError);
  CHECK_THROWS_AS(validate_one(spec("punctuation:no_comma", {{"bogus", 1}}), "x"), RegistryError);
  CHECK(validate_one(spec("punctuation:no_comma", {{"bogus", nullptr}}), "x"));
  CHECK_THROWS_AS(validate_one(spec("length_constraints:number_words", {{"relation", "around"}, {"num_words", 1}}), "x"),
                  RegistryError);
  const auto out = score_if({spec("punctuation:no_comma"), spec("does:not_exist")}, "x");
  CHECK_FALSE(out.scored);
  CHECK(out.reason == "registry_error");
  CHECK(InstructionRegistry::builtin().ids().size() == 9);
}

TEST_CASE("score_if all-or-nothing") {
  const std::vector<InstructionSpec> three = {spec("punctuation:no_comma"),
                                              spec("keywords:existence", {{"keywords", {"sun"}}}),
                                              spec("length_constraints:number_words", {{"relation", "at least"}, {"num_words", 3}})};
  CHECK(score_if(three, "the sun rises").score == 1);
  CHECK(score_if(three, "the sun, rises").score == 0);
  CHECK(score_if({spec("punctuation:no_comma")}, "").score == 1);
  CHECK(score_if(three, "the sun rises").trail["checks"].size() == 3);
  CHECK_THROWS_AS(score_if({}, "x"), ValidationError);
}

TEST_CASE("monotonicity and strictness properties") {
  const std::vector<InstructionSpec> pool = {
      spec("punctuation:no_comma"),
      spec("startend:quotation"),
      spec("keywords:existence", {{"keywords", {"alpha"}}}),
      spec("keywords:forbidden_words", {{"forbidden_words", {"beta"}}}),
      spec("length_constraints:number_words", {{"relation", "less than"}, {"num_words", 8}}),
      spec("length_constraints:number_sentences", {{"relation", "at least"}, {"num_sentences", 2}}),
      spec("detectable_format:number_bullet_lists", {{"num_bullets", 1}}),
      spec("detectable_format:title"),
      spec("detectable_content:postscript", {{"postscript_marker", "P.S."}}),
  };
  const std::vector<std::string> texts = {"\"alpha. beta!\"", "<<T>>\n* alpha. gamma.\nP.S. x", "alpha, beta", "",
                                          "\"- alpha. one. two\""};
  Rng rng(11);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<InstructionSpec> specs;
    const auto n = 1 + rng.below(4);
    for (std::size_t i = 0; i < n; ++i) specs.push_back(pool[rng.below(pool.size())]);
    const auto& text = texts[rng.below(texts.size())];
    const double before = score_if(specs, text).score;
    specs.push_back(pool[rng.below(pool.size())]);
    const double after = score_if(specs, text).score;
    CHECK(after <= before);
    CHECK(score_if(specs, text).score == after);
  }

  // Strictness: a fenced copy is judged literally, so wrapping flips these verdicts.
  const std::string reply = "\"short quoted reply\"";
  const std::string fenced = "```\n" + reply + "\n```";
  CHECK(validate_one(spec("startend:quotation"), reply));
  CHECK_FALSE(validate_one(spec("startend:quotation"), fenced));
  CHECK(validate_one(spec("detectable_format:number_bullet_lists", {{"num_bullets", 0}}), "plain"));
  CHECK(validate_one(spec("length_constraints:number_words", {{"relation", "less than"}, {"num_words", 4}}), reply));
  CHECK_FALSE(validate_one(spec("length_constraints:number_words", {{"relation", "less than"}, {"num_words", 4}}), fenced));
}

TEST_CASE("word counts agree with a brute-force split") {
  Rng rng(3);
  const std::string alphabet = "ab \n\t.,!";
  for (int i = 0; i < 500; ++i) {
    std::string s;
    const auto len = rng.below(40);
    for (std::size_t k = 0; k < len; ++k) s += alphabet[rng.below(alphabet.size())];
    CHECK(count_words(s) == oracle_words(s));
  }
  CHECK(count_sentences("") == 0);
  CHECK(count_sentences("No terminator") == 1);
  CHECK(count_sentences("A. B.") == 2);
  CHECK(count_sentences("Wait... what?!") == 2);
}

TEST_CASE("judge arithmetic") {
  CHECK(final_score({4, 5, 3, 5}) == doctest::Approx(0.8).epsilon(1e-12));
  CHECK(final_score({0, 0, 0, 5}) == 0.0);
  CHECK(final_score({5, 5, 5, 5}) == 1.0);
  CHECK_THROWS_AS(final_score({6, 0, 0, 5}), ValidationError);
  CHECK_THROWS_AS(final_score({1, -0.1, 0, 5}), ValidationError);

  Rng rng(5);
  for (int i = 0; i < 200; ++i) {
    JudgeScores s{5 * rng.uniform01(), 5 * rng.uniform01(), 5 * rng.uniform01(), 5};
    const double f = final_score(s);
    CHECK(f >= 0.0);
    CHECK(f <= 1.0);
    CHECK(final_score({s.coherence, s.helpfulness, s.correctness, 5}) == doctest::Approx(f).epsilon(1e-12));
    JudgeScores up = s;
    up.correctness = std::min(5.0, s.correctness + 0.5);
    CHECK(final_score(up) >= f);
  }
}

TEST_CASE("score_judge with mock and failing clients") {
  MockJudge fixed([](const std::string&, const std::string&) { return JudgeScores{4, 5, 3, 5}; });
  const auto o = score_judge("q", "r", fixed);
  CHECK(o.scored);
  CHECK(o.score == doctest::Approx(0.8));
  CHECK(o.trail["helpfulness"] == 4.0);

  MockJudge hashed;
  CHECK(score_judge("q", "r", hashed).score == score_judge("q", "r", hashed).score);

  MockJudge failing([](const std::string&, const std::string&) -> JudgeScores { throw TransportError("down"); });
  CHECK_FALSE(score_judge("q", "r", failing).scored);

  MockJudge wild([](const std::string&, const std::string&) { return JudgeScores{9, 0, 0, 5}; });
  CHECK_THROWS_AS(score_judge("q", "r", wild), ValidationError);

  CHECK(render_judge_prompt("Q={{query}} R={{response}} {{x}}", "a", "b") == "Q=a R=b {{x}}");
}

TEST_CASE("remote judge and executor over http") {
  httplib::Server server;
  LocalExecutor local;
  server.Post("/judge", [](const httplib::Request& req, httplib::Response& res) {
    const auto body = Json::parse(req.body);
    const double h = body["prompt"].get<std::string>().find("good") != std::string::npos ? 5.0 : 1.0;
    res.set_content(Json{{"helpfulness", h}, {"correctness", 4.0}, {"coherence", 3.0}}.dump(), "application/json");
  });
  server.Post("/execute", [&](const httplib::Request& req, httplib::Response& res) {
    res.set_content(handle_execute_request(Json::parse(req.body), local).dump(), "application/json");
  });
  const int port = server.bind_to_any_port("127.0.0.1");
  std::thread th([&] { server.listen_after_bind(); });
  server.wait_until_ready();
  const std::string endpoint = "http://127.0.0.1:" + std::to_string(port);

  HttpJudge judge(endpoint, "Rate: {{response}}");
  CHECK(score_judge("q", "a good answer", judge).score == doctest::Approx(12.0 / 15.0));
  RemoteExecutor remote(endpoint);
  const auto recs = remote.execute({CodeLanguage::python, "print(input()[::-1])"}, {std::string("abc\n")}, {});
  CHECK(recs.at(0).stdout_text == "cba\n");

  server.stop();
  th.join();

  HttpJudge dead(endpoint, "x");
  CHECK_FALSE(score_judge("q", "r", dead).scored);
  RemoteExecutor gone(endpoint);
  CHECK_THROWS_AS(gone.execute({CodeLanguage::python, "print(1)"}, {std::nullopt}, {}), TransportError);
}
