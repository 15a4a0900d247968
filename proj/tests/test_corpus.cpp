// Copyright (c) 2026, The rlpipe Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <algorithm>
#include <cctype>
#include <set>

#include "rlpipe/core/errors.hpp"
#include "rlpipe/core/json_io.hpp"
#include "rlpipe/core/rng.hpp"
#include "rlpipe/corpus/dedup.hpp"
#include "rlpipe/corpus/filters.hpp"
#include "rlpipe/corpus/ground_truth.hpp"
#include "rlpipe/corpus/pipeline.hpp"
#include "rlpipe/corpus/ppl.hpp"

using namespace rlpipe;
using namespace rlpipe::corpus;

namespace {

Query make_query(std::string id, std::string text, Category cat = Category::general_chat, VerificationPayload v = {}) {
  Query q;
  q.id = std::move(id);
  q.category = cat;
  q.turns = {Turn{Role::user, std::move(text)}};
  q.verification = std::move(v);
  return q;
}

Query math_query(std::string id, std::string text, std::string gt) {
  return make_query(std::move(id), std::move(text), Category::math, MathGroundTruth{std::move(gt)});
}

// Oracle: plain std::string shingle sets, no hashing.
std::string oracle_normalize(const std::string& s) {
  std::string out;
  for (unsigned char c : s) {
    if (std::ispunct(c)) continue;
    out += static_cast<char>(std::isspace(c) ? ' ' : std::tolower(c));
  }
  std::string collapsed;
  for (char c : out) {
    if (c == ' ' && (collapsed.empty() || collapsed.back() == ' ')) continue;
    collapsed += c;
  }
  while (!collapsed.empty() && collapsed.back() == ' ') collapsed.pop_back();
  return collapsed;
}

double oracle_jaccard(const std::string& a_raw, const std::string& b_raw) {
  const auto a = oracle_normalize(a_raw), b = oracle_normalize(b_raw);
  auto shingles = [](const std::string& s) {
    std::set<std::string> out;
    if (s.size() < 5) {
      if (!s.empty()) out.insert(s);
    } else {
      for (std::size_t i = 0; i + 5 <= s.size(); ++i) out.insert(s.substr(i, 5));
    }
    return out;
  };
  const auto sa = shingles(a), sb = shingles(b);
  if (sa.empty() && sb.empty()) return 1.0;
  std::size_t inter = 0;
  for (const auto& x : sa) inter += sb.count(x);
  return static_cast<double>(inter) / static_cast<double>(sa.size() + sb.size() - inter);
}

std::string random_sentence(Rng& rng, std::size_t words) {
  static const char* vocab[] = {"triangle", "area",  "compute", "integer", "sum",    "prime", "circle", "radius",
                                "find",     "value", "number",  "the",     "of",     "a",     "is",     "what",
                                "square",   "root",  "digits",  "between", "angles", "ratio", "line",   "point"};
  std::string s;
  for (std::size_t i = 0; i < words; ++i) {
    if (i) s += ' ';
    s += vocab[rng.below(std::size(vocab))];
  }
  return s;
}

}  // namespace

TEST_CASE("url filter") {
  CHECK(filter_url(make_query("a", "Prove via https://example.com/lemma")).drop == FilterReason::url);
  CHECK(filter_url(make_query("b", "What is 2+2?")).keep());
  CHECK(filter_url(make_query("c", "see www.acme.org for context")).drop == FilterReason::url);
  CHECK(filter_url(make_query("d", "grab it from ftp://mirror.host/pkg")).drop == FilterReason::url);
  CHECK(filter_url(make_query("e", "the www is big; e.g. x.y")).keep());
  Query assistant_only = make_query("f", "plain");
  assistant_only.turns.push_back({Role::assistant, "http://a.b"});
  CHECK(filter_url(assistant_only).keep());
}

TEST_CASE("image-reference filter on the hand-labeled fixture") {
  const auto items = read_json_file(RLPIPE_TEST_DATA "/image_ref_fixture.json");
  REQUIRE(items.size() == 50);
  std::size_t agree = 0;
  for (const auto& it : items) {
    const auto text = it["text"].get<std::string>();
    const bool got = !filter_image_ref(make_query("x", text)).keep();
    CHECK_MESSAGE(got == it["references_image"].get<bool>(), text);
    agree += got == it["references_image"].get<bool>();
  }
  CHECK(agree == 50);
  CHECK(filter_image_ref(make_query("y", "Describe an image-processing algorithm")).keep());
  ImageLexicon custom{{"the chart"}, false};
  CHECK(references_image("See the chart.", custom));
  CHECK_FALSE(references_image("![x](y.png)", custom));
}

TEST_CASE("shingle jaccard matches the string oracle") {
  Rng rng(21);
  for (int i = 0; i < 200; ++i) {
    std::string a = random_sentence(rng, 3 + rng.below(12));
    std::string b = rng.below(2) ? a : random_sentence(rng, 3 + rng.below(12));
    if (rng.below(2)) b += " " + random_sentence(rng, 1 + rng.below(3));
    const double got = jaccard(shingle_hashes(normalize_for_match(a)), shingle_hashes(normalize_for_match(b)));
    CHECK(got == doctest::Approx(oracle_jaccard(a, b)).epsilon(1e-12));
  }
}

TEST_CASE("minhash estimate tracks exact jaccard") {
  MinHasher h;
  Rng rng(8);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const auto base = random_sentence(rng, 30);
    const auto other = base + " " + random_sentence(rng, rng.below(30));
    const auto fa = fingerprint(base, h), fb = fingerprint(other, h);
    worst = std::max(worst, std::abs(h.estimate(fa.signature, fb.signature) - jaccard(fa.shingles, fb.shingles)));
  }
  // 128 permutations: standard error is at most 0.045.
  CHECK(worst < kMinHashSlack);
}

TEST_CASE("decontamination examples and properties") {
  const std::string eval_text =
      "A rectangle has a length of 12 meters and a width of 7 meters. What is the area of the rectangle in square meters?";
  const std::vector<Query> eval = {make_query("e0", eval_text)};
  const std::string one_changed =
      "A rectangle has a length of 12 meters and a width of 9 meters. What is the area of the rectangle in square meters?";
  REQUIRE(oracle_jaccard(one_changed, eval_text) >= 0.8);
  const std::vector<Query> corpus = {make_query("c0", "a RECTANGLE has a length of 12 meters and a width of 7 meters what "
                                                      "is the area of the rectangle in square meters"),
                                     make_query("c1", "zzzz qqqq"), make_query("c2", one_changed)};
  const auto r = decontaminate(corpus, eval, 0.8);
  CHECK(r.matches[0].verdict.drop == FilterReason::contaminated);
  CHECK(r.matches[0].similarity == 1.0);
  CHECK(r.matches[1].verdict.keep());
  CHECK(r.matches[2].verdict.drop == FilterReason::contaminated);

  CHECK(decontaminate(corpus, {}, 0.8).empty_eval_warning);
  CHECK(decontaminate(corpus, {}, 0.8).matches[0].verdict.keep());
  CHECK_THROWS_AS(decontaminate(corpus, eval, 0.0), ValidationError);
  CHECK_THROWS_AS(decontaminate(corpus, eval, 1.5), ValidationError);

  // Exact drops survive at threshold 1 (normalized-identical means Jaccard 1).
  const auto strict = decontaminate(corpus, eval, 1.0);
  CHECK(strict.matches[0].verdict.drop == FilterReason::contaminated);

  // Against the brute-force oracle on random pairs.
  Rng rng(4);
  std::vector<Query> evals, items;
  for (int i = 0; i < 30; ++i) evals.push_back(make_query("e" + std::to_string(i), random_sentence(rng, 25)));
  for (int i = 0; i < 120; ++i) {
    const auto& src = evals[rng.below(evals.size())].turns[0].text;
    std::string t = rng.below(3) == 0 ? random_sentence(rng, 25) : src + " " + random_sentence(rng, rng.below(8));
    items.push_back(make_query("c" + std::to_string(i), t));
  }
  const auto got = decontaminate(items, evals, 0.85);
  for (std::size_t i = 0; i < items.size(); ++i) {
    double best = 0.0;
    for (const auto& e : evals) best = std::max(best, oracle_jaccard(items[i].turns[0].text, e.turns[0].text));
    CHECK((best >= 0.85) == !got.matches[i].verdict.keep());
  }
}

TEST_CASE("intra-corpus dedup agrees with a brute-force oracle") {
  Rng rng(12);
  std::vector<Query> items;
  std::vector<std::string> roots;
  for (int i = 0; i < 20; ++i) roots.push_back(random_sentence(rng, 20));
  for (int i = 0; i < 150; ++i) {
    const auto& root = roots[rng.below(roots.size())];
    std::string t;
    switch (rng.below(4)) {
      case 0: t = root; break;
      case 1: t = "  " + root + "!!"; break;
      case 2: t = root + " " + random_sentence(rng, 1 + rng.below(4)); break;
      default: t = random_sentence(rng, 20); break;
    }
    items.push_back(make_query("q" + std::to_string(i), t));
  }
  const auto got = deduplicate(items, 0.85);
  std::vector<std::size_t> reps;
  for (std::size_t i = 0; i < items.size(); ++i) {
    const auto& t = items[i].turns[0].text;
    std::optional<FilterReason> expect;
    for (auto r : reps) {
      if (oracle_normalize(items[r].turns[0].text) == oracle_normalize(t)) expect = FilterReason::exact_dup;
    }
    if (!expect) {
      for (auto r : reps) {
        if (oracle_jaccard(items[r].turns[0].text, t) >= 0.85) expect = FilterReason::near_dup;
      }
    }
    if (!expect) reps.push_back(i);
    CHECK_MESSAGE(got[i].verdict.drop == expect, t);
  }
}

TEST_CASE("math suitability") {
  CHECK(classify_math_suitability(math_query("p", "Prove that the sum of two odd numbers is even.", "")).reason ==
        FilterReason::proof);
  CHECK(classify_math_suitability(math_query("p2", "Show that x = 3 and find the value of y.", "1")).kind ==
        MathSuitability::Kind::ok);
  CHECK(classify_math_suitability(math_query("m", "(a) find x (b) find y", "1")).reason == FilterReason::multi_subquestion);
  CHECK(classify_math_suitability(math_query("m2", "Let n = 5.\n(i) Compute n!\n(ii) Compute 2^n", "1")).reason ==
        FilterReason::multi_subquestion);

  const auto mcq = classify_math_suitability(math_query("c", "Which is prime? (A) 4 (B) 7 (C) 9 (D) 15", "B"));
  REQUIRE(mcq.kind == MathSuitability::Kind::rewrite_mcq);
  CHECK(mcq.rewritten_answer == "7");
  CHECK(mcq.rewritten_text == "Which is prime? Answer with the value.");
  CHECK(mcq.options.size() == 4);

  const auto by_value = classify_math_suitability(math_query("c2", "Compute 1/2 + 1/4.\nA. 1/4\nB. 3/4\nC. 1\nD. 2", "0.75"));
  REQUIRE(by_value.kind == MathSuitability::Kind::rewrite_mcq);
  CHECK(by_value.rewritten_answer == "3/4");

  CHECK(classify_math_suitability(math_query("u", "Pick one (A) (B) 7 (C) 9 (D) 15", "B")).reason ==
        FilterReason::mcq_unparseable);
  CHECK(classify_math_suitability(math_query("u2", "Pick one (A) 4 (B) 7 (C) 9 (D) 15", "E")).reason ==
        FilterReason::mcq_unparseable);
  // The rewritten text classifies as ok, so rewriting is idempotent.
  CHECK(classify_math_suitability(math_query("r", mcq.rewritten_text, mcq.rewritten_answer)).kind ==
        MathSuitability::Kind::ok);
}

TEST_CASE("response filter") {
  ResponseFilterConfig cfg;
  cfg.ngram_n = 2;
  cfg.min_repeats = 3;
  auto rep = make_response("q", 0, "<think>hmm</think><answer>so the answer the answer the answer ...</answer>");
  CHECK(filter_response(rep, cfg).drop == FilterReason::ngram_repeat);

  ResponseFilterConfig def;
  def.ppl_threshold = 20.0;
  auto good = make_response("q", 1, "<think>reasoning</think> <answer>42</answer>");
  good.ppl_score = 3.1;
  CHECK(filter_response(good, def).keep());
  good.ppl_score = 25.0;
  CHECK(filter_response(good, def).drop == FilterReason::ppl);

  CHECK(filter_response(make_response("q", 2, "<think>x</think><answer>42"), def).drop == FilterReason::structure);
  CHECK(filter_response(make_response("q", 3, "<answer>1</answer><think>x</think>"), def).drop == FilterReason::structure);
  CHECK(filter_response(make_response("q", 4, "<think>a</think><think>b</think><answer>1</answer>"), def).drop ==
        FilterReason::structure);
  auto multi = make_response("q", 5, "<think>a</think><answer>1</answer>");
  multi.turns = {{Role::user, "hi"}, {Role::assistant, "x"}, {Role::user, "again"}};
  CHECK(filter_response(multi, def).drop == FilterReason::structure);

  // Period longer than n: "a b c" x3 with n=2 is a repeated phrase.
  const auto toks = tokenize("a b c a b c a b c");
  CHECK(has_consecutive_repeat(toks, 2, 3));
  CHECK_FALSE(has_consecutive_repeat(toks, 4, 2));
  CHECK_FALSE(has_consecutive_repeat(tokenize("a b a c a b"), 2, 2));
  CHECK_THROWS_AS(filter_response(good, ResponseFilterConfig{50.0, 1, 2, 512}), ValidationError);

  // Keep implies exactly one think and one answer in order.
  Rng rng(2);
  const char* parts[] = {"<think>", "</think>", "<answer>", "</answer>", "x ", "y "};
  for (int i = 0; i < 500; ++i) {
    std::string t;
    for (std::size_t k = 0, n = rng.below(9); k < n; ++k) t += parts[rng.below(6)];
    const auto r = make_response("q", 0, t);
    if (filter_response(r, def).keep()) {
      const auto b = parse_response_blocks(t);
      CHECK(b.well_formed());
    }
  }
}

TEST_CASE("pass rate") {
  auto outcomes = [](std::vector<int> scores) {
    std::vector<RewardOutcome> o;
    for (int s : scores) o.push_back(RewardOutcome{"q", 0, "math", true, static_cast<double>(s)});
    return o;
  };
  std::vector<int> sixteen(16, 0);
  std::fill(sixteen.begin(), sixteen.begin() + 4, 1);
  CHECK(compute_pass_rate(outcomes(sixteen)) == PassRate{1, 4});
  CHECK(compute_pass_rate(outcomes({1, 1, 1})).is_one());
  CHECK(compute_pass_rate(outcomes({1, 0, 1, 0, 0, 0, 0, 0})) == PassRate{1, 4});
  CHECK(compute_pass_rate(outcomes({0, 0})).is_zero());
  CHECK_THROWS_AS(compute_pass_rate(std::vector<RewardOutcome>{}), ValidationError);
  auto mixed = outcomes({1, 0});
  mixed.push_back(RewardOutcome{"q", 2, "code", false, 0.0});
  CHECK(compute_pass_rate(mixed) == PassRate{1, 2});

  Query q = math_query("q", "x", "1");
  compute_pass_rate(q, outcomes({1, 0, 0, 0}));
  REQUIRE(q.pass_rate);
  CHECK(q.pass_rate->passed == 1);
  CHECK(q.pass_rate->total == 4);

  Rng rng(6);
  for (int i = 0; i < 200; ++i) {
    std::vector<int> s(1 + rng.below(20));
    for (auto& x : s) x = static_cast<int>(rng.below(2));
    const auto pr = compute_pass_rate(outcomes(s));
    CHECK(pr.value() >= 0.0);
    CHECK(pr.value() <= 1.0);
    CHECK(pr.is_one() == std::all_of(s.begin(), s.end(), [](int x) { return x == 1; }));
    CHECK(pr.is_zero() == std::all_of(s.begin(), s.end(), [](int x) { return x == 0; }));
  }
}

TEST_CASE("ground-truth verification") {
  auto scripted = [](std::vector<std::string> answers) {
    return MockOracle([answers](const std::string&, int i) { return answers[static_cast<std::size_t>(i) % answers.size()]; });
  };
  auto p1 = scripted({"0.5", "0.5", "1/2"});
  auto s1 = scripted({"9"});
  const auto confirmed = verify_ground_truth(math_query("a", "half?", "1/2"), p1, s1, 3);
  CHECK(confirmed.kind == GroundTruthDecision::Kind::confirmed);
  CHECK(confirmed.common_votes == 3);

  auto p2 = scripted({"5", "\\boxed{5}", "7"});
  auto s2 = scripted({"The answer is \\boxed{5}"});
  Query q = math_query("b", "q", "7");
  const auto revised = verify_ground_truth(q, p2, s2, 3);
  CHECK(revised.kind == GroundTruthDecision::Kind::revised);
  CHECK(revised.new_answer == "5");
  apply_decision(q, revised);
  CHECK(std::get<MathGroundTruth>(q.verification).answer == "5");
  CHECK(q.status == QueryStatus::rewritten);

  auto s3 = scripted({"6"});
  const auto unresolved = verify_ground_truth(math_query("c", "q", "7"), p2, s3, 3);
  CHECK(unresolved.kind == GroundTruthDecision::Kind::unresolved);

  // Ties go to the class seen first.
  CHECK(most_common_answer({"3", "4", "4", "3"}).first == 0);
  CHECK(most_common_answer({"3", "4", "2/4", "0.5"}).first == 2);

  MockOracle down([](const std::string&, int) -> std::string { throw TransportError("oracle down"); });
  Query untouched = math_query("d", "q", "7");
  CHECK_THROWS_AS(verify_ground_truth(untouched, down, s1, 2), TransportError);
  std::vector<Query> qs = {untouched};
  const auto rows = verify_corpus_ground_truth(qs, down, s1, 2);
  CHECK(rows.at(0).verdict == "error");
  CHECK(std::get<MathGroundTruth>(qs[0].verification).answer == "7");
  CHECK_THROWS_AS(verify_ground_truth(make_query("e", "chat"), p1, s1, 3), ValidationError);
}

TEST_CASE("clarity filter needs an oracle") {
  MockOracle says_no([](const std::string&, int) { return "No."; });
  MockOracle says_yes([](const std::string&, int) { return "yes"; });
  MockOracle nobody([](const std::string&, int) { return "Nobody knows"; });
  const auto q = make_query("q", "Find it.");
  CHECK(filter_clarity(q, says_no).drop == FilterReason::unclear);
  CHECK(filter_clarity(q, says_yes).keep());
  CHECK(filter_clarity(q, nobody).keep());
  auto no_oracle = filter_queries({q}, {}, QueryFilterConfig{});
  CHECK(no_oracle.queries[0].is_active());
  auto with_oracle = filter_queries({q}, {}, QueryFilterConfig{}, &says_no);
  CHECK(with_oracle.queries[0].filter_reason == FilterReason::unclear);
}

TEST_CASE("pipeline order-insensitivity and idempotence") {
  const std::vector<Query> eval = {make_query("e0", "what is the largest prime factor of 9991 please compute it")};
  std::vector<Query> corpus = {
      make_query("u", "Read https://x.io then solve 2+2"),
      make_query("i", "In the figure, find x"),
      make_query("c", "What is the largest prime factor of 9991? Please compute it."),
      make_query("d1", "Find the number of positive divisors of 360."),
      make_query("d2", "find the number of positive divisors of 360"),
      make_query("ud", "Read https://x.io then solve 2+2!"),
      math_query("p", "Prove that sqrt(2) is irrational.", "x"),
      math_query("m", "(a) find x (b) find y", "1"),
      math_query("mc", "Which is even? (A) 3 (B) 5 (C) 8 (D) 9", "C"),
      math_query("ok", "Compute 6*7.", "42"),
  };
  const QueryFilterConfig base;
  const auto ref = filter_queries(corpus, eval, base);
  auto dropped_ids = [](const QueryFilterResult& r) {
    std::set<std::string> ids;
    for (const auto& q : r.queries) {
      if (!q.is_active()) ids.insert(q.id);
    }
    return ids;
  };
  CHECK(dropped_ids(ref) == std::set<std::string>{"u", "i", "c", "d2", "ud", "p", "m"});

  std::vector<std::string> order = base.stages;
  std::sort(order.begin(), order.end());
  do {
    QueryFilterConfig cfg;
    cfg.stages = order;
    CHECK(dropped_ids(filter_queries(corpus, eval, cfg)) == dropped_ids(ref));
  } while (std::next_permutation(order.begin(), order.end()));

  // Survivors pass a second run untouched.
  std::vector<Query> survivors;
  for (const auto& q : ref.queries) {
    if (q.is_active()) survivors.push_back(q);
  }
  for (auto& q : survivors) q.status = QueryStatus::active;
  const auto again = filter_queries(survivors, eval, base);
  CHECK(dropped_ids(again).empty());
  for (std::size_t k = 0; k < survivors.size(); ++k) {
    CHECK(again.queries[k].turns[0].text == survivors[k].turns[0].text);
  }
  const auto mc = std::find_if(ref.queries.begin(), ref.queries.end(), [](const Query& q) { return q.id == "mc"; });
  CHECK(mc->status == QueryStatus::rewritten);
  CHECK(std::get<MathGroundTruth>(mc->verification).answer == "8");

  // Single filters are idempotent.
  for (const auto& q : corpus) {
    CHECK(filter_url(q) == filter_url(q));
    CHECK(filter_image_ref(q) == filter_image_ref(q));
  }
}

TEST_CASE("response pipeline and surrogate perplexity") {
  CharNgramScorer scorer;
  scorer.train(std::vector<std::string>(20, "<think>we add the numbers</think><answer>the sum is 42</answer>"));
  const double fluent = scorer.perplexity("<think>we add the numbers</think><answer>the sum is 42</answer>");
  const double noise = scorer.perplexity("<think>qzxv jjkw pqpq</think><answer>vvvv zzq</answer>");
  CHECK(fluent < noise);
  CHECK(fluent >= 1.0);

  ResponseFilterConfig cfg;
  cfg.ppl_threshold = (fluent + noise) / 2;
  std::vector<Response> rs = {make_response("q", 0, "<think>we add the numbers</think><answer>the sum is 42</answer>"),
                              make_response("q", 1, "<think>qzxv jjkw pqpq</think><answer>vvvv zzq</answer>"),
                              make_response("q", 2, "no tags")};
  const auto res = filter_responses(rs, cfg, &scorer);
  REQUIRE(res.kept.size() == 1);
  CHECK(res.kept[0].sample_index == 0);
  CHECK(res.report[1].reason == FilterReason::ppl);
  CHECK(res.report[2].reason == FilterReason::structure);
  CHECK(to_json(res.report[2])["reason"] == "structure");

  std::vector<Query> qs = {make_query("q", "x"), make_query("other", "y")};
  std::vector<RewardOutcome> outs = {{"q", 0, "math", true, 1.0}, {"q", 1, "math", true, 0.0}};
  CHECK(assign_pass_rates(qs, outs) == 1);
  CHECK(qs[0].pass_rate == PassRate{1, 2});
  CHECK_FALSE(qs[1].pass_rate.has_value());
}
