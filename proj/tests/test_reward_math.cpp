// Copyright (c) 2026, The rlpipe Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "rlpipe/core/rng.hpp"
#include "rlpipe/reward/math.hpp"

using namespace rlpipe;
using namespace rlpipe::reward;

namespace {

// Independent oracle: reduces p/q with plain int64 arithmetic and renders
// the same key shape the normalizer promises for rationals.
std::string oracle_key(std::int64_t p, std::int64_t q) {
  if (q < 0) p = -p, q = -q;
  const std::int64_t g = std::gcd(p < 0 ? -p : p, q);
  p /= g;
  q /= g;
  return "q:" + std::to_string(p) + (q == 1 ? "" : "/" + std::to_string(q));
}

// Decimal string -> (numerator, 10^k) with no floating point involved.
std::pair<std::int64_t, std::int64_t> oracle_decimal(const std::string& s) {
  std::int64_t num = 0, den = 1;
  bool neg = false, frac = false;
  for (char c : s) {
    if (c == '-') neg = true;
    else if (c == '.') frac = true;
    else if (c >= '0' && c <= '9') {
      num = num * 10 + (c - '0');
      if (frac) den *= 10;
    }
  }
  return {neg ? -num : num, den};
}

}  // namespace

TEST_CASE("extract_boxed takes the last balanced group") {
  CHECK(extract_boxed("so \\boxed{42}") == "42");
  CHECK(extract_boxed("first \\boxed{1}, finally \\boxed{\\frac{1}{2}}") == "\\frac{1}{2}");
  CHECK(extract_boxed("\\boxed{f(2)=\\{1,2\\}}") == "f(2)=\\{1,2\\}");
  CHECK_FALSE(extract_boxed("no box here").has_value());
  CHECK(extract_boxed_detailed("no box").status == MathReason::no_boxed);

  const auto unbalanced = extract_boxed_detailed("\\boxed{1} then \\boxed{\\frac{1}{2}");
  CHECK_FALSE(unbalanced.content.has_value());
  CHECK(unbalanced.status == MathReason::unparseable);
  CHECK(extract_boxed("\\boxed{}") == "");
}

TEST_CASE("normalize canonical forms") {
  CHECK(normalize("\\frac{1}{2}").key == "q:1/2");
  CHECK(normalize("\\frac{1}{2}").kind == CanonicalForm::Kind::rational);
  CHECK(normalize(" 0.50 ").key == "q:1/2");
  CHECK(normalize("x+1").kind == CanonicalForm::Kind::symbolic);
  CHECK(normalize("x+1").key == "sym:x+1");
  CHECK(normalize("X + 1").key == "sym:x+1");
  CHECK(normalize("\\dfrac{3}{4}").key == "q:3/4");
  CHECK(normalize("50\\%").key == "q:1/2");
  CHECK(normalize("\\left( 1, 2 \\right)").key == "tuple(q:1,q:2)");
  CHECK(normalize("-\\frac{6}{4}").key == "q:-3/2");
  CHECK(normalize("2^{10}").key == "q:1024");
  CHECK(normalize("\\sqrt{16}").key == "q:4");
  CHECK(normalize("\\text{7 }").key == "q:7");
  CHECK(normalize("$7$.").key == "q:7");
  CHECK(normalize("\\{3,1,2,1\\}").key == "set{q:1,q:2,q:3}");
  CHECK(normalize("[0, \\frac{1}{2})").key == "interval[q:0,q:1/2)");
  CHECK(normalize("").kind == CanonicalForm::Kind::unparseable);
  CHECK(normalize("(1,2").kind == CanonicalForm::Kind::unparseable);
}

TEST_CASE("check_equivalence examples") {
  CHECK(check_equivalence("0.5", "\\frac{1}{2}").score == 1);
  const auto miss = check_equivalence("43", "42");
  CHECK(miss.score == 0);
  CHECK(miss.reason == MathReason::mismatch);
  CHECK(check_equivalence("{1, 2}", "\\{2,1\\}").score == 1);
  CHECK(check_equivalence("(1,2)", "(2,1)").score == 0);
  CHECK(check_equivalence("\\sqrt{2}", "sqrt(2)").score == 1);
  CHECK(check_equivalence("\\sqrt{2}", "1.41421356").score == 0);
  const auto bad = check_equivalence("(1,", "1");
  CHECK(bad.score == 0);
  CHECK(bad.reason == MathReason::unparseable);
}

TEST_CASE("rationals agree with an int64 oracle across representations") {
  Rng rng(7);
  for (int i = 0; i < 400; ++i) {
    const std::int64_t p = static_cast<std::int64_t>(rng.below(2001)) - 1000;
    const std::int64_t q = static_cast<std::int64_t>(rng.below(99)) + 1;
    const std::int64_t k = static_cast<std::int64_t>(rng.below(9)) + 1;
    const std::string expect = oracle_key(p, q);
    const std::string frac = "\\frac{" + std::to_string(p * k) + "}{" + std::to_string(q * k) + "}";
    const std::string slash = std::to_string(p) + "/" + std::to_string(q);
    CHECK(normalize(frac).key == expect);
    CHECK(normalize(slash).key == expect);
    CHECK(check_equivalence(frac, slash).score == 1);
  }
  for (const std::string d : {"0.5", "0.500", "-2.25", "3.125", "10.0", "0.0001"}) {
    const auto [n, den] = oracle_decimal(d);
    CHECK(normalize(d).key == oracle_key(n, den));
  }
}

TEST_CASE("reflexivity, symmetry and binary scores") {
  const std::vector<std::string> pool = {"1/2",      "2/4",           "0.5",     "0.500",      "\\frac{1}{2}", "x+1",
                                         "X+1",      "\\{1,2\\}",     "(1,2)",   "[0,1)",      "\\sqrt{3}",    "43",
                                         "42",       "\\text{north}", "(1,",     "1.5",        "3/2",          "2^3",
                                         "8",        "\\pi",          "2\\pi",   "50\\%",      "\\{2,1\\}",    ""};
  for (const auto& a : pool) {
    if (normalize(a).parseable()) CHECK_MESSAGE(check_equivalence(a, a).score == 1, a);
    for (const auto& b : pool) {
      const auto ab = check_equivalence(a, b);
      const auto ba = check_equivalence(b, a);
      CHECK(ab.score == ba.score);
      CHECK((ab.score == 0 || ab.score == 1));
      if (ab.score == 1) {
        CHECK(ab.reason == MathReason::match);
        CHECK(ab.extracted.has_value());
      }
    }
  }
  for (const auto* r : {"1/2", "2/4", "0.5", "0.500", "\\frac{1}{2}", "50\\%"}) {
    CHECK(check_equivalence(r, "0.5").score == 1);
    CHECK(check_equivalence(r, "0.6").score == 0);
  }
}

TEST_CASE("score_math over responses") {
  const MathGroundTruth seven{"7"};
  auto r = make_response("q1", 0, "<think>t</think><answer>so \\boxed{7}</answer>");
  auto o = score_math(r, seven);
  CHECK(o.score == 1);
  CHECK(o.reason == "match");
  CHECK(o.channel == "math");

  auto none = score_math(make_response("q1", 1, "<think>t</think><answer>seven</answer>"), seven);
  CHECK(none.score == 0);
  CHECK(none.reason == "no_boxed");

  CHECK(score_math(make_response("q1", 2, "\\boxed{14/2}"), seven).score == 1);
  // The answer block wins over boxes in the reasoning.
  CHECK(score_math(make_response("q1", 3, "<think>\\boxed{7}</think><answer>\\boxed{8}</answer>"), seven).score == 0);
}
