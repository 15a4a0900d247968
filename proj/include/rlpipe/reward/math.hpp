// Copyright (c) 2026, The rlpipe Authors
// SPDX-License-Identifier: Apache-2.0
//
// Math answer verification: last-\boxed extraction and equivalence of two
// answers after canonicalization.
//
// Canonicalization runs a fixed pipeline:
//   1. strip \left/\right, thin spaces, \text{} wrappers and whitespace;
//   2. \frac{a}{b}, \dfrac, \tfrac -> ((a)/(b)); \sqrt{a} -> sqrt(a);
//   3. exact rational evaluation (integers, decimals, fractions, percent);
//   4. {..} -> set, (..,..) -> tuple, [..,..] -> interval;
//   5. otherwise the case-folded cleaned string.
// Decimals are converted exactly; there is no epsilon comparison.

#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "rlpipe/core/types.hpp"

namespace rlpipe::reward {

enum class MathReason { match, mismatch, no_boxed, unparseable };

std::string_view to_string(MathReason r);

struct BoxedExtraction {
  std::optional<std::string> content;
  // no_boxed when absent, unparseable when the last \boxed is unbalanced,
  // match otherwise (meaning "found").
  MathReason status = MathReason::no_boxed;
};

// Contents of the last \boxed{...} (nested braces allowed).
std::optional<std::string> extract_boxed(std::string_view text);
BoxedExtraction extract_boxed_detailed(std::string_view text);

struct CanonicalForm {
  enum class Kind { rational, set, tuple, interval, symbolic, unparseable };
  Kind kind = Kind::unparseable;
  // Structural key; two forms are equivalent iff their keys are equal.
  std::string key;
  std::vector<CanonicalForm> elements;

  bool parseable() const { return kind != Kind::unparseable; }
  friend bool operator==(const CanonicalForm& a, const CanonicalForm& b) { return a.key == b.key; }
};

CanonicalForm normalize(std::string_view expr);

struct MathVerdict {
  int score = 0;
  std::optional<std::string> extracted;
  std::pair<std::string, std::string> normalized_pair;
  MathReason reason = MathReason::mismatch;
};

MathVerdict check_equivalence(std::string_view candidate, std::string_view reference);

// Boxed answer from the <answer> block (whole text when absent) checked
// against the ground truth.
RewardOutcome score_math(const Response& response, const MathGroundTruth& gt);

}  // namespace rlpipe::reward
