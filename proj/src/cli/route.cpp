// Copyright (c) 2026, The rlpipe Authors
// SPDX-License-Identifier: Apache-2.0

#include "rlpipe/cli/route.hpp"

#include <string>

#include "rlpipe/core/errors.hpp"

namespace rlpipe::cli {

std::string_view to_string(Channel c) {
  switch (c) {
    case Channel::math: return "math";
    case Channel::code: return "code";
    case Channel::instruction_follow: return "if";
    case Channel::judge: return "judge";
  }
  return "?";
}

Channel route_for(const Query& q) {
  const auto& v = q.verification;
  if (std::holds_alternative<NoVerification>(v)) return Channel::judge;
  const auto mismatch = [&] {
    return ValidationError("query " + q.id + ": payload does not fit category " + std::string(to_string(q.category)));
  };
  switch (q.category) {
    case Category::math:
    case Category::science:
      if (std::holds_alternative<MathGroundTruth>(v)) return Channel::math;
      throw mismatch();
    case Category::code:
      if (std::holds_alternative<CodeTests>(v)) return Channel::code;
      throw mismatch();
    case Category::instruction_follow:
      if (std::holds_alternative<Instructions>(v)) return Channel::instruction_follow;
      throw mismatch();
    case Category::general_chat:
      throw mismatch();
  }
  throw mismatch();
}

}  // namespace rlpipe::cli
