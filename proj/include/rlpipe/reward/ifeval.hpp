// Copyright (c) 2026, The rlpipe Authors
// SPDX-License-Identifier: Apache-2.0
//
// Instruction-following checks in strict mode: each validator sees the
// response exactly as written. Nothing is stripped or unwrapped first.

#pragma once

#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "rlpipe/core/errors.hpp"
#include "rlpipe/core/types.hpp"

namespace rlpipe::reward {

// Unknown instruction id or kwargs that do not fit the validator's schema.
class RegistryError : public Error {
 public:
  using Error::Error;
};

struct InstructionSpec {
  std::string instruction_id;
  Json kwargs = Json::object();
};

std::vector<InstructionSpec> specs_from(const Instructions& payload);

using Validator = std::function<bool(const Json& kwargs, std::string_view text)>;

struct ValidatorEntry {
  Validator check;
  // Accepted kwargs keys; null-valued keys outside this list are ignored.
  std::vector<std::string> keys;
};

class InstructionRegistry {
 public:
  // Registry preloaded with the built-in validators.
  static const InstructionRegistry& builtin();

  void add(std::string id, ValidatorEntry entry);
  bool contains(std::string_view id) const;
  std::vector<std::string> ids() const;

  // Throws RegistryError for unknown ids or schema violations.
  bool validate_one(const InstructionSpec& spec, std::string_view text) const;

 private:
  std::vector<std::pair<std::string, ValidatorEntry>> entries_;
};

// Helpers shared with tests: words are maximal non-whitespace runs;
// sentences end at [.!?] followed by whitespace or end of text.
std::size_t count_words(std::string_view text);
std::size_t count_sentences(std::string_view text);

bool validate_one(const InstructionSpec& spec, std::string_view text);

// Reward channel "if". Throws ValidationError on an empty spec list; a
// registry error gives an unscored outcome.
RewardOutcome score_if(const std::vector<InstructionSpec>& specs, std::string_view response_text,
                       const InstructionRegistry& registry = InstructionRegistry::builtin());

}  // namespace rlpipe::reward
