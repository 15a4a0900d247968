// Copyright (c) 2026, The rlpipe Authors
// SPDX-License-Identifier: Apache-2.0
//
// Code reward: pull the last fenced block in the hinted language out of a
// response, run it against method-call or stdio cases, and pay 1 only when
// every case passes.
//
// Method-call cases are compiled into a single harness program. Each case
// prints a sentinel line "@@<nonce> <index> <status>" on completion, so a
// crash or timeout part-way through still attributes the earlier results.

#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rlpipe/core/types.hpp"
#include "rlpipe/reward/executor.hpp"
#include "rlpipe/reward/sandbox.hpp"

namespace rlpipe::reward {

// Contents of the last fenced block whose info string names `hint`
// (python/py/python3, cpp/c++/cxx/cc). None when no block matches or when
// the text ends inside an open fence.
std::optional<std::string> extract_code(std::string_view text, CodeLanguage hint);

enum class CaseStatus { pass, fail, timeout, runtime_error, compile_error };

std::string_view to_string(CaseStatus s);
CaseStatus parse_case_status(std::string_view s);

struct CaseResult {
  std::size_t case_index = 0;
  CaseStatus status = CaseStatus::fail;
  std::string detail;
};

struct SandboxResult {
  std::vector<CaseResult> per_case;
  double wall_seconds = 0.0;
  int score = 0;

  bool all_pass() const;
};

// Literal encoders. Python accepts any JSON value; C++ returns none when the
// value has no faithful static type (null, mixed-type arrays, ...).
std::string encode_python_literal(const Json& value);

struct CppLiteral {
  std::string type;
  std::string expr;
};
std::optional<CppLiteral> encode_cpp_literal(const Json& value);

struct Harness {
  ProgramSource program;
  std::string nonce;
  // Indices (into the case list) that made it into the program.
  std::vector<std::size_t> included;
  // Indices rejected because a literal could not be encoded.
  std::vector<std::size_t> unrepresentable;
};

// Throws ValidationError on an empty case list or an invalid function name.
Harness build_method_call_harness(const std::string& code, const std::vector<MethodCallCase>& cases,
                                  CodeLanguage language);

// Maps each case's sentinel (last one wins) onto a status. Cases without a
// sentinel take their status from how the process ended.
std::vector<CaseResult> parse_harness_output(const Harness& harness, const ExecutionRecord& record,
                                             std::size_t case_count);

// Per-line trailing whitespace trimmed, trailing blank lines dropped.
std::string normalize_stdout(std::string_view text);

// Throws ValidationError on empty tests; EnvironmentError and TransportError
// from the executor propagate.
SandboxResult run_code_tests(const std::string& code, const CodeTests& tests, const ResourceLimits& limits,
                             Executor& executor);

// Reward channel "code". Executor environment or transport failures give an
// unscored outcome instead of a zero.
RewardOutcome score_code(const Response& response, const CodeTests& tests, const ResourceLimits& limits,
                         Executor& executor);

}  // namespace rlpipe::reward
