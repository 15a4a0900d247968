// Copyright (c) 2026, The rlpipe Authors
// SPDX-License-Identifier: Apache-2.0
//
// JSON schema for the domain types and JSONL file helpers.

#pragma once

#include <cstdio>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "rlpipe/core/errors.hpp"
#include "rlpipe/core/types.hpp"

namespace rlpipe {

Json to_json(const Query& q);
Json to_json(const Response& r);
Json to_json(const RewardOutcome& o);
Json to_json(const TestCase& tc);
Json to_json(const VerificationPayload& v);

Query query_from_json(const Json& j);
Response response_from_json(const Json& j);
RewardOutcome outcome_from_json(const Json& j);
TestCase test_case_from_json(const Json& j);
VerificationPayload verification_from_json(const Json& j);

struct JsonlError {
  std::size_t line = 0;
  std::string message;
};

struct JsonlRecord {
  std::size_t line = 0;
  Json value;
};

// Reads a JSONL file line by line. Malformed lines are reported through
// `errors` and skipped; with strict=true the first one throws instead.
std::vector<JsonlRecord> read_jsonl(const std::filesystem::path& path, bool strict, std::vector<JsonlError>* errors = nullptr);

// Parses each line with `parse`; parse failures are treated as malformed.
template <typename T>
std::vector<T> read_jsonl_as(const std::filesystem::path& path, bool strict, const std::function<T(const Json&)>& parse,
                             std::vector<JsonlError>* errors = nullptr);

class JsonlWriter {
 public:
  explicit JsonlWriter(const std::filesystem::path& path);
  ~JsonlWriter();
  JsonlWriter(const JsonlWriter&) = delete;
  JsonlWriter& operator=(const JsonlWriter&) = delete;

  void write(const Json& j);
  std::size_t count() const { return count_; }

 private:
  std::FILE* file_ = nullptr;
  std::size_t count_ = 0;
};

void write_json_file(const std::filesystem::path& path, const Json& j);
Json read_json_file(const std::filesystem::path& path);
std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

// ---------------------------------------------------------------------------

template <typename T>
std::vector<T> read_jsonl_as(const std::filesystem::path& path, bool strict, const std::function<T(const Json&)>& parse,
                             std::vector<JsonlError>* errors) {
  std::vector<JsonlError> local;
  auto* sink = errors ? errors : &local;
  std::vector<T> out;
  for (const auto& rec : read_jsonl(path, strict, sink)) {
    try {
      out.push_back(parse(rec.value));
    } catch (const std::exception& e) {
      if (strict) throw ValidationError(path.string() + ":" + std::to_string(rec.line) + ": " + e.what());
      sink->push_back({rec.line, e.what()});
    }
  }
  return out;
}

}  // namespace rlpipe
