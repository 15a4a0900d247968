// Copyright (c) 2026, The rlpipe Authors
// SPDX-License-Identifier: Apache-2.0
//
// Process-isolated program execution. Each run gets a fresh working
// directory, a private network namespace when the kernel allows one,
// rlimits for CPU, address space and file size, and a wall-clock deadline
// enforced by killing the whole process group.

#pragma once

#include <cstddef>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "rlpipe/core/types.hpp"

namespace rlpipe::reward {

struct ResourceLimits {
  double wall_seconds = 5.0;
  double cpu_seconds = 5.0;
  std::size_t memory_bytes = 256u << 20;
  std::size_t output_bytes = 8u << 20;
};

Json to_json(const ResourceLimits& l);
ResourceLimits limits_from_json(const Json& j, ResourceLimits defaults = {});

enum class ExecStatus { ok, nonzero_exit, timeout, memory_limit, output_limit, signaled, compile_error };

std::string_view to_string(ExecStatus s);
ExecStatus parse_exec_status(std::string_view s);

struct ExecutionRecord {
  ExecStatus status = ExecStatus::ok;
  std::string stdout_text;
  std::string stderr_text;
  int exit_code = -1;
  int term_signal = 0;
  double wall_seconds = 0.0;
  double cpu_seconds = 0.0;
  long max_rss_kb = 0;
  bool network_isolated = false;
};

Json to_json(const ExecutionRecord& r);
ExecutionRecord execution_record_from_json(const Json& j);

struct ProgramSource {
  CodeLanguage language = CodeLanguage::python;
  std::string source;
};

Json to_json(const ProgramSource& p);
ProgramSource program_from_json(const Json& j);

struct SandboxOptions {
  std::filesystem::path work_root = std::filesystem::temp_directory_path();
  std::string python = "python3";
  std::string cxx = "g++";
  std::vector<std::string> cxx_flags = {"-O2", "-std=c++17", "-pipe"};
  ResourceLimits compile_limits{60.0, 60.0, std::size_t{2} << 30, 1u << 20};
  // Bytes of stderr retained per run; the rest is discarded, not fatal.
  std::size_t stderr_bytes = 64u << 10;
};

// A program materialized on disk (and compiled, for C++). Removes its
// directory on destruction.
class PreparedProgram {
 public:
  ~PreparedProgram();
  PreparedProgram(const PreparedProgram&) = delete;
  PreparedProgram& operator=(const PreparedProgram&) = delete;

  // Set when compilation failed; run() then returns this record.
  const std::optional<ExecutionRecord>& compile_failure() const { return compile_failure_; }

  ExecutionRecord run(const std::optional<std::string>& stdin_text, const ResourceLimits& limits) const;

 private:
  friend class Sandbox;
  PreparedProgram() = default;

  SandboxOptions options_;
  std::filesystem::path dir_;
  std::vector<std::string> argv_;
  std::optional<ExecutionRecord> compile_failure_;
  mutable std::size_t runs_ = 0;
};

class Sandbox {
 public:
  explicit Sandbox(SandboxOptions options = {});

  // Throws EnvironmentError when the language toolchain is missing.
  std::unique_ptr<PreparedProgram> prepare(const ProgramSource& program) const;

  const SandboxOptions& options() const { return options_; }

 private:
  SandboxOptions options_;
};

// One-shot convenience: prepare + run.
ExecutionRecord run_sandboxed(const ProgramSource& program, const std::optional<std::string>& stdin_text,
                              const ResourceLimits& limits, const SandboxOptions& options = {});

// Absolute path of an executable found on PATH, if any.
std::optional<std::filesystem::path> find_executable(const std::string& name);

}  // namespace rlpipe::reward
