// Copyright (c) 2026, The rlpipe Authors
// SPDX-License-Identifier: Apache-2.0
//
// manifest.json, written last into every run directory. It holds what was
// run and on what, keyed by content digests; wall-clock data is left out so
// reruns produce the same bytes.

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "rlpipe/core/types.hpp"

namespace rlpipe::cli {

inline constexpr std::string_view kModuleVersion = "0.1.0";

struct FileDigest {
  std::string path;
  std::string sha256;
};

struct RunManifest {
  std::string command;
  std::string config_hash;
  std::vector<FileDigest> inputs;
  std::uint64_t seed = 0;
  std::optional<int> stage;
  std::string module_version{kModuleVersion};
  // Relative to the run directory, sorted.
  std::vector<FileDigest> outputs;
};

Json to_json(const RunManifest& m);
RunManifest manifest_from_json(const Json& j);

FileDigest digest_input(const std::filesystem::path& path);

// Fills outputs from the given files inside dir and writes manifest.json.
void write_manifest(const std::filesystem::path& dir, RunManifest m, std::vector<std::string> outputs);

// Outputs whose digest no longer matches, or that are missing.
std::vector<std::string> verify_manifest(const std::filesystem::path& dir, const RunManifest& m);

}  // namespace rlpipe::cli
