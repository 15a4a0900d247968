// Copyright (c) 2026, The rlpipe Authors
// SPDX-License-Identifier: Apache-2.0

#include "rlpipe/cli/manifest.hpp"

#include <algorithm>

#include "rlpipe/core/digest.hpp"
#include "rlpipe/core/errors.hpp"
#include "rlpipe/core/json_io.hpp"

namespace rlpipe::cli {

namespace {

Json digests_json(const std::vector<FileDigest>& v) {
  Json a = Json::array();
  for (const auto& d : v) a.push_back({{"path", d.path}, {"sha256", d.sha256}});
  return a;
}

std::vector<FileDigest> digests_from(const Json& a) {
  std::vector<FileDigest> out;
  for (const auto& d : a) out.push_back({d.at("path").get<std::string>(), d.at("sha256").get<std::string>()});
  return out;
}

}  // namespace

Json to_json(const RunManifest& m) {
  return {{"command", m.command},
          {"config_hash", m.config_hash},
          {"inputs", digests_json(m.inputs)},
          {"seed", m.seed},
          {"stage", m.stage ? Json(*m.stage) : Json(nullptr)},
          {"module_version", m.module_version},
          {"outputs", digests_json(m.outputs)}};
}

RunManifest manifest_from_json(const Json& j) {
  RunManifest m;
  try {
    m.command = j.at("command").get<std::string>();
    m.config_hash = j.at("config_hash").get<std::string>();
    m.inputs = digests_from(j.at("inputs"));
    m.seed = j.at("seed").get<std::uint64_t>();
    if (!j.at("stage").is_null()) m.stage = j.at("stage").get<int>();
    m.module_version = j.at("module_version").get<std::string>();
    m.outputs = digests_from(j.at("outputs"));
  } catch (const Json::exception& e) {
    throw ValidationError(std::string("malformed manifest: ") + e.what());
  }
  return m;
}

FileDigest digest_input(const std::filesystem::path& path) {
  if (!std::filesystem::is_regular_file(path)) throw ValidationError("input not found: " + path.string());
  return {path.string(), sha256_file(path)};
}

void write_manifest(const std::filesystem::path& dir, RunManifest m, std::vector<std::string> outputs) {
  std::sort(outputs.begin(), outputs.end());
  m.outputs.clear();
  for (const auto& rel : outputs) m.outputs.push_back({rel, sha256_file(dir / rel)});
  write_json_file(dir / "manifest.json", to_json(m));
}

std::vector<std::string> verify_manifest(const std::filesystem::path& dir, const RunManifest& m) {
  std::vector<std::string> bad;
  for (const auto& o : m.outputs) {
    const auto p = dir / o.path;
    if (!std::filesystem::is_regular_file(p) || sha256_file(p) != o.sha256) bad.push_back(o.path);
  }
  return bad;
}

}  // namespace rlpipe::cli
