// Copyright (c) 2026, The rlpipe Authors
// SPDX-License-Identifier: Apache-2.0
//
// Generated fixtures shared by the CLI and acceptance suites.

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "rlpipe/core/types.hpp"

namespace rlpipe::testing {

struct PlantCounts {
  std::size_t url = 10;
  std::size_t image_ref = 10;
  // Verbatim copies of evaluation items.
  std::size_t eval_copy = 10;
  // Perturbed copies of earlier clean corpus items, Jaccard >= 0.85.
  std::size_t near_dup = 10;
  std::size_t proof = 5;
  std::size_t multi_part = 5;

  std::size_t total() const { return url + image_ref + eval_copy + near_dup + proof + multi_part; }
};

struct PlantedCorpus {
  std::vector<Query> corpus;
  std::vector<Query> eval;
  // planted id -> the reason it must be dropped for
  std::map<std::string, FilterReason> plants;
  // near-dup id -> id of the clean item it copies
  std::map<std::string, std::string> near_dup_of;
};

// `clean` items trip no filter. Plants are spread through the corpus in a
// seeded order; every near-dup comes after its original.
PlantedCorpus planted_corpus(std::size_t clean, const PlantCounts& counts, std::uint64_t seed);

// Reference Jaccard over 5-character shingles of lowercased,
// punctuation-stripped, space-collapsed text. Plain std::set, no hashing.
double reference_jaccard(const std::string& a, const std::string& b);

void write_queries(const std::filesystem::path& path, const std::vector<Query>& qs);

// Fresh, empty directory under the system temp root.
std::filesystem::path scratch_dir(const std::string& name);

std::string file_bytes(const std::filesystem::path& path);

}  // namespace rlpipe::testing
