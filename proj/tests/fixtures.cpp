// Copyright (c) 2026, The rlpipe Authors
// SPDX-License-Identifier: Apache-2.0

#include "fixtures.hpp"

#include <unistd.h>

#include <cctype>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "rlpipe/core/json_io.hpp"
#include "rlpipe/core/rng.hpp"

namespace rlpipe::testing {

namespace {

// Pseudo-words from consonant-vowel syllables: no English trigger phrase
// (proof wording, image references, question words) can appear by chance.
std::string pseudo_word(Rng& rng) {
  static const char* cons = "bdfgklmnprstvz";
  static const char* vow = "aeiou";
  std::string w;
  const std::size_t syllables = 2 + rng.below(2);
  for (std::size_t s = 0; s < syllables; ++s) {
    w += cons[rng.below(14)];
    w += vow[rng.below(5)];
  }
  return w;
}

std::string words(Rng& rng, std::size_t n) {
  std::string s;
  for (std::size_t i = 0; i < n; ++i) {
    if (i) s += ' ';
    s += pseudo_word(rng);
  }
  return s;
}

Query make(Category c, std::string text, VerificationPayload v = NoVerification{}) {
  Query q;
  q.category = c;
  q.turns = {Turn{Role::user, std::move(text)}};
  q.verification = std::move(v);
  return q;
}

std::string oracle_normalize(const std::string& s) {
  std::string out;
  for (unsigned char c : s) {
    if (std::ispunct(c)) continue;
    out += static_cast<char>(std::isspace(c) ? ' ' : std::tolower(c));
  }
  std::string collapsed;
  for (char c : out) {
    if (c == ' ' && (collapsed.empty() || collapsed.back() == ' ')) continue;
    collapsed += c;
  }
  while (!collapsed.empty() && collapsed.back() == ' ') collapsed.pop_back();
  return collapsed;
}

}  // namespace

double reference_jaccard(const std::string& a_raw, const std::string& b_raw) {
  const auto a = oracle_normalize(a_raw), b = oracle_normalize(b_raw);
  auto shingles = [](const std::string& s) {
    std::set<std::string> out;
    if (s.size() < 5) {
      if (!s.empty()) out.insert(s);
    } else {
      for (std::size_t i = 0; i + 5 <= s.size(); ++i) out.insert(s.substr(i, 5));
    }
    return out;
  };
  const auto sa = shingles(a), sb = shingles(b);
  if (sa.empty() && sb.empty()) return 1.0;
  std::size_t inter = 0;
  for (const auto& x : sa) inter += sb.count(x);
  return static_cast<double>(inter) / static_cast<double>(sa.size() + sb.size() - inter);
}

PlantedCorpus planted_corpus(std::size_t clean, const PlantCounts& counts, std::uint64_t seed) {
  if (counts.near_dup > clean) throw std::invalid_argument("near-dup plants need as many clean originals");
  Rng rng(seed);
  struct Item {
    Query q;
    std::optional<FilterReason> plant;
    // index into items of the copied original, for near-dups
    std::optional<std::size_t> original;
  };
  std::vector<Item> items;

  for (std::size_t k = 0; k < clean; ++k) {
    const std::string text = words(rng, 40) + ".";
    if (k % 2 == 0) {
      items.push_back({make(Category::math, text, MathGroundTruth{std::to_string(k)}), std::nullopt, std::nullopt});
    } else {
      items.push_back({make(Category::general_chat, text), std::nullopt, std::nullopt});
    }
  }

  PlantedCorpus out;
  for (std::size_t k = 0; k < counts.eval_copy + 10; ++k) {
    Query e = make(Category::math, words(rng, 30) + ".", MathGroundTruth{"1"});
    e.id = "eval" + std::to_string(k);
    out.eval.push_back(std::move(e));
  }

  for (std::size_t k = 0; k < counts.url; ++k) {
    const std::string link = k % 2 ? "www.mirror" + std::to_string(k) + ".net/page" : "https://example.org/ref/" + std::to_string(k);
    items.push_back({make(Category::general_chat, words(rng, 20) + " details at " + link + " " + words(rng, 6) + "."),
                     FilterReason::url, std::nullopt});
  }
  static const char* image_phrases[] = {"in the image",  "the picture",   "in the diagram", "figure below",
                                        "the photo",     "graph below",   "attached image", "this picture",
                                        "figure above",  "image below"};
  for (std::size_t k = 0; k < counts.image_ref; ++k) {
    std::string text = words(rng, 15) + " using " + image_phrases[k % 10] + " " + words(rng, 10) + ".";
    if (k == 0) text = words(rng, 15) + " ![plot](plot.png) " + words(rng, 10) + ".";
    items.push_back({make(Category::math, text, MathGroundTruth{"3"}), FilterReason::image_ref, std::nullopt});
  }
  for (std::size_t k = 0; k < counts.eval_copy; ++k) {
    items.push_back({make(Category::math, out.eval[k].user_text(), MathGroundTruth{"2"}), FilterReason::contaminated,
                     std::nullopt});
  }
  for (std::size_t k = 0; k < counts.near_dup; ++k) {
    // Originals are the first near_dup clean items; one word is swapped.
    const std::size_t orig = k;
    std::istringstream in(items[orig].q.user_text());
    std::vector<std::string> toks;
    for (std::string t; in >> t;) toks.push_back(t);
    std::string repl;
    do {
      repl = pseudo_word(rng);
    } while (repl == toks[20]);
    toks[20] = repl;
    std::string text;
    for (const auto& t : toks) text += (text.empty() ? "" : " ") + t;
    if (reference_jaccard(text, items[orig].q.user_text()) < 0.85) throw std::logic_error("near-dup plant too far");
    items.push_back({make(items[orig].q.category, text, items[orig].q.verification), FilterReason::near_dup, orig});
  }
  for (std::size_t k = 0; k < counts.proof; ++k) {
    items.push_back({make(Category::math, "Prove that " + words(rng, 18) + ".", MathGroundTruth{"0"}), FilterReason::proof,
                     std::nullopt});
  }
  for (std::size_t k = 0; k < counts.multi_part; ++k) {
    items.push_back({make(Category::math, words(rng, 8) + " (a) " + words(rng, 8) + "? (b) " + words(rng, 8) + "?",
                          MathGroundTruth{"0"}),
                     FilterReason::multi_subquestion, std::nullopt});
  }

  std::vector<std::size_t> order(items.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  rng.shuffle(std::span<std::size_t>(order));
  std::vector<std::size_t> position(items.size());
  for (std::size_t p = 0; p < order.size(); ++p) position[order[p]] = p;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (items[i].original && position[*items[i].original] > position[i]) {
      std::swap(order[position[i]], order[position[*items[i].original]]);
      std::swap(position[i], position[*items[i].original]);
    }
  }
  for (std::size_t p = 0; p < order.size(); ++p) {
    char id[32];
    std::snprintf(id, sizeof(id), "q%04zu", p);
    items[order[p]].q.id = id;
  }
  for (std::size_t p = 0; p < order.size(); ++p) {
    const auto& it = items[order[p]];
    out.corpus.push_back(it.q);
    if (it.plant) out.plants[it.q.id] = *it.plant;
    if (it.original) out.near_dup_of[it.q.id] = items[*it.original].q.id;
  }
  return out;
}

void write_queries(const std::filesystem::path& path, const std::vector<Query>& qs) {
  JsonlWriter w(path);
  for (const auto& q : qs) w.write(to_json(q));
}

std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("rlpipe_" + name + "_" + std::to_string(::getpid()));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

std::string file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace rlpipe::testing
