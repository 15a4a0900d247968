// Copyright (c) 2026, The rlpipe Authors
// SPDX-License-Identifier: Apache-2.0
//
// Reference implementations. Every SIMD variant is tested against these.

#include <algorithm>
#include <limits>

#include "rlpipe/kernels/kernels.hpp"

namespace rlpipe::kernels::scalar {

void minhash_update(std::span<const std::uint32_t> shingle_hashes, std::span<const std::uint32_t> mul,
                    std::span<const std::uint32_t> add, std::span<std::uint32_t> signature) {
  for (std::uint32_t x : shingle_hashes) {
    for (std::size_t k = 0; k < signature.size(); ++k) {
      signature[k] = std::min(signature[k], minhash_permute(x, mul[k], add[k]));
    }
  }
}

std::size_t count_equal(std::span<const std::uint32_t> a, std::span<const std::uint32_t> b) {
  std::size_t n = 0;
  for (std::size_t i = 0; i < a.size(); ++i) n += a[i] == b[i];
  return n;
}

double advance_remaining(std::span<double> remaining, double delta) {
  double lo = std::numeric_limits<double>::infinity();
  for (double& r : remaining) {
    r -= delta;
    lo = std::min(lo, r);
  }
  return lo;
}

Moments masked_moments(std::span<const double> values, std::span<const std::uint8_t> keep) {
  Moments m;
  double sum = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (keep[i]) {
      sum += values[i];
      ++m.count;
    }
  }
  if (m.count == 0) return m;
  m.mean = sum / static_cast<double>(m.count);
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (keep[i]) {
      const double d = values[i] - m.mean;
      m.m2 += d * d;
    }
  }
  return m;
}

void normalize_masked(std::span<const double> values, std::span<const std::uint8_t> keep, double center, double inv_scale,
                      std::span<double> out) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    out[i] = keep[i] ? (values[i] - center) * inv_scale : 0.0;
  }
}

}  // namespace rlpipe::kernels::scalar
