// Copyright (c) 2026, The rlpipe Authors
// SPDX-License-Identifier: Apache-2.0
//
// AVX2 variants. This translation unit is built with -mavx2 and must only be
// entered after the dispatcher has confirmed CPU support.

#include <immintrin.h>

#include <algorithm>
#include <bit>
#include <cstring>
#include <limits>

#include "rlpipe/kernels/kernels.hpp"

namespace rlpipe::kernels::avx2 {
namespace {

inline __m256i fmix32(__m256i v) {
  v = _mm256_xor_si256(v, _mm256_srli_epi32(v, 16));
  v = _mm256_mullo_epi32(v, _mm256_set1_epi32(static_cast<int>(0x85ebca6bu)));
  v = _mm256_xor_si256(v, _mm256_srli_epi32(v, 13));
  v = _mm256_mullo_epi32(v, _mm256_set1_epi32(static_cast<int>(0xc2b2ae35u)));
  v = _mm256_xor_si256(v, _mm256_srli_epi32(v, 16));
  return v;
}

// Expands keep[i..i+4) into an all-ones/all-zeros double lane mask.
inline __m256d lane_mask(const std::uint8_t* keep) {
  std::int32_t packed;
  std::memcpy(&packed, keep, sizeof(packed));
  const __m256i wide = _mm256_cvtepu8_epi64(_mm_cvtsi32_si128(packed));
  return _mm256_castsi256_pd(_mm256_cmpgt_epi64(wide, _mm256_setzero_si256()));
}

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

}  // namespace

void minhash_update(std::span<const std::uint32_t> shingle_hashes, std::span<const std::uint32_t> mul,
                    std::span<const std::uint32_t> add, std::span<std::uint32_t> signature) {
  const std::size_t n = signature.size();
  std::size_t k = 0;
  for (; k + 8 <= n; k += 8) {
    const __m256i m = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(mul.data() + k));
    const __m256i a = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(add.data() + k));
    __m256i sig = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(signature.data() + k));
    for (std::uint32_t x : shingle_hashes) {
      const __m256i v = _mm256_add_epi32(_mm256_mullo_epi32(m, _mm256_set1_epi32(static_cast<int>(x))), a);
      sig = _mm256_min_epu32(sig, fmix32(v));
    }
    _mm256_storeu_si256(reinterpret_cast<__m256i*>(signature.data() + k), sig);
  }
  for (; k < n; ++k) {
    for (std::uint32_t x : shingle_hashes) {
      signature[k] = std::min(signature[k], minhash_permute(x, mul[k], add[k]));
    }
  }
}

std::size_t count_equal(std::span<const std::uint32_t> a, std::span<const std::uint32_t> b) {
  const std::size_t n = a.size();
  std::size_t count = 0;
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256i va = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(a.data() + i));
    const __m256i vb = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(b.data() + i));
    const int bits = _mm256_movemask_ps(_mm256_castsi256_ps(_mm256_cmpeq_epi32(va, vb)));
    count += static_cast<std::size_t>(std::popcount(static_cast<unsigned>(bits)));
  }
  for (; i < n; ++i) count += a[i] == b[i];
  return count;
}

double advance_remaining(std::span<double> remaining, double delta) {
  const std::size_t n = remaining.size();
  const __m256d d = _mm256_set1_pd(delta);
  __m256d lo = _mm256_set1_pd(std::numeric_limits<double>::infinity());
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d r = _mm256_sub_pd(_mm256_loadu_pd(remaining.data() + i), d);
    _mm256_storeu_pd(remaining.data() + i, r);
    lo = _mm256_min_pd(lo, r);
  }
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, lo);
  double out = std::min(std::min(lanes[0], lanes[1]), std::min(lanes[2], lanes[3]));
  for (; i < n; ++i) {
    remaining[i] -= delta;
    out = std::min(out, remaining[i]);
  }
  return out;
}

Moments masked_moments(std::span<const double> values, std::span<const std::uint8_t> keep) {
  const std::size_t n = values.size();
  Moments m;
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d mask = lane_mask(keep.data() + i);
    acc = _mm256_add_pd(acc, _mm256_and_pd(mask, _mm256_loadu_pd(values.data() + i)));
    m.count += static_cast<std::size_t>(std::popcount(static_cast<unsigned>(_mm256_movemask_pd(mask))));
  }
  double sum = hsum(acc);
  for (; i < n; ++i) {
    if (keep[i]) {
      sum += values[i];
      ++m.count;
    }
  }
  if (m.count == 0) return m;
  m.mean = sum / static_cast<double>(m.count);

  const __m256d mean = _mm256_set1_pd(m.mean);
  __m256d sq = _mm256_setzero_pd();
  i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d mask = lane_mask(keep.data() + i);
    const __m256d dev = _mm256_sub_pd(_mm256_loadu_pd(values.data() + i), mean);
    sq = _mm256_add_pd(sq, _mm256_and_pd(mask, _mm256_mul_pd(dev, dev)));
  }
  m.m2 = hsum(sq);
  for (; i < n; ++i) {
    if (keep[i]) {
      const double dev = values[i] - m.mean;
      m.m2 += dev * dev;
    }
  }
  return m;
}

void normalize_masked(std::span<const double> values, std::span<const std::uint8_t> keep, double center, double inv_scale,
                      std::span<double> out) {
  const std::size_t n = values.size();
  const __m256d c = _mm256_set1_pd(center);
  const __m256d s = _mm256_set1_pd(inv_scale);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d mask = lane_mask(keep.data() + i);
    const __m256d v = _mm256_mul_pd(_mm256_sub_pd(_mm256_loadu_pd(values.data() + i), c), s);
    _mm256_storeu_pd(out.data() + i, _mm256_and_pd(mask, v));
  }
  for (; i < n; ++i) out[i] = keep[i] ? (values[i] - center) * inv_scale : 0.0;
}

}  // namespace rlpipe::kernels::avx2
