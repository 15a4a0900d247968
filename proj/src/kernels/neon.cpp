// Copyright (c) 2026, The rlpipe Authors
// SPDX-License-Identifier: Apache-2.0
//
// AArch64 NEON variants. NEON is baseline on AArch64, so no runtime check.

#include <arm_neon.h>

#include <algorithm>
#include <limits>

#include "rlpipe/kernels/kernels.hpp"

namespace rlpipe::kernels::neon {
namespace {

inline uint32x4_t fmix32(uint32x4_t v) {
  v = veorq_u32(v, vshrq_n_u32(v, 16));
  v = vmulq_u32(v, vdupq_n_u32(0x85ebca6bu));
  v = veorq_u32(v, vshrq_n_u32(v, 13));
  v = vmulq_u32(v, vdupq_n_u32(0xc2b2ae35u));
  v = veorq_u32(v, vshrq_n_u32(v, 16));
  return v;
}

inline uint64x2_t lane_mask(const std::uint8_t* keep) {
  const uint64x2_t wide = {keep[0], keep[1]};
  return vcgtq_u64(wide, vdupq_n_u64(0));
}

}  // namespace

void minhash_update(std::span<const std::uint32_t> shingle_hashes, std::span<const std::uint32_t> mul,
                    std::span<const std::uint32_t> add, std::span<std::uint32_t> signature) {
  const std::size_t n = signature.size();
  std::size_t k = 0;
  for (; k + 4 <= n; k += 4) {
    const uint32x4_t m = vld1q_u32(mul.data() + k);
    const uint32x4_t a = vld1q_u32(add.data() + k);
    uint32x4_t sig = vld1q_u32(signature.data() + k);
    for (std::uint32_t x : shingle_hashes) {
      sig = vminq_u32(sig, fmix32(vmlaq_u32(a, m, vdupq_n_u32(x))));
    }
    vst1q_u32(signature.data() + k, sig);
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
  for (; i + 4 <= n; i += 4) {
    const uint32x4_t eq = vceqq_u32(vld1q_u32(a.data() + i), vld1q_u32(b.data() + i));
    count += vaddvq_u32(vshrq_n_u32(eq, 31));
  }
  for (; i < n; ++i) count += a[i] == b[i];
  return count;
}

double advance_remaining(std::span<double> remaining, double delta) {
  const std::size_t n = remaining.size();
  const float64x2_t d = vdupq_n_f64(delta);
  float64x2_t lo = vdupq_n_f64(std::numeric_limits<double>::infinity());
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t r = vsubq_f64(vld1q_f64(remaining.data() + i), d);
    vst1q_f64(remaining.data() + i, r);
    lo = vminq_f64(lo, r);
  }
  double out = vminvq_f64(lo);
  for (; i < n; ++i) {
    remaining[i] -= delta;
    out = std::min(out, remaining[i]);
  }
  return out;
}

Moments masked_moments(std::span<const double> values, std::span<const std::uint8_t> keep) {
  const std::size_t n = values.size();
  Moments m;
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const uint64x2_t mask = lane_mask(keep.data() + i);
    const float64x2_t v = vreinterpretq_f64_u64(vandq_u64(mask, vreinterpretq_u64_f64(vld1q_f64(values.data() + i))));
    acc = vaddq_f64(acc, v);
    m.count += (keep[i] != 0) + (keep[i + 1] != 0);
  }
  double sum = vaddvq_f64(acc);
  for (; i < n; ++i) {
    if (keep[i]) {
      sum += values[i];
      ++m.count;
    }
  }
  if (m.count == 0) return m;
  m.mean = sum / static_cast<double>(m.count);

  const float64x2_t mean = vdupq_n_f64(m.mean);
  float64x2_t sq = vdupq_n_f64(0.0);
  i = 0;
  for (; i + 2 <= n; i += 2) {
    const uint64x2_t mask = lane_mask(keep.data() + i);
    const float64x2_t dev = vsubq_f64(vld1q_f64(values.data() + i), mean);
    sq = vaddq_f64(sq, vreinterpretq_f64_u64(vandq_u64(mask, vreinterpretq_u64_f64(vmulq_f64(dev, dev)))));
  }
  m.m2 = vaddvq_f64(sq);
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
  const float64x2_t c = vdupq_n_f64(center);
  const float64x2_t s = vdupq_n_f64(inv_scale);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const uint64x2_t mask = lane_mask(keep.data() + i);
    const float64x2_t v = vmulq_f64(vsubq_f64(vld1q_f64(values.data() + i), c), s);
    vst1q_f64(out.data() + i, vreinterpretq_f64_u64(vandq_u64(mask, vreinterpretq_u64_f64(v))));
  }
  for (; i < n; ++i) out[i] = keep[i] ? (values[i] - center) * inv_scale : 0.0;
}

}  // namespace rlpipe::kernels::neon
