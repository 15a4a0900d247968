// Copyright (c) 2026, The rlpipe Authors
// SPDX-License-Identifier: Apache-2.0
//
// Data-parallel inner loops used by dedup, the rollout simulator and GRPO
// normalization. Each kernel has a scalar reference and SIMD variants; the
// dispatcher picks the widest one the CPU supports at first use.
//
// Integer kernels and advance_remaining are bit-identical across variants.
// The floating-point reductions (masked_moments) may differ in the last ulps
// because lane-wise accumulation reorders the sums.

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>

namespace rlpipe::kernels {

enum class Isa { scalar, avx2, neon };

std::string_view to_string(Isa isa);

// Widest variant this CPU and build support.
Isa detected_isa();

// Variant currently used by the dispatching entry points. Honors the
// RLPIPE_FORCE_SCALAR environment variable and force_isa().
Isa active_isa();

// Pins the dispatch target (nullopt restores detection). Requests for an
// unsupported ISA fall back to scalar.
void force_isa(std::optional<Isa> isa);

bool isa_supported(Isa isa);

// MinHash permutation: h_k(x) = fmix32(mul[k] * x + add[k]) mod 2^32.
constexpr std::uint32_t minhash_permute(std::uint32_t x, std::uint32_t mul, std::uint32_t add) {
  std::uint32_t v = mul * x + add;
  v ^= v >> 16;
  v *= 0x85ebca6bu;
  v ^= v >> 13;
  v *= 0xc2b2ae35u;
  v ^= v >> 16;
  return v;
}

// signature[k] = min(signature[k], min over x of minhash_permute(x, mul[k], add[k])).
// mul, add and signature have equal length.
void minhash_update(std::span<const std::uint32_t> shingle_hashes, std::span<const std::uint32_t> mul,
                    std::span<const std::uint32_t> add, std::span<std::uint32_t> signature);

// Number of positions where a[i] == b[i]; spans have equal length.
std::size_t count_equal(std::span<const std::uint32_t> a, std::span<const std::uint32_t> b);

// remaining[i] -= delta for every i; returns the new minimum (+inf if empty).
double advance_remaining(std::span<double> remaining, double delta);

struct Moments {
  std::size_t count = 0;
  double mean = 0.0;
  // Sum of squared deviations from the mean.
  double m2 = 0.0;
};

// Two-pass moments over entries with keep[i] != 0.
Moments masked_moments(std::span<const double> values, std::span<const std::uint8_t> keep);

// out[i] = keep[i] ? (values[i] - center) * inv_scale : 0.
void normalize_masked(std::span<const double> values, std::span<const std::uint8_t> keep, double center, double inv_scale,
                      std::span<double> out);

// Per-variant entry points, exposed for equivalence testing.
namespace scalar {
void minhash_update(std::span<const std::uint32_t>, std::span<const std::uint32_t>, std::span<const std::uint32_t>,
                    std::span<std::uint32_t>);
std::size_t count_equal(std::span<const std::uint32_t>, std::span<const std::uint32_t>);
double advance_remaining(std::span<double>, double);
Moments masked_moments(std::span<const double>, std::span<const std::uint8_t>);
void normalize_masked(std::span<const double>, std::span<const std::uint8_t>, double, double, std::span<double>);
}  // namespace scalar

#if defined(RLPIPE_HAVE_AVX2)
namespace avx2 {
void minhash_update(std::span<const std::uint32_t>, std::span<const std::uint32_t>, std::span<const std::uint32_t>,
                    std::span<std::uint32_t>);
std::size_t count_equal(std::span<const std::uint32_t>, std::span<const std::uint32_t>);
double advance_remaining(std::span<double>, double);
Moments masked_moments(std::span<const double>, std::span<const std::uint8_t>);
void normalize_masked(std::span<const double>, std::span<const std::uint8_t>, double, double, std::span<double>);
}  // namespace avx2
#endif

#if defined(RLPIPE_HAVE_NEON)
namespace neon {
void minhash_update(std::span<const std::uint32_t>, std::span<const std::uint32_t>, std::span<const std::uint32_t>,
                    std::span<std::uint32_t>);
std::size_t count_equal(std::span<const std::uint32_t>, std::span<const std::uint32_t>);
double advance_remaining(std::span<double>, double);
Moments masked_moments(std::span<const double>, std::span<const std::uint8_t>);
void normalize_masked(std::span<const double>, std::span<const std::uint8_t>, double, double, std::span<double>);
}  // namespace neon
#endif

}  // namespace rlpipe::kernels
