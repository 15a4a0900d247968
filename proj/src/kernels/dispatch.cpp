// Copyright (c) 2026, The rlpipe Authors
// SPDX-License-Identifier: Apache-2.0

#include <atomic>
#include <cstdlib>
#include <cstring>

#include "rlpipe/kernels/kernels.hpp"

namespace rlpipe::kernels {
namespace {

constexpr int kUnset = -1;
std::atomic<int> g_forced{kUnset};

bool env_forces_scalar() {
  const char* v = std::getenv("RLPIPE_FORCE_SCALAR");
  return v != nullptr && *v != '\0' && std::strcmp(v, "0") != 0;
}

}  // namespace

std::string_view to_string(Isa isa) {
  switch (isa) {
    case Isa::scalar: return "scalar";
    case Isa::avx2: return "avx2";
    case Isa::neon: return "neon";
  }
  return "?";
}

bool isa_supported(Isa isa) {
  switch (isa) {
    case Isa::scalar: return true;
    case Isa::avx2:
#if defined(RLPIPE_HAVE_AVX2)
      return __builtin_cpu_supports("avx2");
#else
      return false;
#endif
    case Isa::neon:
#if defined(RLPIPE_HAVE_NEON)
      return true;
#else
      return false;
#endif
  }
  return false;
}

Isa detected_isa() {
  static const Isa isa = [] {
    if (isa_supported(Isa::avx2)) return Isa::avx2;
    if (isa_supported(Isa::neon)) return Isa::neon;
    return Isa::scalar;
  }();
  return isa;
}

Isa active_isa() {
  const int forced = g_forced.load(std::memory_order_relaxed);
  if (forced != kUnset) return static_cast<Isa>(forced);
  static const bool scalar_only = env_forces_scalar();
  return scalar_only ? Isa::scalar : detected_isa();
}

void force_isa(std::optional<Isa> isa) {
  if (!isa) {
    g_forced.store(kUnset, std::memory_order_relaxed);
    return;
  }
  g_forced.store(static_cast<int>(isa_supported(*isa) ? *isa : Isa::scalar), std::memory_order_relaxed);
}

#if defined(RLPIPE_HAVE_AVX2)
#define RLPIPE_CASE_AVX2(call) \
  case Isa::avx2: return avx2::call;
#else
#define RLPIPE_CASE_AVX2(call)
#endif

#if defined(RLPIPE_HAVE_NEON)
#define RLPIPE_CASE_NEON(call) \
  case Isa::neon: return neon::call;
#else
#define RLPIPE_CASE_NEON(call)
#endif

#define RLPIPE_DISPATCH(call)  \
  switch (active_isa()) {      \
    RLPIPE_CASE_AVX2(call)     \
    RLPIPE_CASE_NEON(call)     \
    default: return scalar::call; \
  }

void minhash_update(std::span<const std::uint32_t> shingle_hashes, std::span<const std::uint32_t> mul,
                    std::span<const std::uint32_t> add, std::span<std::uint32_t> signature) {
  RLPIPE_DISPATCH(minhash_update(shingle_hashes, mul, add, signature))
}

std::size_t count_equal(std::span<const std::uint32_t> a, std::span<const std::uint32_t> b) {
  RLPIPE_DISPATCH(count_equal(a, b))
}

double advance_remaining(std::span<double> remaining, double delta) {
  RLPIPE_DISPATCH(advance_remaining(remaining, delta))
}

Moments masked_moments(std::span<const double> values, std::span<const std::uint8_t> keep) {
  RLPIPE_DISPATCH(masked_moments(values, keep))
}

void normalize_masked(std::span<const double> values, std::span<const std::uint8_t> keep, double center, double inv_scale,
                      std::span<double> out) {
  RLPIPE_DISPATCH(normalize_masked(values, keep, center, inv_scale, out))
}

}  // namespace rlpipe::kernels
