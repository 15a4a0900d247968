// Copyright (c) 2026, The rlpipe Authors
// SPDX-License-Identifier: Apache-2.0
//
// Saturating decode-rate model. A single sequence decodes at r1(L), linear
// from r_short at L = 0 down to r_long at L = l_ref and flat beyond. With B
// sequences sharing an instance each one runs at
//
//   r(L, B) = r1(L) * (1 + k_sat) / (B + k_sat)
//
// so the aggregate B * r(L, B) grows with B and approaches (1 + k_sat) r1(L).

#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "rlpipe/core/types.hpp"

namespace rlpipe::sim {

inline constexpr double kDefaultReferenceLength = 32768.0;

struct ThroughputModel {
  double r_short = 60.0;
  double r_long = 50.0;
  double l_ref = kDefaultReferenceLength;
  double k_sat = 19.0;

  // Throws ValidationError unless r_short >= r_long > 0, k_sat > 0, l_ref > 0.
  void validate() const;

  double single_rate(double length) const;
  double batch_factor(double batch) const { return (1.0 + k_sat) / (batch + k_sat); }
  double rate(double length, double batch) const { return single_rate(length) * batch_factor(batch); }
  double aggregate_rate(double length, double batch) const { return batch * rate(length, batch); }

  // Every sequence of a batch of `batch` advances together while the batch
  // mean length starts at `mean_length`. time_to_advance is the exact time
  // to add `tokens` to each sequence; tokens_in is its inverse.
  double time_to_advance(double mean_length, double batch, double tokens) const;
  double tokens_in(double mean_length, double batch, double seconds) const;
};

Json to_json(const ThroughputModel& m);
ThroughputModel throughput_from_json(const Json& j);

struct CalibrationPoint {
  double length = 0.0;
  double batch = 1.0;
  double rate = 0.0;
};

struct CalibrationOptions {
  // Holds k_sat fixed; then a single point is enough.
  std::optional<double> fixed_k;
  double l_ref = kDefaultReferenceLength;
};

struct CalibrationResult {
  ThroughputModel model;
  // max over points of |predicted - observed| / observed
  double max_relative_residual = 0.0;
  std::vector<double> relative_residuals;
};

// Least squares on relative residuals. r_short and r_long follow in closed
// form for each k_sat; k_sat itself is found by a log-spaced scan refined by
// golden-section search. When the points cannot separate r_short from
// r_long (every point on one side of the fit) the single-sequence rate is
// taken as flat.
//
// Without fixed_k this needs >= 3 points, at least one with B = 1 and at
// least two distinct batch sizes; ValidationError otherwise.
CalibrationResult calibrate(const std::vector<CalibrationPoint>& points, const CalibrationOptions& options = {});

}  // namespace rlpipe::sim
