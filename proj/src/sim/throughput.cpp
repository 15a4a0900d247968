// Copyright (c) 2026, The rlpipe Authors
// SPDX-License-Identifier: Apache-2.0

#include "rlpipe/sim/throughput.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rlpipe/core/errors.hpp"

namespace rlpipe::sim {
namespace {

// dL/dt = c (a - b L) below l_ref where a = r_short, b = slope.
struct Piece {
  double a;
  double b;
  double c;
};

Piece piece(const ThroughputModel& m, double batch) {
  return {m.r_short, (m.r_short - m.r_long) / m.l_ref, m.batch_factor(batch)};
}

// Time for L to go from l0 to l1 with l0 <= l1 <= l_ref.
double time_below(const Piece& p, double l0, double l1) {
  if (l1 <= l0) return 0.0;
  if (p.b == 0.0) return (l1 - l0) / (p.c * p.a);
  return std::log1p(p.b * (l1 - l0) / (p.a - p.b * l1)) / (p.c * p.b);
}

// Length after `seconds` starting from l0 <= l_ref, ignoring the clamp.
double advance_below(const Piece& p, double l0, double seconds) {
  if (p.b == 0.0) return l0 + p.c * p.a * seconds;
  return l0 + (p.a - p.b * l0) / p.b * -std::expm1(-p.c * p.b * seconds);
}

struct LinearFit {
  double r_short;
  double r_long;
  double objective;
};

double weight(double length, double l_ref) { return std::clamp(length / l_ref, 0.0, 1.0); }

double objective(const std::vector<CalibrationPoint>& pts, const ThroughputModel& m) {
  double s = 0.0;
  for (const auto& p : pts) {
    const double e = m.rate(p.length, p.batch) / p.rate - 1.0;
    s += e * e;
  }
  return s;
}

// Best r_short, r_long for fixed k: minimize sum ((g (u rs + w rl)) / y - 1)^2 with
// u = 1 - w. Falls back to a flat curve when the 2x2 system is singular or
// the unconstrained optimum breaks r_short >= r_long.
LinearFit fit_rates(const std::vector<CalibrationPoint>& pts, double k, double l_ref) {
  double suu = 0, suw = 0, sww = 0, su = 0, sw = 0;
  double sff = 0, sf = 0;
  for (const auto& p : pts) {
    const double g = (1.0 + k) / (p.batch + k) / p.rate;
    const double w = weight(p.length, l_ref);
    const double xu = g * (1.0 - w), xw = g * w;
    suu += xu * xu;
    suw += xu * xw;
    sww += xw * xw;
    su += xu;
    sw += xw;
    sff += g * g;
    sf += g;
  }
  const double det = suu * sww - suw * suw;
  const double scale = std::max(suu * sww, std::numeric_limits<double>::min());
  ThroughputModel m{0, 0, l_ref, k};
  if (det > 1e-12 * scale) {
    const double rs = (su * sww - sw * suw) / det;
    const double rl = (sw * suu - su * suw) / det;
    if (rs >= rl && rl > 0.0) {
      m.r_short = rs;
      m.r_long = rl;
      return {rs, rl, objective(pts, m)};
    }
  }
  const double r = sf / sff;
  m.r_short = m.r_long = r;
  return {r, r, objective(pts, m)};
}

}  // namespace

void ThroughputModel::validate() const {
  if (!(r_long > 0.0) || !(r_short >= r_long) || !std::isfinite(r_short)) {
    throw ValidationError("throughput model needs r_short >= r_long > 0");
  }
  if (!(k_sat > 0.0) || !std::isfinite(k_sat)) throw ValidationError("k_sat must be positive");
  if (!(l_ref > 0.0) || !std::isfinite(l_ref)) throw ValidationError("l_ref must be positive");
}

double ThroughputModel::single_rate(double length) const {
  const double w = std::clamp(length / l_ref, 0.0, 1.0);
  return r_short + (r_long - r_short) * w;
}

double ThroughputModel::time_to_advance(double mean_length, double batch, double tokens) const {
  if (tokens <= 0.0) return 0.0;
  const Piece p = piece(*this, batch);
  const double l0 = std::max(mean_length, 0.0);
  const double l1 = l0 + tokens;
  if (l0 >= l_ref) return tokens / (p.c * r_long);
  if (l1 <= l_ref) return time_below(p, l0, l1);
  return time_below(p, l0, l_ref) + (l1 - l_ref) / (p.c * r_long);
}

double ThroughputModel::tokens_in(double mean_length, double batch, double seconds) const {
  if (seconds <= 0.0) return 0.0;
  const Piece p = piece(*this, batch);
  const double l0 = std::max(mean_length, 0.0);
  if (l0 >= l_ref) return seconds * p.c * r_long;
  const double t_ref = time_below(p, l0, l_ref);
  if (seconds <= t_ref) return std::min(advance_below(p, l0, seconds), l_ref) - l0;
  return (l_ref - l0) + (seconds - t_ref) * p.c * r_long;
}

Json to_json(const ThroughputModel& m) {
  return {{"r_short", m.r_short}, {"r_long", m.r_long}, {"l_ref", m.l_ref}, {"k_sat", m.k_sat}};
}

ThroughputModel throughput_from_json(const Json& j) {
  ThroughputModel m;
  m.r_short = j.value("r_short", m.r_short);
  m.r_long = j.value("r_long", m.r_long);
  m.l_ref = j.value("l_ref", m.l_ref);
  m.k_sat = j.value("k_sat", m.k_sat);
  m.validate();
  return m;
}

CalibrationResult calibrate(const std::vector<CalibrationPoint>& points, const CalibrationOptions& options) {
  if (points.empty()) throw ValidationError("calibration needs points");
  for (const auto& p : points) {
    if (!(p.rate > 0.0) || !(p.batch >= 1.0) || !(p.length >= 0.0)) {
      throw ValidationError("calibration points need rate > 0, batch >= 1, length >= 0");
    }
  }
  double k = 0.0;
  if (options.fixed_k) {
    k = *options.fixed_k;
    if (!(k > 0.0)) throw ValidationError("fixed k_sat must be positive");
  } else {
    if (points.size() < 3) throw ValidationError("calibration needs at least 3 points");
    const bool has_single = std::any_of(points.begin(), points.end(), [](const auto& p) { return p.batch == 1.0; });
    if (!has_single) throw ValidationError("calibration needs a point with batch 1");
    const bool varied = std::any_of(points.begin(), points.end(), [&](const auto& p) { return p.batch != points[0].batch; });
    if (!varied) throw ValidationError("calibration points all share one batch size");

    // Scan log10 k over [-3, 5], then golden-section inside the best bracket.
    constexpr int kGrid = 400;
    const auto f = [&](double lk) { return fit_rates(points, std::pow(10.0, lk), options.l_ref).objective; };
    int best = 0;
    double best_f = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= kGrid; ++i) {
      const double v = f(-3.0 + 8.0 * i / kGrid);
      if (v < best_f) {
        best_f = v;
        best = i;
      }
    }
    double lo = -3.0 + 8.0 * std::max(best - 1, 0) / kGrid;
    double hi = -3.0 + 8.0 * std::min(best + 1, kGrid) / kGrid;
    const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = hi - phi * (hi - lo), x2 = lo + phi * (hi - lo);
    double f1 = f(x1), f2 = f(x2);
    for (int it = 0; it < 200 && hi - lo > 1e-13; ++it) {
      if (f1 < f2) {
        hi = x2;
        x2 = x1;
        f2 = f1;
        x1 = hi - phi * (hi - lo);
        f1 = f(x1);
      } else {
        lo = x1;
        x1 = x2;
        f1 = f2;
        x2 = lo + phi * (hi - lo);
        f2 = f(x2);
      }
    }
    k = std::pow(10.0, (lo + hi) / 2.0);
  }
  const auto fit = fit_rates(points, k, options.l_ref);
  CalibrationResult out;
  out.model = ThroughputModel{fit.r_short, fit.r_long, options.l_ref, k};
  for (const auto& p : points) {
    const double e = std::abs(out.model.rate(p.length, p.batch) - p.rate) / p.rate;
    out.relative_residuals.push_back(e);
    out.max_relative_residual = std::max(out.max_relative_residual, e);
  }
  return out;
}

}  // namespace rlpipe::sim
