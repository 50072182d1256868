// Copyright 2026 The bridgematch Authors
// SPDX-License-Identifier: Apache-2.0
//
// Scalar path schedules (alpha(t), sigma(t)) with analytic time derivatives.
// Time runs from noise/source at t = 0 to data at t = 1.

#pragma once

#include <string>
#include <string_view>

namespace bm {

enum class ScheduleKind { kVp, kTrig, kCfmLinear, kTube };

std::string_view to_string(ScheduleKind kind);
ScheduleKind parse_schedule_kind(std::string_view name);

class Schedule {
 public:
  /// Linear-beta variance-preserving law in reversed time s = 1 - t:
  /// alpha = exp(-T(s) / 2), T(s) = beta_min s + (beta_max - beta_min) s^2 / 2.
  static Schedule vp(double beta_min = 0.1, double beta_max = 20.0);
  /// alpha = sin(pi t / 2), sigma = cos(pi t / 2).
  static Schedule trig();
  /// alpha = t, sigma = 1 - (1 - sigma_min) t.
  static Schedule cfm_linear(double sigma_min);
  /// alpha = t, sigma = max(sqrt(t (1 - t)), sigma_min); sigma_dot = 0 where floored.
  static Schedule tube(double sigma_min);

  [[nodiscard]] double alpha(double t) const;
  [[nodiscard]] double sigma(double t) const;
  [[nodiscard]] double alpha_dot(double t) const;
  /// For vp/trig this is -inf or NaN at t = 1 where sigma vanishes; callers clamp t.
  [[nodiscard]] double sigma_dot(double t) const;

  [[nodiscard]] ScheduleKind kind() const { return kind_; }
  [[nodiscard]] double beta_min() const { return beta_min_; }
  [[nodiscard]] double beta_max() const { return beta_max_; }
  [[nodiscard]] double sigma_min() const { return sigma_min_; }

  friend bool operator==(const Schedule&, const Schedule&) = default;

 private:
  Schedule(ScheduleKind kind, double beta_min, double beta_max, double sigma_min)
      : kind_(kind), beta_min_(beta_min), beta_max_(beta_max), sigma_min_(sigma_min) {}

  /// Integrated VP rate T(1 - t) and instantaneous rate beta(1 - t).
  [[nodiscard]] double vp_integral(double t) const;
  [[nodiscard]] double vp_rate(double t) const;

  ScheduleKind kind_;
  double beta_min_ = 0.0;
  double beta_max_ = 0.0;
  double sigma_min_ = 0.0;
};

/// Clamps t into [t_eps, 1 - t_eps].
double clamp_time(double t, double t_eps);

}  // namespace bm
