// Copyright 2026 The bridgematch Authors
// SPDX-License-Identifier: Apache-2.0

#include "bridgematch/schedules.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace bm {

std::string_view to_string(ScheduleKind kind) {
  switch (kind) {
    case ScheduleKind::kVp: return "vp";
    case ScheduleKind::kTrig: return "trig";
    case ScheduleKind::kCfmLinear: return "cfm_linear";
    case ScheduleKind::kTube: return "tube";
  }
  return "unknown";
}

ScheduleKind parse_schedule_kind(std::string_view name) {
  if (name == "vp") return ScheduleKind::kVp;
  if (name == "trig") return ScheduleKind::kTrig;
  if (name == "cfm_linear") return ScheduleKind::kCfmLinear;
  if (name == "tube") return ScheduleKind::kTube;
  throw std::invalid_argument("unknown schedule '" + std::string(name) + "'");
}

Schedule Schedule::vp(double beta_min, double beta_max) {
  if (!(beta_min > 0.0) || !(beta_max > beta_min)) {
    throw std::invalid_argument("vp_schedule: need 0 < beta_min < beta_max");
  }
  return {ScheduleKind::kVp, beta_min, beta_max, 0.0};
}

Schedule Schedule::trig() { return {ScheduleKind::kTrig, 0.0, 0.0, 0.0}; }

Schedule Schedule::cfm_linear(double sigma_min) {
  if (!(sigma_min > 0.0) || !(sigma_min < 1.0)) {
    throw std::invalid_argument("cfm_linear_sigma: need 0 < sigma_min < 1");
  }
  return {ScheduleKind::kCfmLinear, 0.0, 0.0, sigma_min};
}

Schedule Schedule::tube(double sigma_min) {
  if (!(sigma_min > 0.0)) throw std::invalid_argument("tube_sigma: need sigma_min > 0");
  return {ScheduleKind::kTube, 0.0, 0.0, sigma_min};
}

double Schedule::vp_integral(double t) const {
  const double s = 1.0 - t;
  return beta_min_ * s + 0.5 * (beta_max_ - beta_min_) * s * s;
}

double Schedule::vp_rate(double t) const {
  const double s = 1.0 - t;
  return beta_min_ + (beta_max_ - beta_min_) * s;
}

double Schedule::alpha(double t) const {
  switch (kind_) {
    case ScheduleKind::kVp: return std::exp(-0.5 * vp_integral(t));
    case ScheduleKind::kTrig: return std::sin(0.5 * std::numbers::pi * t);
    case ScheduleKind::kCfmLinear:
    case ScheduleKind::kTube: return t;
  }
  return 0.0;
}

double Schedule::sigma(double t) const {
  switch (kind_) {
    case ScheduleKind::kVp: {
      // 1 - alpha^2 = -expm1(-T) avoids cancellation near t = 1.
      return std::sqrt(-std::expm1(-vp_integral(t)));
    }
    case ScheduleKind::kTrig: return std::cos(0.5 * std::numbers::pi * t);
    case ScheduleKind::kCfmLinear: return 1.0 - (1.0 - sigma_min_) * t;
    case ScheduleKind::kTube: return std::max(std::sqrt(std::max(t * (1.0 - t), 0.0)), sigma_min_);
  }
  return 0.0;
}

double Schedule::alpha_dot(double t) const {
  switch (kind_) {
    case ScheduleKind::kVp: return 0.5 * alpha(t) * vp_rate(t);
    case ScheduleKind::kTrig:
      return 0.5 * std::numbers::pi * std::cos(0.5 * std::numbers::pi * t);
    case ScheduleKind::kCfmLinear:
    case ScheduleKind::kTube: return 1.0;
  }
  return 0.0;
}

double Schedule::sigma_dot(double t) const {
  switch (kind_) {
    case ScheduleKind::kVp: return -alpha(t) * alpha_dot(t) / sigma(t);
    case ScheduleKind::kTrig:
      return -0.5 * std::numbers::pi * std::sin(0.5 * std::numbers::pi * t);
    case ScheduleKind::kCfmLinear: return -(1.0 - sigma_min_);
    case ScheduleKind::kTube: {
      const double v = t * (1.0 - t);
      const double root = std::sqrt(std::max(v, 0.0));
      if (root <= sigma_min_) return 0.0;
      return (1.0 - 2.0 * t) / (2.0 * root);
    }
  }
  return 0.0;
}

double clamp_time(double t, double t_eps) { return std::clamp(t, t_eps, 1.0 - t_eps); }

}  // namespace bm
