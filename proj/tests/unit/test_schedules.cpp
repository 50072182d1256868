// Copyright 2026 The bridgematch Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <numbers>

#include "bridgematch/schedules.hpp"

using namespace bm;

TEST_CASE("vp boundaries") {
  const Schedule s = Schedule::vp(0.1, 20.0);
  CHECK(s.alpha(1.0) == 1.0);
  CHECK(s.sigma(1.0) == 0.0);
  CHECK(s.alpha(0.0) == doctest::Approx(std::exp(-5.025)).epsilon(1e-14));
  CHECK(s.alpha(0.0) == doctest::Approx(6.56e-3).epsilon(1e-3));
}

TEST_CASE("trig boundaries") {
  const Schedule s = Schedule::trig();
  CHECK(s.alpha(0.0) == 0.0);
  CHECK(s.sigma(0.0) == 1.0);
  CHECK(s.alpha(0.5) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-15));
  CHECK(s.sigma(0.5) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-15));
}

TEST_CASE("cfm linear") {
  const Schedule s = Schedule::cfm_linear(0.01);
  CHECK(s.sigma(0.0) == 1.0);
  CHECK(s.sigma(1.0) == doctest::Approx(0.01).epsilon(1e-14));
  CHECK(s.sigma_dot(0.2) == -0.99);
  CHECK(s.sigma_dot(0.9) == -0.99);
  CHECK(s.alpha_dot(0.3) == 1.0);
  CHECK_THROWS(Schedule::cfm_linear(1.0));
  CHECK_THROWS(Schedule::cfm_linear(0.0));
}

TEST_CASE("tube") {
  const Schedule s = Schedule::tube(0.1);
  CHECK(s.sigma(0.5) == 0.5);
  CHECK(s.sigma(0.0) == 0.1);
  CHECK(s.sigma(1.0) == 0.1);
  CHECK(s.sigma_dot(0.5) == 0.0);
  CHECK(s.sigma_dot(0.001) == 0.0);
}

TEST_CASE("variance preservation on a grid") {
  for (const Schedule& s : {Schedule::vp(), Schedule::trig()}) {
    for (int i = 0; i <= 1000; ++i) {
      const double t = i / 1000.0;
      CHECK(std::abs(s.alpha(t) * s.alpha(t) + s.sigma(t) * s.sigma(t) - 1.0) < 1e-12);
    }
  }
}

TEST_CASE("analytic derivatives match central differences") {
  const double h = 1e-6;
  auto rel = [](double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-6); };
  for (const Schedule& s : {Schedule::vp(), Schedule::trig(), Schedule::cfm_linear(0.01), Schedule::tube(0.1)}) {
    for (int i = 0; i <= 98; ++i) {
      const double t = 0.01 + i * 0.01;
      if (s.kind() == ScheduleKind::kTube && std::sqrt(t * (1 - t)) < 0.1 + 1e-3) continue;
      const double fa = (s.alpha(t + h) - s.alpha(t - h)) / (2 * h);
      const double fs = (s.sigma(t + h) - s.sigma(t - h)) / (2 * h);
      CHECK_MESSAGE(rel(s.alpha_dot(t), fa) < 1e-5, to_string(s.kind()), " t=", t);
      CHECK_MESSAGE(rel(s.sigma_dot(t), fs) < 1e-5, to_string(s.kind()), " t=", t);
    }
  }
}

TEST_CASE("monotone in the designed direction") {
  const Schedule vp = Schedule::vp(), trig = Schedule::trig(), lin = Schedule::cfm_linear(0.01);
  for (int i = 0; i < 1000; ++i) {
    const double a = i / 1000.0, b = (i + 1) / 1000.0;
    CHECK(vp.alpha(b) >= vp.alpha(a));
    CHECK(trig.alpha(b) >= trig.alpha(a));
    CHECK(lin.sigma(b) <= lin.sigma(a));
  }
}

TEST_CASE("time clamp and names") {
  CHECK(clamp_time(0.0, 1e-2) == 1e-2);
  CHECK(clamp_time(1.0, 1e-2) == 1 - 1e-2);
  CHECK(clamp_time(0.3, 1e-2) == 0.3);
  for (auto k : {ScheduleKind::kVp, ScheduleKind::kTrig, ScheduleKind::kCfmLinear, ScheduleKind::kTube}) {
    CHECK(parse_schedule_kind(to_string(k)) == k);
  }
}
