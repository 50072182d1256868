// Copyright 2026 The bridgematch Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <stdexcept>
#include <string_view>

#include "bridgematch/datasets.hpp"
#include "bridgematch/training.hpp"

namespace bm {

enum class Direction { kForward, kBackward };
std::string_view to_string(Direction d);
Direction parse_direction(std::string_view name);

/// lambda_u * u + lambda_d * d, or its time-reflected reverse:
///   forward:  v(x, t) =  lambda_u u(x, t) + lambda_d d(x, t)
///   backward: v(x, t) = -lambda_u u(x, 1 - t) + lambda_d d(x, 1 - t)
struct RecombinedField {
  const Checkpoint* ckpt = nullptr;
  double lambda_u = 1.0;
  double lambda_d = 1.0;
  Direction direction = Direction::kForward;

  RecombinedField(const Checkpoint& c, double lu, double ld, Direction dir = Direction::kForward)
      : ckpt(&c), lambda_u(lu), lambda_d(ld), direction(dir) {}

  [[nodiscard]] Batch operator()(const Batch& x, double t) const;
};

Batch eval_forward(const RecombinedField& f, const Batch& x, const TimeBatch& t);
Batch eval_backward(const RecombinedField& f, const Batch& x, const TimeBatch& t);

/// Any field evaluated at a common time for every row.
using VectorField = std::function<Batch(const Batch& x, double t)>;

enum class Method { kEuler, kMidpoint, kHeun2 };
std::string_view to_string(Method m);
Method parse_method(std::string_view name);

struct Trajectory {
  std::vector<double> times;
  std::vector<Batch> states;

  [[nodiscard]] const Batch& final_state() const { return states.back(); }
};

class IntegrationError : public std::runtime_error {
 public:
  IntegrationError(double last_finite_time, const std::string& what);
  [[nodiscard]] double last_finite_time() const { return last_finite_time_; }

 private:
  double last_finite_time_;
};

/// Number of fixed steps covering [0, 1]; the last one is shortened when
/// `step` does not divide 1.
std::size_t step_count(double step);
/// Time of the k-th grid node, k * step computed from the integer, capped at 1.
double grid_time(std::size_t k, double step, std::size_t n_steps);

/// Integrates dx/dt = f(x, t) from t = 0 to 1. `record` >= 2 states are kept at
/// step indices round(j * n / (record - 1)), which requires record - 1 <= n.
/// Heun2 is the explicit trapezoid (Euler predictor, averaged corrector).
Trajectory integrate(const VectorField& f, const Batch& x0, Method method, double step,
                     std::size_t record = 50);

struct SampleOptions {
  double lambda_u = 1.0;
  double lambda_d = 1.0;
  Method method = Method::kMidpoint;
  double step = 0.01;
  std::size_t record = 50;
};

/// Draws n source points and pushes them through the forward field.
Batch generate(const Checkpoint& ckpt, const DatasetSpec& source, std::size_t n,
               const SampleOptions& opt, Rng& rng);
Trajectory generate_trajectory(const Checkpoint& ckpt, const Batch& x0, const SampleOptions& opt,
                               Direction direction = Direction::kForward);

}  // namespace bm
