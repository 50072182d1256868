// Copyright 2026 The bridgematch Authors
// SPDX-License-Identifier: Apache-2.0

#include "bridgematch/sampling.hpp"

#include <cmath>
#include <sstream>
#include <string>

namespace bm {

std::string_view to_string(Direction d) {
  return d == Direction::kForward ? "forward" : "backward";
}

Direction parse_direction(std::string_view name) {
  if (name == "forward") return Direction::kForward;
  if (name == "backward") return Direction::kBackward;
  throw std::invalid_argument("unknown direction '" + std::string(name) + "'");
}

std::string_view to_string(Method m) {
  switch (m) {
    case Method::kEuler: return "euler";
    case Method::kMidpoint: return "midpoint";
    case Method::kHeun2: return "heun2";
  }
  return "?";
}

Method parse_method(std::string_view name) {
  if (name == "euler") return Method::kEuler;
  if (name == "midpoint") return Method::kMidpoint;
  if (name == "heun2" || name == "heun") return Method::kHeun2;
  throw std::invalid_argument("unknown integration method '" + std::string(name) + "'");
}

namespace {

// u and d share the input, so the combination is done in one pass per net.
Batch combine(const Checkpoint& ckpt, double lu, double ld, const Batch& x, const TimeBatch& t) {
  Batch out(x.rows(), kMlpOutputDim);
  if (lu != 0.0) {
    const Batch u = mlp_forward(ckpt.u, x, t);
    for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] += lu * u.data()[i];
  }
  if (ld != 0.0) {
    const Batch d = mlp_forward(ckpt.d, x, t);
    for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] += ld * d.data()[i];
  }
  return out;
}

}  // namespace

Batch eval_forward(const RecombinedField& f, const Batch& x, const TimeBatch& t) {
  if (f.direction != Direction::kForward) {
    throw std::invalid_argument("eval_forward: field is backward");
  }
  return combine(*f.ckpt, f.lambda_u, f.lambda_d, x, t);
}

Batch eval_backward(const RecombinedField& f, const Batch& x, const TimeBatch& t) {
  if (f.direction != Direction::kBackward) {
    throw std::invalid_argument("eval_backward: field is forward");
  }
  TimeBatch reflected(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) reflected[i] = 1.0 - t[i];
  return combine(*f.ckpt, -f.lambda_u, f.lambda_d, x, reflected);
}

Batch RecombinedField::operator()(const Batch& x, double t) const {
  const TimeBatch tb(x.rows(), t);
  return direction == Direction::kForward ? eval_forward(*this, x, tb) : eval_backward(*this, x, tb);
}

IntegrationError::IntegrationError(double last_finite_time, const std::string& what)
    : std::runtime_error(what), last_finite_time_(last_finite_time) {}

std::size_t step_count(double step) {
  if (!(step > 0.0) || !(step <= 1.0)) {
    throw std::invalid_argument("integrate: step must be in (0, 1]");
  }
  // Tolerate 1/step landing a hair above an integer (0.01 -> 100.00000000000001).
  const double q = 1.0 / step;
  const double r = std::round(q);
  if (std::abs(q - r) <= 1e-9 * r) return static_cast<std::size_t>(r);
  return static_cast<std::size_t>(std::ceil(q));
}

double grid_time(std::size_t k, double step, std::size_t n_steps) {
  if (k >= n_steps) return 1.0;
  return std::min(static_cast<double>(k) * step, 1.0);
}

Trajectory integrate(const VectorField& f, const Batch& x0, Method method, double step,
                     std::size_t record) {
  if (record < 2) throw std::invalid_argument("integrate: record must be >= 2");
  const std::size_t n = step_count(step);
  if (record - 1 > n) {
    throw std::invalid_argument("integrate: record - 1 exceeds the number of steps");
  }
  std::vector<std::size_t> keep(record);
  for (std::size_t j = 0; j < record; ++j) {
    keep[j] = static_cast<std::size_t>(
        std::llround(static_cast<double>(j) * static_cast<double>(n) / static_cast<double>(record - 1)));
  }

  Trajectory traj;
  traj.times.reserve(record);
  traj.states.reserve(record);
  Batch x = x0;
  if (!x.all_finite()) throw IntegrationError(0.0, "integrate: initial state is not finite");
  std::size_t next = 0;
  auto maybe_record = [&](std::size_t k) {
    while (next < record && keep[next] == k) {
      traj.times.push_back(grid_time(k, step, n));
      traj.states.push_back(x);
      ++next;
    }
  };
  maybe_record(0);

  for (std::size_t k = 0; k < n; ++k) {
    const double t = grid_time(k, step, n);
    const double h = grid_time(k + 1, step, n) - t;
    switch (method) {
      case Method::kEuler: {
        x = axpy(x, h, f(x, t));
        break;
      }
      case Method::kMidpoint: {
        const Batch mid = axpy(x, 0.5 * h, f(x, t));
        x = axpy(x, h, f(mid, t + 0.5 * h));
        break;
      }
      case Method::kHeun2: {
        const Batch k1 = f(x, t);
        const Batch pred = axpy(x, h, k1);
        const Batch k2 = f(pred, t + h);
        for (std::size_t i = 0; i < x.size(); ++i) {
          x.data()[i] += 0.5 * h * (k1.data()[i] + k2.data()[i]);
        }
        break;
      }
    }
    if (!x.all_finite()) {
      std::ostringstream msg;
      msg << "integrate: state became non-finite after t = " << t;
      throw IntegrationError(t, msg.str());
    }
    maybe_record(k + 1);
  }
  return traj;
}

Trajectory generate_trajectory(const Checkpoint& ckpt, const Batch& x0, const SampleOptions& opt,
                               Direction direction) {
  const RecombinedField field(ckpt, opt.lambda_u, opt.lambda_d, direction);
  return integrate(field, x0, opt.method, opt.step, opt.record);
}

Batch generate(const Checkpoint& ckpt, const DatasetSpec& source, std::size_t n,
               const SampleOptions& opt, Rng& rng) {
  if (n == 0) throw std::invalid_argument("generate: n must be >= 1");
  const Batch x0 = sample(source, rng, n);
  SampleOptions o = opt;
  o.record = 2;
  return generate_trajectory(ckpt, x0, o).final_state();
}

}  // namespace bm
