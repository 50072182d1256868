// Copyright 2026 The bridgematch Authors
// SPDX-License-Identifier: Apache-2.0

#include "bridgematch/targets.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace bm {

std::string_view to_string(TargetKind kind) {
  switch (kind) {
    case TargetKind::kCfmLinear: return "cfm_linear";
    case TargetKind::kCfmDiffusion: return "cfm_diffusion";
    case TargetKind::kCbmLinear: return "cbm_linear";
    case TargetKind::kCbmDiffusion: return "cbm_diffusion";
    case TargetKind::kMbmLinear: return "mbm_linear";
    case TargetKind::kMbmDiffusion: return "mbm_diffusion";
  }
  return "unknown";
}

TargetKind parse_target_kind(std::string_view name) {
  if (name == "cfm_linear") return TargetKind::kCfmLinear;
  if (name == "cfm_diffusion") return TargetKind::kCfmDiffusion;
  if (name == "cbm_linear") return TargetKind::kCbmLinear;
  if (name == "cbm_diffusion") return TargetKind::kCbmDiffusion;
  if (name == "mbm_linear") return TargetKind::kMbmLinear;
  if (name == "mbm_diffusion") return TargetKind::kMbmDiffusion;
  throw std::invalid_argument("unknown target kind '" + std::string(name) + "'");
}

bool is_bridge_matching(TargetKind kind) {
  return kind != TargetKind::kCfmLinear && kind != TargetKind::kCfmDiffusion;
}

bool is_diffusion_path(TargetKind kind) {
  return kind == TargetKind::kCfmDiffusion || kind == TargetKind::kCbmDiffusion ||
         kind == TargetKind::kMbmDiffusion;
}

TargetSpec TargetSpec::defaults(TargetKind kind) {
  TargetSpec s;
  s.kind = kind;
  switch (kind) {
    case TargetKind::kCfmLinear:
      s.beta_impl = 0.0;
      s.sigma_min = 0.01;
      break;
    case TargetKind::kCfmDiffusion:
      s.beta_impl = 0.0;
      s.sigma_min = 0.05;
      break;
    case TargetKind::kCbmDiffusion:
    case TargetKind::kMbmDiffusion:
      s.beta_impl = 0.01;
      s.sigma_min = 0.05;
      break;
    case TargetKind::kCbmLinear:
    case TargetKind::kMbmLinear:
      s.beta_impl = 0.1;
      s.sigma_min = 0.1;
      break;
  }
  return s;
}

Schedule TargetSpec::schedule() const {
  switch (kind) {
    case TargetKind::kCfmLinear: return Schedule::cfm_linear(sigma_min);
    case TargetKind::kCbmLinear:
    case TargetKind::kMbmLinear: return Schedule::tube(sigma_min);
    case TargetKind::kCfmDiffusion:
    case TargetKind::kCbmDiffusion:
    case TargetKind::kMbmDiffusion:
      return diffusion_schedule == ScheduleKind::kTrig ? Schedule::trig()
                                                       : Schedule::vp(beta_min, beta_max);
  }
  throw std::logic_error("TargetSpec::schedule: unhandled kind");
}

void TargetSpec::validate() const {
  if (is_bridge_matching(kind) && !(beta_impl > 0.0)) {
    throw std::invalid_argument("target: beta_impl must be > 0 for bridge matching kinds");
  }
  if (!(sigma_min > 0.0)) throw std::invalid_argument("target: sigma_min must be > 0");
  if (!(t_eps >= 0.0) || !(t_eps < 0.5)) {
    throw std::invalid_argument("target: t_eps must lie in [0, 0.5)");
  }
  if (!kde_bandwidth.median && !(kde_bandwidth.fixed > 0.0)) {
    throw std::invalid_argument("target: fixed KDE bandwidth must be > 0");
  }
  if (is_diffusion_path(kind) && diffusion_schedule != ScheduleKind::kVp &&
      diffusion_schedule != ScheduleKind::kTrig) {
    throw std::invalid_argument("target: diffusion kinds need a vp or trig schedule");
  }
  (void)schedule();
}

namespace {

void check_endpoints(const Batch& x0, const Batch& x1, const TimeBatch& t, const char* what) {
  require_same_shape(x0, x1, what);
  if (x0.cols() != 2) throw std::invalid_argument(std::string(what) + ": batches must be B x 2");
  if (t.size() != x0.rows()) {
    throw std::invalid_argument(std::string(what) + ": t length != batch rows");
  }
}

TargetBatch make_batch(std::size_t rows, TimeBatch t) {
  return {Batch(rows, 2), Batch(rows, 2), Batch(rows, 2), Batch(rows, 2), std::move(t)};
}

/// u* = v* - d*, written after v* and d* are final.
void finish_transport(TargetBatch& out) {
  for (std::size_t i = 0; i < out.v_star.size(); ++i) {
    out.u_star.data()[i] = out.v_star.data()[i] - out.d_star.data()[i];
  }
}

/// x_t = alpha x1 + sigma x0 with v* = alpha_dot x1 + sigma_dot x0.
void affine_path(const Batch& x0, const Batch& x1, const Schedule& sched, TargetBatch& out) {
  for (std::size_t r = 0; r < x0.rows(); ++r) {
    const double tr = out.t[r];
    const double a = sched.alpha(tr);
    const double s = sched.sigma(tr);
    const double ad = sched.alpha_dot(tr);
    const double sd = sched.sigma_dot(tr);
    for (std::size_t c = 0; c < 2; ++c) {
      out.x_t(r, c) = a * x1(r, c) + s * x0(r, c);
      out.v_star(r, c) = ad * x1(r, c) + sd * x0(r, c);
    }
  }
}

void linear_path(const Batch& x0, const Batch& x1, TargetBatch& out) {
  for (std::size_t r = 0; r < x0.rows(); ++r) {
    const double tr = out.t[r];
    for (std::size_t c = 0; c < 2; ++c) {
      out.x_t(r, c) = (1.0 - tr) * x0(r, c) + tr * x1(r, c);
      out.v_star(r, c) = x1(r, c) - x0(r, c);
    }
  }
}

void kde_osmotic(const TargetSpec& spec, TargetBatch& out) {
  const double h = resolve_bandwidth(spec.kde_bandwidth, out.x_t);
  const Batch score = kde_score(out.x_t, h);
  for (std::size_t i = 0; i < score.size(); ++i) {
    out.d_star.data()[i] = spec.beta_impl * score.data()[i];
  }
}

}  // namespace

TimeBatch clamp_times(const TimeBatch& t, double t_eps) {
  TimeBatch out(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) out[i] = clamp_time(t[i], t_eps);
  return out;
}

TargetBatch cfm_linear_target(const Batch& x0, const Batch& x1, const TimeBatch& t,
                              const TargetSpec& spec) {
  check_endpoints(x0, x1, t, "cfm_linear_target");
  const Schedule sched = Schedule::cfm_linear(spec.sigma_min);
  TargetBatch out = make_batch(x0.rows(), clamp_times(t, spec.t_eps));
  for (std::size_t r = 0; r < x0.rows(); ++r) {
    const double tr = out.t[r];
    const double s = sched.sigma(tr);
    const double ratio = sched.sigma_dot(tr) / s;
    for (std::size_t c = 0; c < 2; ++c) {
      const double xt = tr * x1(r, c) + s * x0(r, c);
      out.x_t(r, c) = xt;
      out.v_star(r, c) = x1(r, c) + ratio * (xt - tr * x1(r, c));
    }
  }
  finish_transport(out);
  return out;
}

TargetBatch cfm_diffusion_target(const Batch& x0, const Batch& x1, const TimeBatch& t,
                                 const TargetSpec& spec) {
  check_endpoints(x0, x1, t, "cfm_diffusion_target");
  TargetBatch out = make_batch(x0.rows(), clamp_times(t, spec.t_eps));
  affine_path(x0, x1, spec.schedule(), out);
  finish_transport(out);
  return out;
}

TargetBatch cbm_linear_target(const Batch& x0, const Batch& x1, const TimeBatch& t, Rng& rng,
                              const TargetSpec& spec) {
  Batch eps(x0.rows(), 2);
  for (std::size_t i = 0; i < eps.size(); ++i) eps.data()[i] = rng.normal();
  return cbm_linear_target(x0, x1, t, eps, spec);
}

TargetBatch cbm_linear_target(const Batch& x0, const Batch& x1, const TimeBatch& t,
                              const Batch& eps, const TargetSpec& spec) {
  check_endpoints(x0, x1, t, "cbm_linear_target");
  require_same_shape(x0, eps, "cbm_linear_target");
  const Schedule sched = Schedule::tube(spec.sigma_min);
  TargetBatch out = make_batch(x0.rows(), clamp_times(t, spec.t_eps));
  for (std::size_t r = 0; r < x0.rows(); ++r) {
    const double tr = out.t[r];
    const double s = sched.sigma(tr);
    const double ratio = sched.sigma_dot(tr) / s;
    const double inv_var = 1.0 / (s * s);
    for (std::size_t c = 0; c < 2; ++c) {
      const double mean = (1.0 - tr) * x0(r, c) + tr * x1(r, c);
      const double xt = mean + s * eps(r, c);
      const double offset = xt - mean;
      out.x_t(r, c) = xt;
      out.d_star(r, c) = -spec.beta_impl * offset * inv_var;
      out.v_star(r, c) = (x1(r, c) - x0(r, c)) + ratio * offset;
    }
  }
  finish_transport(out);
  return out;
}

TargetBatch cbm_diffusion_target(const Batch& x0, const Batch& x1, const TimeBatch& t,
                                 const TargetSpec& spec) {
  check_endpoints(x0, x1, t, "cbm_diffusion_target");
  const Schedule sched = spec.schedule();
  TargetBatch out = make_batch(x0.rows(), clamp_times(t, spec.t_eps));
  affine_path(x0, x1, sched, out);
  for (std::size_t r = 0; r < x0.rows(); ++r) {
    const double tr = out.t[r];
    const double a = sched.alpha(tr);
    // sigma_min floors the score denominator near the data end.
    const double s = std::max(sched.sigma(tr), spec.sigma_min);
    const double inv_var = 1.0 / (s * s);
    for (std::size_t c = 0; c < 2; ++c) {
      out.d_star(r, c) = -spec.beta_impl * (out.x_t(r, c) - a * x1(r, c)) * inv_var;
    }
  }
  finish_transport(out);
  return out;
}

TargetBatch mbm_linear_target(const Batch& x0, const Batch& x1, const TimeBatch& t,
                              const TargetSpec& spec) {
  check_endpoints(x0, x1, t, "mbm_linear_target");
  if (x0.rows() < 2) throw std::invalid_argument("mbm_linear_target: need B >= 2");
  TargetBatch out = make_batch(x0.rows(), clamp_times(t, spec.t_eps));
  linear_path(x0, x1, out);
  kde_osmotic(spec, out);
  finish_transport(out);
  return out;
}

TargetBatch mbm_diffusion_target(const Batch& x0, const Batch& x1, const TimeBatch& t,
                                 const TargetSpec& spec) {
  check_endpoints(x0, x1, t, "mbm_diffusion_target");
  if (x0.rows() < 2) throw std::invalid_argument("mbm_diffusion_target: need B >= 2");
  TargetBatch out = make_batch(x0.rows(), clamp_times(t, spec.t_eps));
  affine_path(x0, x1, spec.schedule(), out);
  kde_osmotic(spec, out);
  finish_transport(out);
  return out;
}

TargetBatch build_targets(const Batch& x0, const Batch& x1, const TimeBatch& t, Rng& rng,
                          const TargetSpec& spec) {
  switch (spec.kind) {
    case TargetKind::kCfmLinear: return cfm_linear_target(x0, x1, t, spec);
    case TargetKind::kCfmDiffusion: return cfm_diffusion_target(x0, x1, t, spec);
    case TargetKind::kCbmLinear: return cbm_linear_target(x0, x1, t, rng, spec);
    case TargetKind::kCbmDiffusion: return cbm_diffusion_target(x0, x1, t, spec);
    case TargetKind::kMbmLinear: return mbm_linear_target(x0, x1, t, spec);
    case TargetKind::kMbmDiffusion: return mbm_diffusion_target(x0, x1, t, spec);
  }
  throw std::logic_error("build_targets: unhandled kind");
}

Batch kde_score(const Batch& xt, double h) {
  if (xt.rows() < 2) throw std::invalid_argument("kde_score: leave-one-out needs B >= 2");
  if (!(h > 0.0)) throw std::invalid_argument("kde_score: bandwidth must be > 0");
  const std::size_t n = xt.rows();
  const std::size_t d = xt.cols();
  const double inv_two_h2 = 1.0 / (2.0 * h * h);
  const double inv_h2 = 1.0 / (h * h);
  Batch out(n, d);
  Eigen::ArrayXd logits(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    const auto xi = xt.row(i);
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j) {
      double sq = 0.0;
      const auto xj = xt.row(j);
      for (std::size_t c = 0; c < d; ++c) {
        const double diff = xi[c] - xj[c];
        sq += diff * diff;
      }
      const double l = j == i ? -std::numeric_limits<double>::infinity() : -sq * inv_two_h2;
      logits[static_cast<Eigen::Index>(j)] = l;
      best = std::max(best, l);
    }
    // Shift by the row maximum so the largest weight is exp(0) = 1.
    const Eigen::ArrayXd w = (logits - best).exp();
    const double total = w.sum();
    for (std::size_t c = 0; c < d; ++c) {
      double acc = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        // Centering on x_i keeps the weighted mean free of large-offset rounding.
        acc += w[static_cast<Eigen::Index>(j)] * (xt(j, c) - xi[c]);
      }
      out(i, c) = (acc / total) * inv_h2;
    }
  }
  return out;
}

double median_bandwidth(const Batch& xt) {
  if (xt.rows() < 2) throw std::invalid_argument("median_bandwidth: need B >= 2");
  const std::size_t m = std::min<std::size_t>(xt.rows(), 1024);
  std::vector<double> dist;
  dist.reserve(m * (m - 1) / 2);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i + 1; j < m; ++j) {
      double sq = 0.0;
      for (std::size_t c = 0; c < xt.cols(); ++c) {
        const double diff = xt(i, c) - xt(j, c);
        sq += diff * diff;
      }
      dist.push_back(sq);
    }
  }
  const std::size_t mid = dist.size() / 2;
  std::nth_element(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(mid), dist.end());
  double med = std::sqrt(dist[mid]);
  if (dist.size() % 2 == 0) {
    const double lower =
        *std::max_element(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(mid));
    med = 0.5 * (med + std::sqrt(lower));
  }
  const double h = med * std::pow(static_cast<double>(xt.rows()), -1.0 / 6.0);
  // All-identical batches: any positive h gives score 0.
  return h > 0.0 ? h : 1.0;
}

double resolve_bandwidth(const KdeBandwidth& rule, const Batch& xt) {
  return rule.median ? median_bandwidth(xt) : rule.fixed;
}

}  // namespace bm
