// Copyright 2026 The bridgematch Authors
// SPDX-License-Identifier: Apache-2.0
//
// Regression targets (x_t, u*, d*) for Flow Matching baselines and the
// conditional / marginal Bridge Matching constructions.

#pragma once

#include <string>
#include <string_view>

#include "bridgematch/numerics.hpp"
#include "bridgematch/schedules.hpp"

namespace bm {

enum class TargetKind {
  kCfmLinear,
  kCfmDiffusion,
  kCbmLinear,
  kCbmDiffusion,
  kMbmLinear,
  kMbmDiffusion,
};

std::string_view to_string(TargetKind kind);
TargetKind parse_target_kind(std::string_view name);
/// True for the four Bridge Matching kinds (non-zero osmotic target).
bool is_bridge_matching(TargetKind kind);
bool is_diffusion_path(TargetKind kind);

/// `median` derives h from the batch; otherwise `fixed` is used as-is.
struct KdeBandwidth {
  bool median = true;
  double fixed = 0.0;

  static KdeBandwidth median_rule() { return {}; }
  static KdeBandwidth constant(double h) { return {false, h}; }

  friend bool operator==(const KdeBandwidth&, const KdeBandwidth&) = default;
};

struct TargetSpec {
  TargetKind kind = TargetKind::kCfmLinear;
  /// Osmotic scale; already includes the factor 1/2 of d = (beta/2) grad log p.
  double beta_impl = 0.0;
  double sigma_min = 0.01;
  double t_eps = 1e-2;
  KdeBandwidth kde_bandwidth;
  /// Path schedule for the diffusion kinds.
  ScheduleKind diffusion_schedule = ScheduleKind::kVp;
  double beta_min = 0.1;
  double beta_max = 20.0;

  /// Per-kind defaults: diffusion kinds beta 0.01 / sigma_min 0.05, linear tube
  /// kinds beta 0.1 / sigma_min 0.1, CFM-Linear sigma_min 0.01.
  static TargetSpec defaults(TargetKind kind);

  /// The schedule that generates x_t for this kind. MBM-Linear has no sigma and
  /// reports the tube schedule only for its alpha(t) = t.
  [[nodiscard]] Schedule schedule() const;
  void validate() const;

  friend bool operator==(const TargetSpec&, const TargetSpec&) = default;
};

struct TargetBatch {
  Batch x_t;
  Batch u_star;
  Batch d_star;
  /// Total velocity; u_star + d_star reproduces it.
  Batch v_star;
  TimeBatch t;
};

/// Clamps each entry into [t_eps, 1 - t_eps].
TimeBatch clamp_times(const TimeBatch& t, double t_eps);

TargetBatch cfm_linear_target(const Batch& x0, const Batch& x1, const TimeBatch& t,
                              const TargetSpec& spec);
TargetBatch cfm_diffusion_target(const Batch& x0, const Batch& x1, const TimeBatch& t,
                                 const TargetSpec& spec);
/// Draws the tube noise from `rng`.
TargetBatch cbm_linear_target(const Batch& x0, const Batch& x1, const TimeBatch& t, Rng& rng,
                              const TargetSpec& spec);
/// Same construction with caller-supplied tube noise eps.
TargetBatch cbm_linear_target(const Batch& x0, const Batch& x1, const TimeBatch& t,
                              const Batch& eps, const TargetSpec& spec);
TargetBatch cbm_diffusion_target(const Batch& x0, const Batch& x1, const TimeBatch& t,
                                 const TargetSpec& spec);
TargetBatch mbm_linear_target(const Batch& x0, const Batch& x1, const TimeBatch& t,
                              const TargetSpec& spec);
TargetBatch mbm_diffusion_target(const Batch& x0, const Batch& x1, const TimeBatch& t,
                                 const TargetSpec& spec);

/// Dispatches on spec.kind; `rng` is only consumed by CBM-Linear.
TargetBatch build_targets(const Batch& x0, const Batch& x1, const TimeBatch& t, Rng& rng,
                          const TargetSpec& spec);

/// Leave-one-out Gaussian-kernel score estimate at every batch point:
/// (sum_{j != i} w_ij x_j - x_i) / h^2 with w_i. a softmax of -|x_i - x_j|^2 / 2h^2.
Batch kde_score(const Batch& xt, double h);

/// Median pairwise distance times B^(-1/6). The median is taken over the first
/// min(B, 1024) rows.
double median_bandwidth(const Batch& xt);
double resolve_bandwidth(const KdeBandwidth& rule, const Batch& xt);

}  // namespace bm
