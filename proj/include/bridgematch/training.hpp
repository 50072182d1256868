// Copyright 2026 The bridgematch Authors
// SPDX-License-Identifier: Apache-2.0
//
// Bridge Matching training: two independent networks u_theta and d_phi are
// regressed onto the transport and osmotic targets of one construction.

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>

#include "bridgematch/datasets.hpp"
#include "bridgematch/nn.hpp"
#include "bridgematch/numerics.hpp"
#include "bridgematch/targets.hpp"

namespace bm {

struct TrainConfig {
  DatasetSpec source = DatasetSpec::of(DatasetKind::kGaussian);
  DatasetSpec target = DatasetSpec::of(DatasetKind::kMoons);
  TargetSpec target_spec = TargetSpec::defaults(TargetKind::kCfmLinear);
  std::size_t batch_size = 4096;
  std::size_t iterations = 100000;
  std::size_t hidden = 512;
  double lambda_d = 1.0;
  std::uint64_t seed = 42;
  std::size_t log_interval = 2000;
  AdamWConfig optimizer;

  void validate() const;

  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

struct Checkpoint {
  MlpParams u;
  MlpParams d;
  TrainConfig config;
  std::uint64_t iteration = 0;

  friend bool operator==(const Checkpoint&, const Checkpoint&) = default;
};

/// Networks at their seeded initial state, before any optimizer step.
Checkpoint initial_checkpoint(const TrainConfig& cfg);

struct BmLoss {
  double loss = 0.0;
  double u_term = 0.0;
  double d_term = 0.0;
  /// d loss / d u_pred = 2 (u_pred - u*) / B.
  Batch u_cotangent;
  /// d loss / d d_pred = 2 lambda_d (d_pred - d*) / B.
  Batch d_cotangent;
};

/// mean |u_pred - u*|^2 + lambda_d mean |d_pred - d*|^2 over rows.
BmLoss compute_bm_loss(const Batch& u_pred, const Batch& d_pred, const Batch& u_star,
                       const Batch& d_star, double lambda_d);

struct LogRecord {
  std::uint64_t iteration = 0;
  double loss = 0.0;
  double mean_u = 0.0;
  double mean_d = 0.0;
};

std::string to_json_line(const LogRecord& r);

class TrainingDiverged : public std::runtime_error {
 public:
  TrainingDiverged(std::uint64_t iteration, double loss);
  [[nodiscard]] std::uint64_t iteration() const { return iteration_; }

 private:
  std::uint64_t iteration_;
};

using TrainObserver = std::function<void(const LogRecord&)>;

/// Runs cfg.iterations AdamW steps on both networks. The observer sees the
/// iteration-1 record, every log_interval-th record, and the last one.
/// Throws TrainingDiverged if the loss turns non-finite.
Checkpoint train(const TrainConfig& cfg, const TrainObserver& observer = {});

struct FieldMagnitudes {
  double mean_u = 0.0;
  double mean_d = 0.0;
  /// mean_d / (mean_u + 1e-8).
  double ratio = 0.0;
};

FieldMagnitudes field_magnitude_stats(const Checkpoint& ckpt, const Batch& probe,
                                      const TimeBatch& t);
FieldMagnitudes field_magnitude_stats(const MlpParams& u, const MlpParams& d, const Batch& probe,
                                      const TimeBatch& t);

}  // namespace bm
