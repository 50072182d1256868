// Copyright 2026 The bridgematch Authors
// SPDX-License-Identifier: Apache-2.0

#include "bridgematch/training.hpp"

#include "json.hpp"

#include <cmath>
#include <string>

namespace bm {

void TrainConfig::validate() const {
  source.validate();
  target.validate();
  target_spec.validate();
  if (batch_size == 0) throw std::invalid_argument("train: batch_size must be positive");
  if (hidden == 0) throw std::invalid_argument("train: hidden must be positive");
  if (log_interval == 0) throw std::invalid_argument("train: log_interval must be positive");
  if (!(lambda_d >= 0.0)) throw std::invalid_argument("train: lambda_d must be >= 0");
  if (target_spec.kind == TargetKind::kMbmLinear || target_spec.kind == TargetKind::kMbmDiffusion) {
    if (batch_size < 2) throw std::invalid_argument("train: MBM targets need batch_size >= 2");
  }
  AdamW probe(MlpParams::zeros(1), optimizer);
  (void)probe;
}

Checkpoint initial_checkpoint(const TrainConfig& cfg) {
  Rng init_u(cfg.seed, Stream::kInitU);
  Rng init_d(cfg.seed, Stream::kInitD);
  Checkpoint ckpt;
  ckpt.u = MlpParams::init(cfg.hidden, init_u);
  ckpt.d = MlpParams::init(cfg.hidden, init_d);
  ckpt.config = cfg;
  ckpt.iteration = 0;
  return ckpt;
}

BmLoss compute_bm_loss(const Batch& u_pred, const Batch& d_pred, const Batch& u_star,
                       const Batch& d_star, double lambda_d) {
  require_same_shape(u_pred, u_star, "compute_bm_loss(u)");
  require_same_shape(d_pred, d_star, "compute_bm_loss(d)");
  require_same_shape(u_pred, d_pred, "compute_bm_loss");
  if (u_pred.rows() == 0) throw std::invalid_argument("compute_bm_loss: empty batch");
  const double inv_b = 1.0 / static_cast<double>(u_pred.rows());
  BmLoss out{0.0, 0.0, 0.0, Batch(u_pred.rows(), u_pred.cols()),
             Batch(d_pred.rows(), d_pred.cols())};
  double su = 0.0;
  double sd = 0.0;
  for (std::size_t i = 0; i < u_pred.size(); ++i) {
    const double eu = u_pred.data()[i] - u_star.data()[i];
    const double ed = d_pred.data()[i] - d_star.data()[i];
    su += eu * eu;
    sd += ed * ed;
    out.u_cotangent.data()[i] = 2.0 * eu * inv_b;
    out.d_cotangent.data()[i] = 2.0 * lambda_d * ed * inv_b;
  }
  out.u_term = su * inv_b;
  out.d_term = sd * inv_b;
  out.loss = out.u_term + lambda_d * out.d_term;
  return out;
}

std::string to_json_line(const LogRecord& r) {
  nlohmann::ordered_json j;
  j["iteration"] = r.iteration;
  j["loss"] = r.loss;
  j["mean_u"] = r.mean_u;
  j["mean_d"] = r.mean_d;
  return j.dump();
}

TrainingDiverged::TrainingDiverged(std::uint64_t iteration, double loss)
    : std::runtime_error("training diverged at iteration " + std::to_string(iteration) +
                         " (loss = " + std::to_string(loss) + ")"),
      iteration_(iteration) {}

Checkpoint train(const TrainConfig& cfg, const TrainObserver& observer) {
  cfg.validate();
  Checkpoint ckpt = initial_checkpoint(cfg);
  AdamW opt_u(ckpt.u, cfg.optimizer);
  AdamW opt_d(ckpt.d, cfg.optimizer);

  Rng source_rng(cfg.seed, Stream::kSource);
  Rng target_rng(cfg.seed, Stream::kTarget);
  Rng time_rng(cfg.seed, Stream::kTime);
  Rng noise_rng(cfg.seed, Stream::kNoise);

  const std::size_t b = cfg.batch_size;
  TimeBatch t(b);
  MlpTape tape_u;
  MlpTape tape_d;
  GradBundle gu = MlpParams::zeros_like(ckpt.u);
  GradBundle gd = MlpParams::zeros_like(ckpt.d);
  Eigen::MatrixXd cot_u;
  Eigen::MatrixXd cot_d;
  for (std::uint64_t it = 1; it <= cfg.iterations; ++it) {
    const Batch x0 = sample(cfg.source, source_rng, b);
    const Batch x1 = sample(cfg.target, target_rng, b);
    for (double& ti : t) ti = time_rng.uniform();
    const TargetBatch tb = build_targets(x0, x1, t, noise_rng, cfg.target_spec);

    mlp_forward_tape(ckpt.u, tb.x_t, tb.t, tape_u);
    mlp_forward_tape(ckpt.d, tb.x_t, tb.t, tape_d);
    const Batch u_pred = to_batch(tape_u.output);
    const Batch d_pred = to_batch(tape_d.output);
    const BmLoss loss = compute_bm_loss(u_pred, d_pred, tb.u_star, tb.d_star, cfg.lambda_d);
    if (!std::isfinite(loss.loss)) throw TrainingDiverged(it, loss.loss);

    if (observer && (it == 1 || it % cfg.log_interval == 0 || it == cfg.iterations)) {
      observer(LogRecord{it, loss.loss, mean_row_norm(u_pred), mean_row_norm(d_pred)});
    }

    cot_u = to_matrix(loss.u_cotangent);
    cot_d = to_matrix(loss.d_cotangent);
    mlp_backward(ckpt.u, tape_u, cot_u, gu);
    mlp_backward(ckpt.d, tape_d, cot_d, gd);
    opt_u.step(ckpt.u, gu);
    opt_d.step(ckpt.d, gd);
    ckpt.iteration = it;
  }
  if (!ckpt.u.all_finite() || !ckpt.d.all_finite()) {
    throw TrainingDiverged(ckpt.iteration, std::nan(""));
  }
  return ckpt;
}

FieldMagnitudes field_magnitude_stats(const MlpParams& u, const MlpParams& d, const Batch& probe,
                                      const TimeBatch& t) {
  if (probe.rows() == 0) throw std::invalid_argument("field_magnitude_stats: empty probe");
  FieldMagnitudes out;
  out.mean_u = mean_row_norm(mlp_forward(u, probe, t));
  out.mean_d = mean_row_norm(mlp_forward(d, probe, t));
  out.ratio = out.mean_d / (out.mean_u + 1e-8);
  return out;
}

FieldMagnitudes field_magnitude_stats(const Checkpoint& ckpt, const Batch& probe,
                                      const TimeBatch& t) {
  return field_magnitude_stats(ckpt.u, ckpt.d, probe, t);
}

}  // namespace bm
