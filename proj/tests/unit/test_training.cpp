// Copyright 2026 The bridgematch Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <cstring>
#include <filesystem>

#include "bridgematch/checkpoint.hpp"
#include "bridgematch/config.hpp"
#include "bridgematch/training.hpp"

using namespace bm;

namespace {

TrainConfig smoke_config(std::size_t iterations) {
  TrainConfig cfg;
  cfg.source = DatasetSpec::of(DatasetKind::kGaussian);
  cfg.target = DatasetSpec::of(DatasetKind::kGaussian);
  cfg.target.mean = {3.0, -2.0};
  cfg.target_spec = TargetSpec::defaults(TargetKind::kCfmLinear);
  cfg.hidden = 64;
  cfg.batch_size = 256;
  cfg.iterations = iterations;
  cfg.log_interval = 100;
  return cfg;
}

Batch probe_batch() {
  Rng rng(77, Stream::kProbe);
  return rng_standard_normal(rng, 128, 2);
}

}  // namespace

TEST_CASE("bridge-matching loss") {
  Rng rng(1);
  const Batch u = rng_standard_normal(rng, 8, 2);
  const Batch d = rng_standard_normal(rng, 8, 2);
  const Batch us = rng_standard_normal(rng, 8, 2);
  const Batch ds = rng_standard_normal(rng, 8, 2);
  CHECK(compute_bm_loss(u, d, u, d, 1.0).loss == 0.0);
  const BmLoss no_d = compute_bm_loss(u, d, us, ds, 0.0);
  CHECK(no_d.loss == compute_bm_loss(u, us, us, ds, 0.0).loss);
  CHECK(no_d.d_cotangent == Batch(8, 2, 0.0));
  const BmLoss one = compute_bm_loss(u, d, us, ds, 0.7);
  const BmLoss two = compute_bm_loss(u, d, us, ds, 1.4);
  CHECK(two.loss - one.loss == doctest::Approx(0.7 * one.d_term).epsilon(1e-12));
  double manual = 0.0;
  for (std::size_t r = 0; r < 8; ++r) {
    manual += std::pow(u(r, 0) - us(r, 0), 2) + std::pow(u(r, 1) - us(r, 1), 2);
  }
  CHECK(one.u_term == doctest::Approx(manual / 8));
  CHECK(one.u_cotangent(3, 1) == doctest::Approx(2 * (u(3, 1) - us(3, 1)) / 8));
  CHECK(one.d_cotangent(2, 0) == doctest::Approx(2 * 0.7 * (d(2, 0) - ds(2, 0)) / 8));
}

TEST_CASE("zero iterations returns the initialization") {
  const TrainConfig cfg = smoke_config(0);
  const Checkpoint a = train(cfg);
  const Checkpoint b = initial_checkpoint(cfg);
  CHECK(a == b);
  CHECK(a.iteration == 0);
}

TEST_CASE("smoke run: gaussian to shifted gaussian") {
  TrainConfig cfg = smoke_config(2000);
  cfg.log_interval = 1;
  std::vector<LogRecord> log;
  const Checkpoint ckpt = train(cfg, [&](const LogRecord& r) { log.push_back(r); });
  REQUIRE(log.size() == 2000);
  CHECK(log.front().iteration == 1);
  CHECK(log.back().iteration == 2000);
  // Single minibatch losses are noisy; the final loss is averaged over the last 200 steps.
  double tail = 0.0;
  for (std::size_t i = 1800; i < 2000; ++i) tail += log[i].loss / 200;
  CHECK(tail < log.front().loss / 5);
  CHECK(ckpt.iteration == 2000);
  CHECK(ckpt.u.all_finite());
  CHECK(to_json_line(log.back()).find("\"iteration\"") != std::string::npos);

  CHECK(serialize_checkpoint(train(cfg)) == serialize_checkpoint(ckpt));
}

TEST_CASE("a CFM target drives the d network to zero") {
  TrainConfig cfg = smoke_config(5000);
  cfg.log_interval = 1000;
  const Checkpoint ckpt = train(cfg);
  const Batch probe = probe_batch();
  const FieldMagnitudes m = field_magnitude_stats(ckpt, probe, TimeBatch(probe.rows(), 0.5));
  CHECK(m.mean_d < 1e-2);
  CHECK(m.mean_u > 1.0);
}

TEST_CASE("smoothed loss does not increase") {
  TrainConfig cfg = smoke_config(3000);
  cfg.batch_size = 4096;
  cfg.log_interval = 1;
  std::vector<double> loss;
  train(cfg, [&](const LogRecord& r) { loss.push_back(r.loss); });
  REQUIRE(loss.size() == 3000);
  double prev = 1e300;
  for (std::size_t start = 0; start + 1000 <= loss.size(); start += 1000) {
    double s = 0.0;
    for (std::size_t i = start; i < start + 1000; ++i) s += loss[i];
    CHECK(s / 1000 <= prev);
    prev = s / 1000;
  }
}

TEST_CASE("divergence is reported") {
  TrainConfig cfg = smoke_config(200);
  cfg.optimizer.lr = 1e6;
  cfg.target.mean = {1e150, 1e150};
  CHECK_THROWS_AS(train(cfg), TrainingDiverged);
}

TEST_CASE("field magnitudes") {
  const TrainConfig cfg = smoke_config(0);
  const Checkpoint ckpt = initial_checkpoint(cfg);
  const Batch probe = probe_batch();
  const TimeBatch t(probe.rows(), 0.3);
  const FieldMagnitudes same = field_magnitude_stats(ckpt.u, ckpt.u, probe, t);
  CHECK(same.ratio == doctest::Approx(1.0).epsilon(1e-6));
  const MlpParams zero = MlpParams::zeros(64);
  CHECK(field_magnitude_stats(ckpt.u, zero, probe, t).ratio == 0.0);
  const FieldMagnitudes guard = field_magnitude_stats(zero, ckpt.d, probe, t);
  CHECK(std::isfinite(guard.ratio));
  CHECK(guard.ratio == doctest::Approx(guard.mean_d / 1e-8));
}

TEST_CASE("checkpoint round trip") {
  TrainConfig cfg = smoke_config(50);
  cfg.target_spec = TargetSpec::defaults(TargetKind::kCbmLinear);
  const Checkpoint ckpt = train(cfg);
  const auto dir = std::filesystem::temp_directory_path() / "bridgematch_unit_ckpt";
  std::filesystem::create_directories(dir);
  save_checkpoint(ckpt, dir / "c.bin");
  const Checkpoint back = load_checkpoint(dir / "c.bin");
  CHECK(back == ckpt);
  const Batch probe = probe_batch();
  CHECK(mlp_forward(back.u, probe, 0.4) == mlp_forward(ckpt.u, probe, 0.4));
  CHECK(mlp_forward(back.d, probe, 0.4) == mlp_forward(ckpt.d, probe, 0.4));

  std::string bytes = serialize_checkpoint(ckpt);
  CHECK_THROWS_AS(deserialize_checkpoint(bytes.substr(0, bytes.size() - 8)), CheckpointError);
  std::string bad_magic = bytes;
  bad_magic[0] = 'X';
  CHECK_THROWS_AS(deserialize_checkpoint(bad_magic), CheckpointError);
  std::string nan_payload = bytes;
  const double nan = std::nan("");
  std::memcpy(nan_payload.data() + nan_payload.size() - 8, &nan, 8);
  CHECK_THROWS_AS(deserialize_checkpoint(nan_payload), CheckpointError);
  CHECK_THROWS(load_checkpoint(dir / "missing.bin"));
  std::filesystem::remove_all(dir);
}

TEST_CASE("config text") {
  TrainConfig cfg = smoke_config(123);
  cfg.target_spec = TargetSpec::defaults(TargetKind::kMbmDiffusion);
  cfg.target_spec.kde_bandwidth = KdeBandwidth::constant(0.37);
  cfg.optimizer.weight_decay = 1e-4;
  TrainConfig back;
  apply_config(back, parse_config(to_config_text(cfg)));
  CHECK(back == cfg);
  CHECK(train_config_from_json(to_json(cfg)) == cfg);

  TrainConfig c;
  CHECK_THROWS_AS(apply_config(c, parse_config("train.nonsense = 1\n")), ConfigError);
  CHECK_THROWS_AS(apply_config(c, parse_config("train.hidden = many\n")), ConfigError);
  const auto kv = parse_assignment("train.lr=5e-4");
  CHECK(kv.first == "train.lr");
  CHECK(kv.second == "5e-4");

  TrainConfig k;
  apply_config(k, parse_config("# comment\ntarget.kind = cbm_diffusion\n"));
  CHECK(k.target_spec.beta_impl == 0.01);
  CHECK(k.target_spec.sigma_min == 0.05);
  apply_config(k, parse_config("target.kind = cbm_linear\ntarget.beta_impl = 0.3\n"));
  CHECK(k.target_spec.beta_impl == 0.3);
  CHECK(k.target_spec.sigma_min == 0.1);
  CHECK(parse_double(format_double(0.1 + 0.2)) == 0.1 + 0.2);
}
