// Copyright 2026 The bridgematch Authors
// SPDX-License-Identifier: Apache-2.0
//
// Command-line pipelines. Every command writes into <root>/<run-id>/ where
// root is --out, else $BMATCH_OUT, else "out", and run-id hashes the command
// together with its fully resolved settings (so identical reruns land in the
// same directory).
//
// Config precedence for `train`: built-in defaults < --config file < named
// flags (--source, --target, --kind, --seed, --iterations) < --set key=value.
//
// Exit codes: 0 success, 1 usage or config error, 2 runtime failure,
// 3 oracle-check failure.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bridgematch/metrics.hpp"
#include "bridgematch/sampling.hpp"
#include "bridgematch/training.hpp"

namespace bm {

/// Fixed evaluation protocol: n generated points from the model's source
/// against n fresh target points, both from dedicated seed streams.
struct EvalSpec {
  std::size_t n = 10'000;
  Method method = Method::kMidpoint;
  double step = 0.01;
  std::uint64_t seed = 42;
  MmdOptions mmd;
};

struct EvalOutcome {
  MetricsReport report;
  /// Mean |lambda_d * d| over the evaluation source points at five times.
  double mean_d_contribution = 0.0;
  Batch generated;
};

EvalOutcome evaluate_checkpoint(const Checkpoint& ckpt, double lambda_u, double lambda_d,
                                const EvalSpec& spec);

struct SweepRow {
  double lambda_d = 0.0;
  MetricsReport report;
  double mean_d_contribution = 0.0;
};

/// lambda_u = 1 throughout; one row per lambda_d.
std::vector<SweepRow> lambda_sweep(const Checkpoint& ckpt, const std::vector<double>& lambda_d,
                                   const EvalSpec& spec);
std::string format_sweep_table(const std::vector<SweepRow>& rows);

/// Mean |MMD^2| between pairs of independent n-point draws of `spec`, one
/// pair per seed in [base_seed, base_seed + seeds).
double self_noise_floor(const DatasetSpec& spec, std::size_t n, std::size_t seeds,
                        std::uint64_t base_seed = 0, const MmdOptions& opt = {});

/// 64-bit FNV-1a, rendered as 16 hex digits.
std::string fnv1a_hex(const std::string& text);

int run(int argc, const char* const* argv);
int run(const std::vector<std::string>& args);

}  // namespace bm
