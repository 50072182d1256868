// Copyright 2026 The bridgematch Authors
// SPDX-License-Identifier: Apache-2.0
//
// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits nonzero if any selected criterion fails.
//
//   acceptance                 run everything
//   acceptance 3 7             run criteria 3 and 7
//   acceptance --iterations N  shorten training (development only; the
//                              thresholds still apply)

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <iostream>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "bridgematch/checkpoint.hpp"
#include "bridgematch/cli.hpp"
#include "bridgematch/metrics.hpp"
#include "bridgematch/oracle.hpp"
#include "bridgematch/sampling.hpp"
#include "bridgematch/targets.hpp"
#include "bridgematch/training.hpp"

namespace {

using namespace bm;

std::uint64_t g_iterations = 20'000;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

// ---------------------------------------------------------------- 1
Outcome gradient_check() {
  double worst = 0.0;
  Rng rng(2026, Stream::kProbe);
  for (int net = 0; net < 20; ++net) {
    Rng init = rng.split(static_cast<std::uint64_t>(net));
    MlpParams p = MlpParams::init(8, init);
    // Non-zero biases so every bias gradient path is exercised.
    for (auto& layer : p.layers) {
      for (Eigen::Index j = 0; j < layer.bias.size(); ++j) layer.bias(j) = init.uniform(-0.5, 0.5);
    }
    const std::size_t b = 5;
    Batch x = rng_standard_normal(init, b, 2);
    TimeBatch t(b);
    for (double& v : t) v = init.uniform();
    Batch cot = rng_standard_normal(init, b, 2);
    const GradBundle g = mlp_backward(p, x, t, cot);

    auto objective = [&](const MlpParams& q) {
      const Batch out = mlp_forward(q, x, t);
      double s = 0.0;
      for (std::size_t i = 0; i < out.size(); ++i) s += out.data()[i] * cot.data()[i];
      return s;
    };
    constexpr double h = 1e-6;
    for (std::size_t l = 0; l < kMlpLayers; ++l) {
      auto probe = [&](auto get, double analytic) {
        MlpParams plus = p;
        MlpParams minus = p;
        get(plus) += h;
        get(minus) -= h;
        const double fd = (objective(plus) - objective(minus)) / (2.0 * h);
        const double rel = std::abs(fd - analytic) / std::max({std::abs(fd), std::abs(analytic), 1e-3});
        worst = std::max(worst, rel);
      };
      for (Eigen::Index i = 0; i < p.layers[l].weight.rows(); ++i) {
        for (Eigen::Index j = 0; j < p.layers[l].weight.cols(); ++j) {
          probe([&](MlpParams& q) -> double& { return q.layers[l].weight(i, j); },
                g.layers[l].weight(i, j));
        }
      }
      for (Eigen::Index j = 0; j < p.layers[l].bias.size(); ++j) {
        probe([&](MlpParams& q) -> double& { return q.layers[l].bias(j); }, g.layers[l].bias(j));
      }
    }
  }
  return {worst < 1e-5, "max relative error " + fmt(worst) + " (threshold 1e-5)"};
}

// ---------------------------------------------------------------- 2
Outcome decomposition_identity() {
  double worst = 0.0;
  const std::vector<TargetKind> kinds{TargetKind::kCbmLinear, TargetKind::kCbmDiffusion,
                                      TargetKind::kMbmLinear, TargetKind::kMbmDiffusion};
  std::ostringstream detail;
  for (const TargetKind kind : kinds) {
    const TargetSpec spec = TargetSpec::defaults(kind);
    Rng data(7, Stream::kSource);
    Rng noise(7, Stream::kNoise);
    double kind_worst = 0.0;
    for (int rep = 0; rep < 100; ++rep) {
      const std::size_t b = 256;
      const Batch x0 = sample(DatasetSpec::of(DatasetKind::kGaussian), data, b);
      const Batch x1 = sample(DatasetSpec::of(DatasetKind::kMoons), data, b);
      TimeBatch t(b);
      for (double& v : t) v = data.uniform();
      const TargetBatch tb = build_targets(x0, x1, t, noise, spec);
      for (std::size_t i = 0; i < tb.v_star.size(); ++i) {
        const double r = tb.u_star.data()[i] + tb.d_star.data()[i] - tb.v_star.data()[i];
        kind_worst = std::max(kind_worst, std::abs(r));
      }
    }
    detail << to_string(kind) << "=" << fmt(kind_worst) << " ";
    worst = std::max(worst, kind_worst);
  }
  detail << "(threshold 1e-12)";
  return {worst < 1e-12, detail.str()};
}

// ---------------------------------------------------------------- 3
Outcome oracle_identities() {
  OracleSuiteOptions opt;
  opt.endpoints = default_oracle_endpoints();
  opt.beta = 0.2;
  opt.skip_monte_carlo = true;
  const std::vector<OracleCheck> checks = run_oracle_suite(opt);
  bool all = true;
  std::ostringstream detail;
  for (const OracleCheck& c : checks) {
    all = all && c.pass;
    detail << (c.pass ? "" : "!") << c.name << "=" << fmt(c.value) << " ";
  }
  return {all, detail.str()};
}

// ---------------------------------------------------------------- 4
Outcome score_recovery() {
  const GaussianEndpoints ep = default_oracle_endpoints();
  const TargetSpec spec = TargetSpec::defaults(TargetKind::kCbmDiffusion);
  bool all = true;
  std::ostringstream detail;
  std::uint64_t k = 0;
  for (const double t : {0.25, 0.5, 0.75}) {
    Rng rng = Rng(42, Stream::kProbe).split(k++);
    ScoreRecoveryOptions opt;
    opt.draws = 10'000'000;
    const ScoreRecoveryReport r = score_recovery_check(ep, spec, t, opt, rng);
    all = all && r.pass_fraction() >= 0.95;
    detail << "t=" << t << ": " << r.passing_bins << "/" << r.occupied_bins << " bins ("
           << fmt(r.pass_fraction()) << ") ";
  }
  detail << "(threshold 0.95)";
  return {all, detail.str()};
}

// ---------------------------------------------------------------- 5
Outcome kde_quality() {
  double total = 0.0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Rng rng(seed, Stream::kProbe);
    const Batch x = rng_standard_normal(rng, 4096, 2);
    const Batch s = kde_score(x, resolve_bandwidth(KdeBandwidth::median_rule(), x));
    double se = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double e = s.data()[i] + x.data()[i];
      se += e * e;
    }
    total += se / static_cast<double>(x.size());
  }
  const double mse = total / 10.0;
  return {mse < 0.5, "mean MSE " + fmt(mse) + " over 10 seeds (threshold 0.5)"};
}

// ---------------------------------------------------------------- 6
Outcome integrator_orders() {
  const VectorField decay = [](const Batch& x, double) { return scaled(x, -1.0); };
  Batch x0(3, 2);
  const double init[] = {1.0, -2.0, 0.5, 3.0, -1.5, 0.25};
  std::copy(std::begin(init), std::end(init), x0.data());
  bool all = true;
  std::ostringstream detail;
  for (const auto& [method, lo, hi] : {std::tuple{Method::kEuler, 0.9, 1.1},
                                       std::tuple{Method::kMidpoint, 1.9, 2.1},
                                       std::tuple{Method::kHeun2, 1.9, 2.1}}) {
    std::vector<double> err;
    for (const double h : {0.02, 0.01, 0.005}) {
      const Batch x1 = integrate(decay, x0, method, h, 2).final_state();
      double e = 0.0;
      for (std::size_t i = 0; i < x0.size(); ++i) {
        e = std::max(e, std::abs(x1.data()[i] - std::exp(-1.0) * x0.data()[i]));
      }
      err.push_back(e);
    }
    detail << to_string(method) << ":";
    for (std::size_t i = 0; i + 1 < err.size(); ++i) {
      const double order = std::log2(err[i] / err[i + 1]);
      all = all && order >= lo && order <= hi;
      detail << " " << fmt(order);
    }
    detail << " ";
  }
  return {all, detail.str()};
}

// ---------------------------------------------------------------- 7
Outcome metric_oracles() {
  Rng rng(11, Stream::kProbe);
  const std::size_t n = 500;
  Batch x = rng_standard_normal(rng, n, 2);
  Batch y = rng_standard_normal(rng, n, 2);
  for (std::size_t i = 0; i < n; ++i) {
    y(i, 0) = 1.2 * y(i, 0) + 0.5;
    y(i, 1) = 0.8 * y(i, 1) - 0.3;
  }
  // Independent brute force: sort every cross distance, then plain triple sums.
  std::vector<double> cross;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      cross.push_back(std::pow(x(i, 0) - y(j, 0), 2) + std::pow(x(i, 1) - y(j, 1), 2));
    }
  }
  std::sort(cross.begin(), cross.end());
  const double med = 0.5 * (cross[cross.size() / 2 - 1] + cross[cross.size() / 2]);
  const double sigma2 = med / 2.0;
  auto k = [&](const Batch& a, std::size_t i, const Batch& b, std::size_t j) {
    const double d2 = std::pow(a(i, 0) - b(j, 0), 2) + std::pow(a(i, 1) - b(j, 1), 2);
    return std::exp(-d2 / (2.0 * sigma2));
  };
  double sxx = 0.0;
  double syy = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i != j) {
        sxx += k(x, i, x, j);
        syy += k(y, i, y, j);
      }
      sxy += k(x, i, y, j);
    }
  }
  const double nn = static_cast<double>(n);
  const double naive = sxx / (nn * (nn - 1)) + syy / (nn * (nn - 1)) - 2.0 * sxy / (nn * nn);
  const MmdResult fast = mmd2_rbf(x, y);
  const double mmd_err = std::abs(fast.value - naive);

  Batch perm(n, 2);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t src = (i * 7919) % n;
    perm(i, 0) = x(src, 0);
    perm(i, 1) = x(src, 1);
  }
  const double fid_perm = fid_2d(x, perm);

  Moments2 r{{0.3, -1.0}, SymMat2::diag(1.7 * 1.7, 1.7 * 1.7)};
  Moments2 g{{-0.4, 0.5}, SymMat2::diag(0.6 * 0.6, 0.6 * 0.6)};
  const double closed = std::pow(0.7, 2) + std::pow(1.5, 2) + 2.0 * std::pow(1.7 - 0.6, 2);
  const double fid_err = std::abs(frechet_distance(r, g) - closed);

  const bool ok = mmd_err < 1e-12 && std::abs(fid_perm) < 1e-10 && fid_err < 1e-10;
  return {ok, "|mmd - naive| " + fmt(mmd_err) + ", fid(x, perm x) " + fmt(fid_perm) +
                  ", |fid - closed form| " + fmt(fid_err)};
}

TrainConfig reduced_config(TargetKind kind, DatasetKind target, std::uint64_t seed) {
  TrainConfig cfg;
  cfg.source = DatasetSpec::of(DatasetKind::kGaussian);
  cfg.target = DatasetSpec::of(target);
  cfg.target_spec = TargetSpec::defaults(kind);
  cfg.hidden = 128;
  cfg.batch_size = 1024;
  cfg.iterations = g_iterations;
  cfg.seed = seed;
  return cfg;
}

double elapsed_s(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - since).count();
}

// ---------------------------------------------------------------- 8
struct MoonsRun {
  std::string checkpoint_bytes;
  MetricsReport metrics;
};

MoonsRun moons_run() {
  const auto t0 = std::chrono::steady_clock::now();
  const Checkpoint ckpt = train(reduced_config(TargetKind::kCfmLinear, DatasetKind::kMoons, 42));
  EvalSpec spec;
  const EvalOutcome o = evaluate_checkpoint(ckpt, 1.0, 1.0, spec);
  std::cerr << "  moons run: " << fmt(elapsed_s(t0)) << " s\n";
  return {serialize_checkpoint(ckpt), o.report};
}

Outcome moons_generation() {
  const MoonsRun run = moons_run();
  const double floor = self_noise_floor(DatasetSpec::of(DatasetKind::kMoons), 10'000, 20, 1000);
  const double ratio = run.metrics.mmd2 / floor;
  return {ratio < 25.0, "mmd2 " + fmt(run.metrics.mmd2) + ", floor " + fmt(floor) + ", ratio " +
                            fmt(ratio) + " (threshold 25), fid2d " + fmt(run.metrics.fid2d)};
}

// ---------------------------------------------------------------- 9
double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

Outcome recombination_sweep() {
  const std::vector<double> lambdas{0.0, 0.5, 1.0, 1.5};
  std::vector<std::vector<double>> per_lambda(lambdas.size());
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto t0 = std::chrono::steady_clock::now();
    const Checkpoint ckpt =
        train(reduced_config(TargetKind::kCbmDiffusion, DatasetKind::kMixture, 42 + seed));
    EvalSpec spec;
    spec.seed = 42 + seed;
    const std::vector<SweepRow> rows = lambda_sweep(ckpt, lambdas, spec);
    std::cerr << "  seed " << 42 + seed << ":";
    for (std::size_t i = 0; i < rows.size(); ++i) {
      per_lambda[i].push_back(rows[i].report.mmd2);
      std::cerr << " " << fmt(rows[i].report.mmd2);
    }
    std::cerr << " (" << fmt(elapsed_s(t0)) << " s)\n";
  }
  std::ostringstream detail;
  std::vector<double> med;
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    med.push_back(median(per_lambda[i]));
    detail << "median mmd2(lambda_d=" << lambdas[i] << ")=" << fmt(med.back()) << " ";
  }
  const double best_positive = *std::min_element(med.begin() + 1, med.end());
  return {best_positive <= med[0], detail.str()};
}

// ---------------------------------------------------------------- 10
Outcome determinism() {
  const MoonsRun a = moons_run();
  const MoonsRun b = moons_run();
  const bool same_ckpt = a.checkpoint_bytes == b.checkpoint_bytes;
  auto bits_equal = [](double p, double q) { return std::memcmp(&p, &q, sizeof(double)) == 0; };
  const bool same_metrics = bits_equal(a.metrics.mmd2, b.metrics.mmd2) &&
                            bits_equal(a.metrics.fid2d, b.metrics.fid2d) &&
                            bits_equal(a.metrics.sigma2, b.metrics.sigma2);
  return {same_ckpt && same_metrics,
          std::string("checkpoint ") + (same_ckpt ? "identical" : "differs") + ", metrics " +
              (same_metrics ? "identical" : "differ") + " (mmd2 " + fmt(a.metrics.mmd2) + ")"};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"gradient correctness", gradient_check},
      {"decomposition identity on targets", decomposition_identity},
      {"oracle identity suite", oracle_identities},
      {"conditional-to-marginal score recovery", score_recovery},
      {"KDE score quality", kde_quality},
      {"integrator orders", integrator_orders},
      {"metric oracles", metric_oracles},
      {"end-to-end 2D generation", moons_generation},
      {"recombination sanity", recombination_sweep},
      {"determinism", determinism},
  };
  std::vector<int> selected;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--iterations") == 0 && i + 1 < argc) {
      g_iterations = std::stoull(argv[++i]);
      continue;
    }
    const int k = std::atoi(argv[i]);
    if (k < 1 || k > static_cast<int>(criteria.size())) {
      std::cerr << "unknown criterion '" << argv[i] << "'\n";
      return 2;
    }
    selected.push_back(k);
  }
  if (selected.empty()) {
    selected.resize(criteria.size());
    std::iota(selected.begin(), selected.end(), 1);
  }
  bool all = true;
  for (const int k : selected) {
    const auto& [name, fn] = criteria[static_cast<std::size_t>(k - 1)];
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << k << " (" << name << "): " << o.detail
              << " [" << fmt(elapsed_s(t0)) << " s]" << std::endl;
    all = all && o.pass;
  }
  return all ? 0 : 1;
}
