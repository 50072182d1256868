// Copyright 2026 The bridgematch Authors
// SPDX-License-Identifier: Apache-2.0
//
// Closed-form ground truth for x_t = alpha(t) x1 + sigma(t) x0 with independent
// Gaussian endpoints x0 ~ N(mu0, S0), x1 ~ N(mu1, S1):
//
//   pi_t = N(m, C),  m = alpha mu1 + sigma mu0,  C = alpha^2 S1 + sigma^2 S0
//   E[alpha' x1 + sigma' x0 | x_t = x] = m' + (C'/2) C^{-1} (x - m)
//
// The second line is the marginal velocity; it solves the continuity equation
// because (C'/2) C^{-1} C + C (C^{-1} C'/2) = C'.

#pragma once

#include <array>
#include <string>
#include <vector>

#include "bridgematch/numerics.hpp"
#include "bridgematch/schedules.hpp"
#include "bridgematch/targets.hpp"

namespace bm {

using Vec2 = std::array<double, 2>;

struct GaussianEndpoints {
  Vec2 mu0{0.0, 0.0};
  Vec2 mu1{0.0, 0.0};
  SymMat2 cov0 = SymMat2::identity();
  SymMat2 cov1 = SymMat2::identity();

  /// Throws unless both covariances are positive definite.
  void validate() const;
};

struct GaussianMarginal {
  Vec2 mean{0.0, 0.0};
  SymMat2 cov = SymMat2::identity();

  [[nodiscard]] double density(double x, double y) const;
  [[nodiscard]] double log_density(double x, double y) const;
};

struct MarginalRate {
  Vec2 dmean{0.0, 0.0};
  SymMat2 dcov;
};

GaussianMarginal analytic_marginal(const GaussianEndpoints& ep, const Schedule& sched, double t);
MarginalRate analytic_marginal_rate(const GaussianEndpoints& ep, const Schedule& sched, double t);

/// -C^{-1}(x - m) per row.
Batch analytic_score(const GaussianMarginal& m, const Batch& x);

/// E[v* | x_t = x] for the affine path; satisfies the continuity equation.
Batch marginal_velocity(const GaussianEndpoints& ep, const Schedule& sched, double t, const Batch& x);

enum class PathConstruction { kCfmDiffusion, kCbmDiffusion };

/// E[u* | x_t = x] for the construction: the marginal velocity for CFM-Diffusion,
/// and marginal velocity minus beta_impl * score for CBM-Diffusion (whose u*
/// is v* - d*).
Batch analytic_transport_field(const GaussianEndpoints& ep, const Schedule& sched, double t,
                               const Batch& x, PathConstruction construction,
                               double beta_impl = 0.0);

/// Regular axis-aligned lattice; node (ix, iy) sits at row iy * nx + ix.
struct Lattice {
  double x_min = 0.0;
  double y_min = 0.0;
  double spacing = 1.0;
  std::size_t nx = 0;
  std::size_t ny = 0;

  /// n x n nodes with the given spacing, centered on `center`.
  static Lattice centered(Vec2 center, double spacing, std::size_t n);

  [[nodiscard]] double x(std::size_t ix) const { return x_min + static_cast<double>(ix) * spacing; }
  [[nodiscard]] double y(std::size_t iy) const { return y_min + static_cast<double>(iy) * spacing; }
  [[nodiscard]] std::size_t index(std::size_t ix, std::size_t iy) const { return iy * nx + ix; }
  [[nodiscard]] Batch nodes() const;
};

constexpr double kOracleTimeStep = 1e-4;

struct ContinuityReport {
  /// max |d_t pi + div(pi u)| over interior nodes.
  double residual = 0.0;
  /// max |d_t pi| alone.
  double max_dt_density = 0.0;
  double max_density = 0.0;
};

/// Central differences in t (step kOracleTimeStep) and in space (lattice
/// spacing). The lattice has to span mean +- 3 std on both axes, and spacing
/// above sqrt(smallest eigenvalue of C) / 4 is rejected.
ContinuityReport continuity_check(const GaussianEndpoints& ep, const Schedule& sched, double t,
                                  const Lattice& lattice, const Batch& field);
double continuity_residual(const GaussianEndpoints& ep, const Schedule& sched, double t,
                           const Lattice& lattice, const Batch& field);

/// max |D/Dt log pi + div u| over interior nodes, everything by finite differences.
double lagrangian_residual(const GaussianEndpoints& ep, const Schedule& sched, double t,
                           const Lattice& lattice, const Batch& field);

/// With u the marginal velocity and d = (beta / 2) score, the largest deviation of
/// (u + d) - (u - d) - beta * score across the grid.
double bidirectional_check(const GaussianEndpoints& ep, const Schedule& sched, double t,
                           double beta, const Batch& grid);

struct ScoreRecoveryOptions {
  std::size_t draws = 10'000'000;
  std::size_t bins_per_axis = 20;
  /// Half-width of the binned box in marginal standard deviations.
  double box_std = 3.0;
  /// Bins with fewer samples are treated as unoccupied (no variance estimate).
  std::size_t min_count = 10;
  double z = 3.0;
  std::size_t chunk = 1 << 16;
};

struct ScoreRecoveryReport {
  std::size_t occupied_bins = 0;
  std::size_t passing_bins = 0;
  [[nodiscard]] double pass_fraction() const {
    return occupied_bins == 0 ? 0.0
                              : static_cast<double>(passing_bins) / static_cast<double>(occupied_bins);
  }
};

/// Bins CBM-Diffusion draws by x_t and tests, per bin and component, that the
/// mean of d*/beta_impl - score(x_t) is zero within z standard errors. The
/// conditional score in d* assumes x0 ~ N(0, I), so `ep` must have that source.
ScoreRecoveryReport score_recovery_check(const GaussianEndpoints& ep, const TargetSpec& spec, double t,
                                         const ScoreRecoveryOptions& opt, Rng& rng);

struct OracleCheck {
  std::string name;
  double value = 0.0;
  double threshold = 0.0;
  bool pass = false;
};

struct OracleSuiteOptions {
  GaussianEndpoints endpoints;
  double beta = 0.2;
  std::vector<double> times{0.25, 0.5, 0.75};
  std::size_t grid = 200;
  /// Lattice spacing as a fraction of the smallest marginal std.
  double spacing_fraction = 1.0 / 20.0;
  std::size_t mc_draws = 10'000'000;
  std::uint64_t seed = 42;
  /// Skips the Monte-Carlo score check.
  bool skip_monte_carlo = false;
};

/// A non-degenerate default pair: standard normal source, correlated shifted target.
GaussianEndpoints default_oracle_endpoints();

/// Runs the identity suite on the trig schedule.
std::vector<OracleCheck> run_oracle_suite(const OracleSuiteOptions& opt);

}  // namespace bm
