// Copyright 2026 The bridgematch Authors
// SPDX-License-Identifier: Apache-2.0

#include "bridgematch/oracle.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace bm {

namespace {

bool positive_definite(const SymMat2& s) { return s.xx > 0.0 && s.det() > 0.0; }

void require_field(const Lattice& lattice, const Batch& field, const char* what) {
  if (lattice.nx < 3 || lattice.ny < 3) {
    throw std::invalid_argument(std::string(what) + ": lattice needs at least 3x3 nodes");
  }
  if (field.rows() != lattice.nx * lattice.ny || field.cols() != 2) {
    throw std::invalid_argument(std::string(what) + ": field must hold one 2-vector per node");
  }
}

void require_resolution(const GaussianMarginal& m, const Lattice& lattice, const char* what) {
  const double std_min = std::sqrt(m.cov.eigenvalues()[0]);
  if (lattice.spacing > std_min / 4.0) {
    std::ostringstream msg;
    msg << what << ": lattice spacing " << lattice.spacing << " exceeds sigma/4 = " << std_min / 4.0;
    throw std::invalid_argument(msg.str());
  }
  const double rx = 3.0 * std::sqrt(m.cov.xx);
  const double ry = 3.0 * std::sqrt(m.cov.yy);
  const double x_max = lattice.x(lattice.nx - 1);
  const double y_max = lattice.y(lattice.ny - 1);
  if (lattice.x_min > m.mean[0] - rx || x_max < m.mean[0] + rx || lattice.y_min > m.mean[1] - ry ||
      y_max < m.mean[1] + ry) {
    throw std::invalid_argument(std::string(what) + ": lattice does not cover mean +- 3 std");
  }
}

void require_interior_time(double t, const char* what) {
  if (!(t - kOracleTimeStep > 0.0) || !(t + kOracleTimeStep < 1.0)) {
    throw std::invalid_argument(std::string(what) + ": t must leave room for the time stencil");
  }
}

std::array<double, 3> cholesky(const SymMat2& s) {
  const double a = std::sqrt(s.xx);
  const double b = s.xy / a;
  return {a, b, std::sqrt(s.yy - b * b)};
}

}  // namespace

void GaussianEndpoints::validate() const {
  if (!positive_definite(cov0) || !positive_definite(cov1)) {
    throw std::invalid_argument("GaussianEndpoints: covariances must be positive definite");
  }
}

double GaussianMarginal::log_density(double x, double y) const {
  const SymMat2 inv = cov.inverse();
  const double dx = x - mean[0];
  const double dy = y - mean[1];
  const double q = inv.xx * dx * dx + 2.0 * inv.xy * dx * dy + inv.yy * dy * dy;
  return -0.5 * q - std::log(2.0 * std::numbers::pi) - 0.5 * std::log(cov.det());
}

double GaussianMarginal::density(double x, double y) const { return std::exp(log_density(x, y)); }

GaussianMarginal analytic_marginal(const GaussianEndpoints& ep, const Schedule& sched, double t) {
  const double a = sched.alpha(t);
  const double s = sched.sigma(t);
  GaussianMarginal m;
  m.mean = {a * ep.mu1[0] + s * ep.mu0[0], a * ep.mu1[1] + s * ep.mu0[1]};
  m.cov = (a * a) * ep.cov1 + (s * s) * ep.cov0;
  return m;
}

MarginalRate analytic_marginal_rate(const GaussianEndpoints& ep, const Schedule& sched, double t) {
  const double a = sched.alpha(t);
  const double s = sched.sigma(t);
  const double da = sched.alpha_dot(t);
  const double ds = sched.sigma_dot(t);
  MarginalRate r;
  r.dmean = {da * ep.mu1[0] + ds * ep.mu0[0], da * ep.mu1[1] + ds * ep.mu0[1]};
  r.dcov = (2.0 * a * da) * ep.cov1 + (2.0 * s * ds) * ep.cov0;
  return r;
}

Batch analytic_score(const GaussianMarginal& m, const Batch& x) {
  if (x.cols() != 2) throw std::invalid_argument("analytic_score: expected 2D points");
  const SymMat2 inv = m.cov.inverse();
  Batch out(x.rows(), 2);
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const auto g = inv.apply(x(i, 0) - m.mean[0], x(i, 1) - m.mean[1]);
    out(i, 0) = -g[0];
    out(i, 1) = -g[1];
  }
  return out;
}

Batch marginal_velocity(const GaussianEndpoints& ep, const Schedule& sched, double t,
                        const Batch& x) {
  if (x.cols() != 2) throw std::invalid_argument("marginal_velocity: expected 2D points");
  const GaussianMarginal m = analytic_marginal(ep, sched, t);
  const MarginalRate r = analytic_marginal_rate(ep, sched, t);
  const auto gain = matmul(0.5 * r.dcov, m.cov.inverse());
  Batch out(x.rows(), 2);
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const double dx = x(i, 0) - m.mean[0];
    const double dy = x(i, 1) - m.mean[1];
    out(i, 0) = r.dmean[0] + gain[0] * dx + gain[1] * dy;
    out(i, 1) = r.dmean[1] + gain[2] * dx + gain[3] * dy;
  }
  return out;
}

Batch analytic_transport_field(const GaussianEndpoints& ep, const Schedule& sched, double t,
                               const Batch& x, PathConstruction construction, double beta_impl) {
  Batch u = marginal_velocity(ep, sched, t, x);
  if (construction == PathConstruction::kCbmDiffusion) {
    u = axpy(u, -beta_impl, analytic_score(analytic_marginal(ep, sched, t), x));
  }
  return u;
}

Lattice Lattice::centered(Vec2 center, double spacing, std::size_t n) {
  if (n < 2 || !(spacing > 0.0)) throw std::invalid_argument("Lattice: need n >= 2 and spacing > 0");
  const double half = 0.5 * static_cast<double>(n - 1) * spacing;
  return Lattice{center[0] - half, center[1] - half, spacing, n, n};
}

Batch Lattice::nodes() const {
  Batch out(nx * ny, 2);
  for (std::size_t iy = 0; iy < ny; ++iy) {
    for (std::size_t ix = 0; ix < nx; ++ix) {
      out(index(ix, iy), 0) = x(ix);
      out(index(ix, iy), 1) = y(iy);
    }
  }
  return out;
}

ContinuityReport continuity_check(const GaussianEndpoints& ep, const Schedule& sched, double t,
                                  const Lattice& lattice, const Batch& field) {
  require_field(lattice, field, "continuity_check");
  require_interior_time(t, "continuity_check");
  const GaussianMarginal now = analytic_marginal(ep, sched, t);
  require_resolution(now, lattice, "continuity_check");
  const GaussianMarginal before = analytic_marginal(ep, sched, t - kOracleTimeStep);
  const GaussianMarginal after = analytic_marginal(ep, sched, t + kOracleTimeStep);

  const std::size_t n = lattice.nx * lattice.ny;
  std::vector<double> fx(n);
  std::vector<double> fy(n);
  ContinuityReport rep;
  for (std::size_t iy = 0; iy < lattice.ny; ++iy) {
    for (std::size_t ix = 0; ix < lattice.nx; ++ix) {
      const std::size_t k = lattice.index(ix, iy);
      const double p = now.density(lattice.x(ix), lattice.y(iy));
      fx[k] = p * field(k, 0);
      fy[k] = p * field(k, 1);
      rep.max_density = std::max(rep.max_density, p);
    }
  }
  const double inv_2h = 1.0 / (2.0 * lattice.spacing);
  for (std::size_t iy = 1; iy + 1 < lattice.ny; ++iy) {
    for (std::size_t ix = 1; ix + 1 < lattice.nx; ++ix) {
      const double x = lattice.x(ix);
      const double y = lattice.y(iy);
      const double dt =
          (after.density(x, y) - before.density(x, y)) / (2.0 * kOracleTimeStep);
      const double div = (fx[lattice.index(ix + 1, iy)] - fx[lattice.index(ix - 1, iy)]) * inv_2h +
                         (fy[lattice.index(ix, iy + 1)] - fy[lattice.index(ix, iy - 1)]) * inv_2h;
      rep.residual = std::max(rep.residual, std::abs(dt + div));
      rep.max_dt_density = std::max(rep.max_dt_density, std::abs(dt));
    }
  }
  return rep;
}

double continuity_residual(const GaussianEndpoints& ep, const Schedule& sched, double t,
                           const Lattice& lattice, const Batch& field) {
  return continuity_check(ep, sched, t, lattice, field).residual;
}

double lagrangian_residual(const GaussianEndpoints& ep, const Schedule& sched, double t,
                           const Lattice& lattice, const Batch& field) {
  require_field(lattice, field, "lagrangian_residual");
  require_interior_time(t, "lagrangian_residual");
  const GaussianMarginal now = analytic_marginal(ep, sched, t);
  require_resolution(now, lattice, "lagrangian_residual");
  const GaussianMarginal before = analytic_marginal(ep, sched, t - kOracleTimeStep);
  const GaussianMarginal after = analytic_marginal(ep, sched, t + kOracleTimeStep);

  std::vector<double> logp(lattice.nx * lattice.ny);
  for (std::size_t iy = 0; iy < lattice.ny; ++iy) {
    for (std::size_t ix = 0; ix < lattice.nx; ++ix) {
      logp[lattice.index(ix, iy)] = now.log_density(lattice.x(ix), lattice.y(iy));
    }
  }
  const double inv_2h = 1.0 / (2.0 * lattice.spacing);
  double worst = 0.0;
  for (std::size_t iy = 1; iy + 1 < lattice.ny; ++iy) {
    for (std::size_t ix = 1; ix + 1 < lattice.nx; ++ix) {
      const double x = lattice.x(ix);
      const double y = lattice.y(iy);
      const std::size_t k = lattice.index(ix, iy);
      const std::size_t e = lattice.index(ix + 1, iy);
      const std::size_t w = lattice.index(ix - 1, iy);
      const std::size_t nn = lattice.index(ix, iy + 1);
      const std::size_t s = lattice.index(ix, iy - 1);
      const double dt = (after.log_density(x, y) - before.log_density(x, y)) / (2.0 * kOracleTimeStep);
      const double gx = (logp[e] - logp[w]) * inv_2h;
      const double gy = (logp[nn] - logp[s]) * inv_2h;
      const double div = (field(e, 0) - field(w, 0)) * inv_2h + (field(nn, 1) - field(s, 1)) * inv_2h;
      const double material = dt + field(k, 0) * gx + field(k, 1) * gy;
      worst = std::max(worst, std::abs(material + div));
    }
  }
  return worst;
}

double bidirectional_check(const GaussianEndpoints& ep, const Schedule& sched, double t,
                           double beta, const Batch& grid) {
  const GaussianMarginal m = analytic_marginal(ep, sched, t);
  const Batch score = analytic_score(m, grid);
  const Batch u = marginal_velocity(ep, sched, t, grid);
  const Batch d = scaled(score, 0.5 * beta);
  double worst = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double fwd = u.data()[i] + d.data()[i];
    const double bwd = u.data()[i] - d.data()[i];
    worst = std::max(worst, std::abs(fwd - bwd - beta * score.data()[i]));
  }
  return worst;
}

ScoreRecoveryReport score_recovery_check(const GaussianEndpoints& ep, const TargetSpec& spec,
                                         double t, const ScoreRecoveryOptions& opt, Rng& rng) {
  ep.validate();
  if (spec.kind != TargetKind::kCbmDiffusion) {
    throw std::invalid_argument("score_recovery_check: needs a CBM-Diffusion target spec");
  }
  if (!(spec.beta_impl > 0.0)) throw std::invalid_argument("score_recovery_check: beta_impl must be > 0");
  if (ep.mu0 != Vec2{0.0, 0.0} || !(ep.cov0 == SymMat2::identity())) {
    throw std::invalid_argument("score_recovery_check: the source must be N(0, I)");
  }
  if (opt.bins_per_axis == 0 || opt.chunk == 0) {
    throw std::invalid_argument("score_recovery_check: bins and chunk must be positive");
  }
  const double tc = clamp_time(t, spec.t_eps);
  const Schedule sched = spec.schedule();
  if (sched.sigma(tc) < spec.sigma_min) {
    throw std::invalid_argument("score_recovery_check: sigma floor is active at this t");
  }
  const GaussianMarginal m = analytic_marginal(ep, sched, tc);
  const auto chol = cholesky(ep.cov1);

  const std::size_t nb = opt.bins_per_axis;
  const double hx = opt.box_std * std::sqrt(m.cov.xx);
  const double hy = opt.box_std * std::sqrt(m.cov.yy);
  const double wx = 2.0 * hx / static_cast<double>(nb);
  const double wy = 2.0 * hy / static_cast<double>(nb);
  std::vector<double> count(nb * nb, 0.0);
  std::vector<std::array<double, 4>> acc(nb * nb, {0.0, 0.0, 0.0, 0.0});

  const double inv_beta = 1.0 / spec.beta_impl;
  std::size_t remaining = opt.draws;
  while (remaining > 0) {
    const std::size_t b = std::min(remaining, opt.chunk);
    remaining -= b;
    const Batch x0 = rng_standard_normal(rng, b, 2);
    Batch x1 = rng_standard_normal(rng, b, 2);
    for (std::size_t i = 0; i < b; ++i) {
      const double z0 = x1(i, 0);
      const double z1 = x1(i, 1);
      x1(i, 0) = ep.mu1[0] + chol[0] * z0;
      x1(i, 1) = ep.mu1[1] + chol[1] * z0 + chol[2] * z1;
    }
    const TargetBatch tb = cbm_diffusion_target(x0, x1, TimeBatch(b, tc), spec);
    const Batch score = analytic_score(m, tb.x_t);
    for (std::size_t i = 0; i < b; ++i) {
      const double px = tb.x_t(i, 0) - (m.mean[0] - hx);
      const double py = tb.x_t(i, 1) - (m.mean[1] - hy);
      if (px < 0.0 || py < 0.0) continue;
      const auto bx = static_cast<std::size_t>(px / wx);
      const auto by = static_cast<std::size_t>(py / wy);
      if (bx >= nb || by >= nb) continue;
      const std::size_t k = by * nb + bx;
      const double r0 = tb.d_star(i, 0) * inv_beta - score(i, 0);
      const double r1 = tb.d_star(i, 1) * inv_beta - score(i, 1);
      count[k] += 1.0;
      acc[k][0] += r0;
      acc[k][1] += r1;
      acc[k][2] += r0 * r0;
      acc[k][3] += r1 * r1;
    }
  }

  ScoreRecoveryReport rep;
  for (std::size_t k = 0; k < nb * nb; ++k) {
    const double n = count[k];
    if (n < static_cast<double>(std::max<std::size_t>(opt.min_count, 2))) continue;
    ++rep.occupied_bins;
    bool ok = true;
    for (int c = 0; c < 2; ++c) {
      const double mean = acc[k][c] / n;
      const double var = std::max(0.0, (acc[k][2 + c] - n * mean * mean) / (n - 1.0));
      ok = ok && std::abs(mean) <= opt.z * std::sqrt(var / n);
    }
    if (ok) ++rep.passing_bins;
  }
  return rep;
}

GaussianEndpoints default_oracle_endpoints() {
  GaussianEndpoints ep;
  ep.mu0 = {0.0, 0.0};
  ep.cov0 = SymMat2::identity();
  ep.mu1 = {1.0, -0.5};
  ep.cov1 = SymMat2{0.5, 0.2, 0.3};
  return ep;
}

std::vector<OracleCheck> run_oracle_suite(const OracleSuiteOptions& opt) {
  opt.endpoints.validate();
  const Schedule sched = Schedule::trig();
  std::vector<OracleCheck> out;
  auto add = [&](std::string name, double value, double threshold, bool pass) {
    out.push_back(OracleCheck{std::move(name), value, threshold, pass});
  };
  for (std::size_t ti = 0; ti < opt.times.size(); ++ti) {
    const double t = opt.times[ti];
    std::ostringstream tag;
    tag << "t=" << t;
    const GaussianMarginal m = analytic_marginal(opt.endpoints, sched, t);
    const double std_min = std::sqrt(m.cov.eigenvalues()[0]);
    const double h = opt.spacing_fraction * std_min;
    const Lattice coarse = Lattice::centered(m.mean, h, opt.grid);
    const Batch nodes = coarse.nodes();

    const double bidir = bidirectional_check(opt.endpoints, sched, t, opt.beta, nodes);
    add("bidirectional " + tag.str(), bidir, 1e-12, bidir < 1e-12);

    const Batch u = analytic_transport_field(opt.endpoints, sched, t, nodes,
                                             PathConstruction::kCfmDiffusion);
    const ContinuityReport c1 = continuity_check(opt.endpoints, sched, t, coarse, u);
    const double rel = c1.residual / c1.max_density;
    add("continuity " + tag.str(), rel, 1e-4, rel < 1e-4);

    const Lattice fine = Lattice::centered(m.mean, 0.5 * h, 2 * opt.grid - 1);
    const Batch fine_u = analytic_transport_field(opt.endpoints, sched, t, fine.nodes(),
                                                  PathConstruction::kCfmDiffusion);
    const double c2 = continuity_residual(opt.endpoints, sched, t, fine, fine_u);
    const double ratio = c1.residual / c2;
    add("continuity_halving_ratio " + tag.str(), ratio, 4.0, ratio > 3.5 && ratio < 4.5);

    const double lag = lagrangian_residual(opt.endpoints, sched, t, coarse, u);
    add("lagrangian " + tag.str(), lag, 1e-3, lag < 1e-3);

    if (!opt.skip_monte_carlo) {
      TargetSpec spec = TargetSpec::defaults(TargetKind::kCbmDiffusion);
      spec.diffusion_schedule = ScheduleKind::kTrig;
      spec.beta_impl = 0.5 * opt.beta;
      Rng rng = Rng(opt.seed, Stream::kProbe).split(ti);
      ScoreRecoveryOptions so;
      so.draws = opt.mc_draws;
      const ScoreRecoveryReport sr = score_recovery_check(opt.endpoints, spec, t, so, rng);
      add("score_recovery " + tag.str(), sr.pass_fraction(), 0.95, sr.pass_fraction() >= 0.95);
    }
  }
  return out;
}

}  // namespace bm
