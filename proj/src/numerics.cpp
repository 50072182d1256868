// Copyright 2026 The bridgematch Authors
// SPDX-License-Identifier: Apache-2.0

#include "bridgematch/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace bm {

namespace {

constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;

}  // namespace

std::uint64_t splitmix64(std::uint64_t x) {
  x ^= x >> 30;
  x *= 0xBF58476D1CE4E5B9ULL;
  x ^= x >> 27;
  x *= 0x94D049BB133111EBULL;
  x ^= x >> 31;
  return x;
}

Rng::Rng(std::uint64_t seed, std::uint64_t stream_id)
    : seed_(seed),
      stream_id_(stream_id),
      key_(splitmix64(splitmix64(seed + kGamma) ^ (stream_id * 0xD1B54A32D192ED03ULL + 1))) {}

Rng Rng::split(std::uint64_t sub_id) const {
  Rng child(seed_, stream_id_);
  child.key_ = splitmix64(key_ ^ splitmix64(sub_id + 0x632BE59BD9B4E019ULL));
  return child;
}

std::uint64_t Rng::next_u64() {
  ++counter_;
  return splitmix64(key_ + counter_ * kGamma);
}

double Rng::uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  // 1 - u keeps the log argument in (0, 1].
  const double u1 = 1.0 - uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(theta);
  has_spare_ = true;
  return r * std::cos(theta);
}

Batch::Batch(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows_ * cols_) {
    throw std::invalid_argument("Batch: data size does not match rows * cols");
  }
}

bool Batch::all_finite() const {
  for (double v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

void require_same_shape(const Batch& a, const Batch& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw std::invalid_argument(std::string(what) + ": shape mismatch (" +
                                std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                                " vs " + std::to_string(b.rows()) + "x" +
                                std::to_string(b.cols()) + ")");
  }
}

void require_finite(const Batch& b, const char* what) {
  if (!b.all_finite()) throw std::domain_error(std::string(what) + ": non-finite entry");
}

Batch axpy(const Batch& a, double s, const Batch& b) {
  require_same_shape(a, b, "axpy");
  Batch out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] += s * b.data()[i];
  return out;
}

Batch scaled(const Batch& a, double s) {
  Batch out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] *= s;
  return out;
}

double mean_row_norm(const Batch& b) {
  if (b.rows() == 0) return 0.0;
  double acc = 0.0;
  for (std::size_t r = 0; r < b.rows(); ++r) {
    double sq = 0.0;
    for (double v : b.row(r)) sq += v * v;
    acc += std::sqrt(sq);
  }
  return acc / static_cast<double>(b.rows());
}

std::vector<double> column_mean(const Batch& b) {
  std::vector<double> m(b.cols(), 0.0);
  for (std::size_t r = 0; r < b.rows(); ++r) {
    for (std::size_t c = 0; c < b.cols(); ++c) m[c] += b(r, c);
  }
  for (double& v : m) v /= static_cast<double>(b.rows());
  return m;
}

Batch vstack(std::span<const Batch> parts) {
  if (parts.empty()) return {};
  const std::size_t cols = parts.front().cols();
  std::vector<double> data;
  std::size_t rows = 0;
  for (const Batch& p : parts) {
    if (p.cols() != cols) throw std::invalid_argument("vstack: column mismatch");
    data.insert(data.end(), p.values().begin(), p.values().end());
    rows += p.rows();
  }
  return Batch(rows, cols, std::move(data));
}

Batch rng_standard_normal(Rng& rng, std::size_t b, std::size_t d) {
  if (b == 0 || d == 0) throw std::invalid_argument("rng_standard_normal: empty shape");
  Batch out(b, d);
  for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] = rng.normal();
  return out;
}

std::array<double, 2> SymMat2::eigenvalues() const {
  const double mean = 0.5 * (xx + yy);
  const double half_diff = 0.5 * (xx - yy);
  const double rad = std::hypot(half_diff, xy);
  return {mean - rad, mean + rad};
}

SymMat2 SymMat2::inverse() const {
  const double d = det();
  if (!(std::abs(d) > 0.0) || !std::isfinite(d)) {
    throw std::domain_error("SymMat2::inverse: singular matrix");
  }
  return {yy / d, -xy / d, xx / d};
}

SymMat2 operator+(const SymMat2& a, const SymMat2& b) {
  return {a.xx + b.xx, a.xy + b.xy, a.yy + b.yy};
}

SymMat2 operator-(const SymMat2& a, const SymMat2& b) {
  return {a.xx - b.xx, a.xy - b.xy, a.yy - b.yy};
}

SymMat2 operator*(double s, const SymMat2& a) { return {s * a.xx, s * a.xy, s * a.yy}; }

std::array<double, 4> matmul(const SymMat2& a, const SymMat2& b) {
  return {a.xx * b.xx + a.xy * b.xy, a.xx * b.xy + a.xy * b.yy,
          a.xy * b.xx + a.yy * b.xy, a.xy * b.xy + a.yy * b.yy};
}

SymMat2 sandwich(const SymMat2& a, const SymMat2& b) {
  const auto ab = matmul(a, b);
  // (ab) a, keeping the upper triangle and averaging the off-diagonal pair.
  const double xx = ab[0] * a.xx + ab[1] * a.xy;
  const double xy = ab[0] * a.xy + ab[1] * a.yy;
  const double yx = ab[2] * a.xx + ab[3] * a.xy;
  const double yy = ab[2] * a.xy + ab[3] * a.yy;
  return {xx, 0.5 * (xy + yx), yy};
}

double frobenius_distance(const std::array<double, 4>& m, const SymMat2& s) {
  const double a = m[0] - s.xx;
  const double b = m[1] - s.xy;
  const double c = m[2] - s.xy;
  const double d = m[3] - s.yy;
  return std::sqrt(a * a + b * b + c * c + d * d);
}

SymMat2 spd2_sqrt(const SymMat2& m) {
  const auto [lo, hi] = m.eigenvalues();
  if (lo < -1e-9) {
    throw std::domain_error("spd2_sqrt: matrix has eigenvalue " + std::to_string(lo) +
                            " (not PSD)");
  }
  const double det = std::max(m.det(), 0.0);
  const double root_det = std::sqrt(det);
  const double denom_sq = m.trace() + 2.0 * root_det;
  if (denom_sq >= 1e-12) {
    const double inv = 1.0 / std::sqrt(denom_sq);
    return {(m.xx + root_det) * inv, m.xy * inv, (m.yy + root_det) * inv};
  }
  // Near-zero matrix: rebuild from the clamped spectrum.
  const double l0 = std::sqrt(std::max(lo, 0.0));
  const double l1 = std::sqrt(std::max(hi, 0.0));
  double vx = m.xy;
  double vy = hi - m.xx;
  double norm = std::hypot(vx, vy);
  if (norm < 1e-300) {
    vx = hi - m.yy;
    vy = m.xy;
    norm = std::hypot(vx, vy);
  }
  if (norm < 1e-300) return SymMat2::diag(std::sqrt(std::max(m.xx, 0.0)),
                                          std::sqrt(std::max(m.yy, 0.0)));
  vx /= norm;
  vy /= norm;
  // hi-eigenvector (vx, vy); lo-eigenvector (-vy, vx).
  return {l1 * vx * vx + l0 * vy * vy, (l1 - l0) * vx * vy, l1 * vy * vy + l0 * vx * vx};
}

SymMat2 sample_covariance(const Batch& b) {
  if (b.cols() != 2) throw std::invalid_argument("sample_covariance: expected 2 columns");
  if (b.rows() < 2) throw std::invalid_argument("sample_covariance: need at least 2 rows");
  const auto mu = column_mean(b);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t r = 0; r < b.rows(); ++r) {
    const double dx = b(r, 0) - mu[0];
    const double dy = b(r, 1) - mu[1];
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  const double inv = 1.0 / static_cast<double>(b.rows() - 1);
  return {sxx * inv, sxy * inv, syy * inv};
}

}  // namespace bm
