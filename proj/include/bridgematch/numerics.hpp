// Copyright 2026 The bridgematch Authors
// SPDX-License-Identifier: Apache-2.0
//
// Shared numeric building blocks: a splittable counter-based PRNG, the B x d
// sample container used everywhere, and closed-form 2x2 symmetric algebra.

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace bm {

/// Named sub-streams. Every consumer of randomness draws from its own stream so
/// that adding draws in one place never perturbs another.
enum class Stream : std::uint64_t {
  kSource = 1,
  kTarget = 2,
  kTime = 3,
  kNoise = 4,
  kInitU = 5,
  kInitD = 6,
  kEvalSource = 7,
  kEvalTarget = 8,
  kEvalReference = 9,
  kProbe = 10,
};

/// Counter-based generator: draw k of stream (seed, id) is mix(key + k * gamma)
/// with the SplitMix64 finalizer. Output depends only on (seed, id, k), so it is
/// bit-identical across platforms and runs.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream_id = 0);
  Rng(std::uint64_t seed, Stream stream) : Rng(seed, static_cast<std::uint64_t>(stream)) {}

  /// Derives an independent stream keyed by (seed, stream_id, sub_id).
  [[nodiscard]] Rng split(std::uint64_t sub_id) const;

  std::uint64_t next_u64();
  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Standard normal via Box-Muller; the second variate of each pair is cached.
  double normal();
  /// Returns 0 or 1 with equal probability.
  int bit() { return static_cast<int>(next_u64() >> 63); }

  [[nodiscard]] std::uint64_t seed() const { return seed_; }
  [[nodiscard]] std::uint64_t stream_id() const { return stream_id_; }
  [[nodiscard]] std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

std::uint64_t splitmix64(std::uint64_t x);

/// Row-major B x d matrix of doubles. Rows are samples.
class Batch {
 public:
  Batch() = default;
  Batch(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Batch(std::size_t rows, std::size_t cols, std::vector<double> data);

  [[nodiscard]] std::size_t rows() const { return rows_; }
  [[nodiscard]] std::size_t cols() const { return cols_; }
  [[nodiscard]] std::size_t size() const { return data_.size(); }
  [[nodiscard]] bool empty() const { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  [[nodiscard]] std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  [[nodiscard]] std::span<const double> row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }

  [[nodiscard]] double* data() { return data_.data(); }
  [[nodiscard]] const double* data() const { return data_.data(); }
  [[nodiscard]] const std::vector<double>& values() const { return data_; }

  [[nodiscard]] bool all_finite() const;

  friend bool operator==(const Batch&, const Batch&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// One time value per batch row.
using TimeBatch = std::vector<double>;

void require_same_shape(const Batch& a, const Batch& b, const char* what);
void require_finite(const Batch& b, const char* what);

/// a + s * b, elementwise.
Batch axpy(const Batch& a, double s, const Batch& b);
Batch scaled(const Batch& a, double s);
/// Mean over rows of the Euclidean row norm.
double mean_row_norm(const Batch& b);
/// Column means.
std::vector<double> column_mean(const Batch& b);
/// Concatenates rows of batches with equal column counts.
Batch vstack(std::span<const Batch> parts);

Batch rng_standard_normal(Rng& rng, std::size_t b, std::size_t d);

/// Symmetric [[xx, xy], [xy, yy]].
struct SymMat2 {
  double xx = 0.0;
  double xy = 0.0;
  double yy = 0.0;

  static SymMat2 identity() { return {1.0, 0.0, 1.0}; }
  static SymMat2 diag(double a, double b) { return {a, 0.0, b}; }

  [[nodiscard]] double trace() const { return xx + yy; }
  [[nodiscard]] double det() const { return xx * yy - xy * xy; }
  /// Eigenvalues in ascending order.
  [[nodiscard]] std::array<double, 2> eigenvalues() const;
  [[nodiscard]] SymMat2 inverse() const;
  [[nodiscard]] std::array<double, 2> apply(double x, double y) const {
    return {xx * x + xy * y, xy * x + yy * y};
  }

  friend bool operator==(const SymMat2&, const SymMat2&) = default;
};

SymMat2 operator+(const SymMat2& a, const SymMat2& b);
SymMat2 operator-(const SymMat2& a, const SymMat2& b);
SymMat2 operator*(double s, const SymMat2& a);
/// a * b * a for symmetric a, b; the result is symmetric.
SymMat2 sandwich(const SymMat2& a, const SymMat2& b);
/// Plain 2x2 product, returned row-major; not symmetric in general.
std::array<double, 4> matmul(const SymMat2& a, const SymMat2& b);
double frobenius_distance(const std::array<double, 4>& m, const SymMat2& s);

/// Principal square root of a symmetric PSD matrix. Eigenvalues in [-1e-9, 0)
/// are clamped to zero; anything more negative throws std::domain_error.
SymMat2 spd2_sqrt(const SymMat2& m);

/// Unbiased (n - 1) sample covariance of a B x 2 batch.
SymMat2 sample_covariance(const Batch& b);

}  // namespace bm
