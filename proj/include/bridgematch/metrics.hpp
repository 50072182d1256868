// Copyright 2026 The bridgematch Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <optional>
#include <string_view>

#include "bridgematch/numerics.hpp"

namespace bm {

/// How the RBF bandwidth sigma^2 is derived from real-generated cross distances.
///   kHalfMedianSquared: sigma^2 = median(|x_i - y_j|^2) / 2   (default)
///   kMedianDistance:    sigma   = median(|x_i - y_j|)
enum class MedianConvention { kHalfMedianSquared, kMedianDistance };
std::string_view to_string(MedianConvention c);
MedianConvention parse_median_convention(std::string_view name);

struct MmdOptions {
  MedianConvention convention = MedianConvention::kHalfMedianSquared;
  /// Overrides the median heuristic when set.
  std::optional<double> sigma2;
};

struct MmdResult {
  double value = 0.0;
  /// sigma^2 in k(a, b) = exp(-|a - b|^2 / (2 sigma^2)).
  double sigma2 = 0.0;
};

/// Unbiased U-statistic estimate of MMD^2 with an RBF kernel. May be negative.
MmdResult mmd2_rbf(const Batch& x, const Batch& y, const MmdOptions& opt = {});

/// Exact median of all |x_i - y_j|^2 without materializing the n*m values.
double median_cross_sq_distance(const Batch& x, const Batch& y);

struct Moments2 {
  std::array<double, 2> mean{};
  SymMat2 cov;
};
Moments2 moments(const Batch& b);

/// Frechet distance between Gaussians with the given moments.
double frechet_distance(const Moments2& r, const Moments2& g);
/// Frechet distance on the empirical (unbiased covariance) moments.
double fid_2d(const Batch& x, const Batch& y);

struct MetricsReport {
  double mmd2 = 0.0;
  double fid2d = 0.0;
  std::size_t n_real = 0;
  std::size_t n_gen = 0;
  double sigma2 = 0.0;
  MedianConvention convention = MedianConvention::kHalfMedianSquared;
};

MetricsReport evaluate(const Batch& real, const Batch& generated, const MmdOptions& opt = {});

}  // namespace bm
