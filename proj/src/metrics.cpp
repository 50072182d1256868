// Copyright 2026 The bridgematch Authors
// SPDX-License-Identifier: Apache-2.0

#include "bridgematch/metrics.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace bm {

std::string_view to_string(MedianConvention c) {
  return c == MedianConvention::kHalfMedianSquared ? "half_median_squared" : "median_distance";
}

MedianConvention parse_median_convention(std::string_view name) {
  if (name == "half_median_squared") return MedianConvention::kHalfMedianSquared;
  if (name == "median_distance") return MedianConvention::kMedianDistance;
  throw std::invalid_argument("unknown median convention '" + std::string(name) + "'");
}

namespace {

inline double sq_dist(const Batch& x, std::size_t i, const Batch& y, std::size_t j) {
  double s = 0.0;
  for (std::size_t c = 0; c < x.cols(); ++c) {
    const double d = x(i, c) - y(j, c);
    s += d * d;
  }
  return s;
}

template <typename Visit>
void for_each_cross(const Batch& x, const Batch& y, Visit&& visit) {
  for (std::size_t i = 0; i < x.rows(); ++i) {
    for (std::size_t j = 0; j < y.rows(); ++j) visit(sq_dist(x, i, y, j));
  }
}

// k-th smallest (0-based) cross squared distance. Non-negative doubles order
// like their bit patterns, so a radix walk over 20-bit digits narrows the
// candidate set until it fits in memory.
double select_cross(const Batch& x, const Batch& y, std::uint64_t k) {
  constexpr int kDigit = 20;
  constexpr std::size_t kBuckets = std::size_t{1} << kDigit;
  constexpr std::uint64_t kCollectLimit = std::uint64_t{1} << 22;
  std::uint64_t prefix = 0;
  int prefix_bits = 0;
  std::vector<std::uint64_t> hist(kBuckets);
  while (true) {
    const int shift = std::max(0, 64 - prefix_bits - kDigit);
    const int width = 64 - prefix_bits - shift;
    const std::uint64_t mask = (std::uint64_t{1} << width) - 1;
    std::fill(hist.begin(), hist.end(), 0);
    for_each_cross(x, y, [&](double v) {
      const auto bits = std::bit_cast<std::uint64_t>(v);
      if (prefix_bits > 0 && (bits >> (64 - prefix_bits)) != prefix) return;
      ++hist[(bits >> shift) & mask];
    });
    std::size_t bucket = 0;
    while (k >= hist[bucket]) k -= hist[bucket++];
    const std::uint64_t next_prefix = (prefix << width) | bucket;
    const int next_bits = prefix_bits + width;
    if (hist[bucket] <= kCollectLimit || next_bits == 64) {
      if (next_bits == 64) return std::bit_cast<double>(next_prefix);
      std::vector<double> pool;
      pool.reserve(hist[bucket]);
      for_each_cross(x, y, [&](double v) {
        if ((std::bit_cast<std::uint64_t>(v) >> (64 - next_bits)) == next_prefix) pool.push_back(v);
      });
      std::nth_element(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(k), pool.end());
      return pool[k];
    }
    prefix = next_prefix;
    prefix_bits = next_bits;
  }
}

std::pair<double, double> middle_pair(const Batch& x, const Batch& y) {
  const std::uint64_t total = static_cast<std::uint64_t>(x.rows()) * y.rows();
  const double hi = select_cross(x, y, total / 2);
  if (total % 2 == 1) return {hi, hi};
  return {select_cross(x, y, total / 2 - 1), hi};
}

void check_inputs(const Batch& x, const Batch& y, const char* what) {
  if (x.rows() < 2 || y.rows() < 2) {
    throw std::invalid_argument(std::string(what) + ": both sets need at least 2 rows");
  }
  if (x.cols() != y.cols()) throw std::invalid_argument(std::string(what) + ": dimension mismatch");
  require_finite(x, what);
  require_finite(y, what);
}

// Column-major copy so a row-vs-set kernel sum vectorizes.
Eigen::ArrayXXd columns(const Batch& b) {
  Eigen::ArrayXXd out(b.rows(), b.cols());
  for (std::size_t i = 0; i < b.rows(); ++i) {
    for (std::size_t c = 0; c < b.cols(); ++c) out(i, c) = b(i, c);
  }
  return out;
}

// Sum over j in [begin, rows) of exp(-|a_i - b_j|^2 * g).
double kernel_row_sum(const Eigen::ArrayXXd& a, Eigen::Index i, const Eigen::ArrayXXd& b,
                      Eigen::Index begin, double g, Eigen::ArrayXd& scratch) {
  const Eigen::Index len = b.rows() - begin;
  if (len <= 0) return 0.0;
  scratch.resize(len);
  scratch.setZero();
  for (Eigen::Index c = 0; c < b.cols(); ++c) {
    scratch += (b.col(c).segment(begin, len) - a(i, c)).square();
  }
  return (scratch * (-g)).exp().sum();
}

}  // namespace

double median_cross_sq_distance(const Batch& x, const Batch& y) {
  check_inputs(x, y, "median_cross_sq_distance");
  const auto [lo, hi] = middle_pair(x, y);
  return 0.5 * (lo + hi);
}

MmdResult mmd2_rbf(const Batch& x, const Batch& y, const MmdOptions& opt) {
  check_inputs(x, y, "mmd2_rbf");
  MmdResult out;
  if (opt.sigma2) {
    out.sigma2 = *opt.sigma2;
  } else {
    const auto [lo, hi] = middle_pair(x, y);
    if (opt.convention == MedianConvention::kHalfMedianSquared) {
      out.sigma2 = 0.25 * (lo + hi);
    } else {
      const double s = 0.5 * (std::sqrt(lo) + std::sqrt(hi));
      out.sigma2 = s * s;
    }
  }
  if (!(out.sigma2 > 0.0) || !std::isfinite(out.sigma2)) {
    throw std::domain_error("mmd2_rbf: bandwidth is zero (all cross distances vanish)");
  }
  const double g = 1.0 / (2.0 * out.sigma2);
  const Eigen::ArrayXXd ax = columns(x);
  const Eigen::ArrayXXd ay = columns(y);
  Eigen::ArrayXd scratch;
  const auto n = static_cast<double>(x.rows());
  const auto m = static_cast<double>(y.rows());

  double sxx = 0.0;
  for (Eigen::Index i = 0; i < ax.rows(); ++i) sxx += kernel_row_sum(ax, i, ax, i + 1, g, scratch);
  double syy = 0.0;
  for (Eigen::Index i = 0; i < ay.rows(); ++i) syy += kernel_row_sum(ay, i, ay, i + 1, g, scratch);
  double sxy = 0.0;
  for (Eigen::Index i = 0; i < ax.rows(); ++i) sxy += kernel_row_sum(ax, i, ay, 0, g, scratch);

  out.value = 2.0 * sxx / (n * (n - 1.0)) + 2.0 * syy / (m * (m - 1.0)) - 2.0 * sxy / (n * m);
  return out;
}

Moments2 moments(const Batch& b) {
  if (b.rows() < 2 || b.cols() != 2) throw std::invalid_argument("moments: need B >= 2 rows of 2D points");
  const std::vector<double> mu = column_mean(b);
  return Moments2{{mu[0], mu[1]}, sample_covariance(b)};
}

double frechet_distance(const Moments2& r, const Moments2& g) {
  const double dx = r.mean[0] - g.mean[0];
  const double dy = r.mean[1] - g.mean[1];
  const SymMat2 root_r = spd2_sqrt(r.cov);
  const SymMat2 cross = spd2_sqrt(sandwich(root_r, g.cov));
  const double v = dx * dx + dy * dy + r.cov.trace() + g.cov.trace() - 2.0 * cross.trace();
  return std::max(v, 0.0);
}

double fid_2d(const Batch& x, const Batch& y) {
  check_inputs(x, y, "fid_2d");
  return frechet_distance(moments(x), moments(y));
}

MetricsReport evaluate(const Batch& real, const Batch& generated, const MmdOptions& opt) {
  const MmdResult mmd = mmd2_rbf(real, generated, opt);
  MetricsReport rep;
  rep.mmd2 = mmd.value;
  rep.sigma2 = mmd.sigma2;
  rep.fid2d = fid_2d(real, generated);
  rep.n_real = real.rows();
  rep.n_gen = generated.rows();
  rep.convention = opt.convention;
  return rep;
}

}  // namespace bm
