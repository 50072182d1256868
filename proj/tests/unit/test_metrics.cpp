// Copyright 2026 The bridgematch Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "bridgematch/datasets.hpp"
#include "bridgematch/metrics.hpp"

using namespace bm;

namespace {

Batch shifted(const Batch& b, double dx, double dy) {
  Batch out = b;
  for (std::size_t r = 0; r < out.rows(); ++r) {
    out(r, 0) += dx;
    out(r, 1) += dy;
  }
  return out;
}

double brute_median(const Batch& x, const Batch& y) {
  std::vector<double> d;
  for (std::size_t i = 0; i < x.rows(); ++i) {
    for (std::size_t j = 0; j < y.rows(); ++j) {
      d.push_back(std::pow(x(i, 0) - y(j, 0), 2) + std::pow(x(i, 1) - y(j, 1), 2));
    }
  }
  std::sort(d.begin(), d.end());
  const std::size_t n = d.size();
  return n % 2 ? d[n / 2] : 0.5 * (d[n / 2 - 1] + d[n / 2]);
}

}  // namespace

TEST_CASE("mmd basic properties") {
  Rng rng(1, Stream::kEvalTarget);
  const Batch x = sample_moons(rng, 800);
  const Batch y = sample_mixture(rng, 700);
  const MmdResult xy = mmd2_rbf(x, y);
  const MmdResult yx = mmd2_rbf(y, x);
  CHECK(xy.value == doctest::Approx(yx.value).epsilon(1e-12));
  CHECK(xy.sigma2 == yx.sigma2);
  const MmdResult moved = mmd2_rbf(shifted(x, 5, -3), shifted(y, 5, -3));
  CHECK(moved.value == doctest::Approx(xy.value).epsilon(1e-9));
  CHECK(xy.value > 0.05);

  MmdOptions fixed;
  fixed.sigma2 = 1.0;
  const Batch g = sample_gaussian(rng, 1000);
  const double near = mmd2_rbf(g, shifted(sample_gaussian(rng, 1000), 0.2, 0), fixed).value;
  const double far = mmd2_rbf(g, shifted(sample_gaussian(rng, 1000), 1.0, 0), fixed).value;
  CHECK(near < far);
  CHECK(mmd2_rbf(g, g, fixed).sigma2 == 1.0);
}

TEST_CASE("independent draws of one distribution sit at the noise floor") {
  Rng a(2, Stream::kEvalTarget), b(2, Stream::kEvalReference);
  const double v = mmd2_rbf(sample_moons(a, 2000), sample_moons(b, 2000)).value;
  CHECK(std::abs(v) < 1e-3);
}

TEST_CASE("median bandwidth is exact") {
  Rng rng(3);
  for (std::size_t n : {2u, 3u, 7u, 30u, 31u}) {
    const Batch x = rng_standard_normal(rng, n, 2);
    const Batch y = rng_standard_normal(rng, n + 1, 2);
    CHECK(median_cross_sq_distance(x, y) == brute_median(x, y));
  }
  const Batch x = rng_standard_normal(rng, 50, 2);
  const Batch y = rng_standard_normal(rng, 60, 2);
  CHECK(mmd2_rbf(x, y).sigma2 == doctest::Approx(brute_median(x, y) / 2));
  MmdOptions dist;
  dist.convention = MedianConvention::kMedianDistance;
  CHECK(mmd2_rbf(x, y, dist).sigma2 == doctest::Approx(brute_median(x, y)));
  for (auto c : {MedianConvention::kHalfMedianSquared, MedianConvention::kMedianDistance}) {
    CHECK(parse_median_convention(to_string(c)) == c);
  }
}

TEST_CASE("unbiased estimator matches a direct double sum") {
  Rng rng(4);
  const Batch x = rng_standard_normal(rng, 40, 2);
  const Batch y = shifted(rng_standard_normal(rng, 35, 2), 0.5, 0.0);
  MmdOptions opt;
  opt.sigma2 = 0.8;
  auto k = [](const Batch& a, std::size_t i, const Batch& b, std::size_t j) {
    return std::exp(-(std::pow(a(i, 0) - b(j, 0), 2) + std::pow(a(i, 1) - b(j, 1), 2)) / (2 * 0.8));
  };
  double sxx = 0, syy = 0, sxy = 0;
  for (std::size_t i = 0; i < 40; ++i)
    for (std::size_t j = 0; j < 40; ++j)
      if (i != j) sxx += k(x, i, x, j);
  for (std::size_t i = 0; i < 35; ++i)
    for (std::size_t j = 0; j < 35; ++j)
      if (i != j) syy += k(y, i, y, j);
  for (std::size_t i = 0; i < 40; ++i)
    for (std::size_t j = 0; j < 35; ++j) sxy += k(x, i, y, j);
  const double want = sxx / (40 * 39) + syy / (35 * 34) - 2 * sxy / (40 * 35);
  CHECK(mmd2_rbf(x, y, opt).value == doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("frechet distance") {
  Rng rng(5);
  const Batch x = sample_mixture(rng, 5000);
  CHECK(std::abs(fid_2d(x, x)) < 1e-10);
  CHECK(fid_2d(x, shifted(x, 1.0, 2.0)) == doctest::Approx(5.0).epsilon(1e-9));
  const Batch y = sample_moons(rng, 4000);
  CHECK(fid_2d(x, y) == doctest::Approx(fid_2d(y, x)).epsilon(1e-9));

  Moments2 a{{0, 0}, SymMat2::diag(1.0, 4.0)};
  Moments2 b{{0, 0}, SymMat2::diag(4.0, 1.0)};
  // (1 - 2)^2 + (2 - 1)^2 for commuting covariances.
  CHECK(frechet_distance(a, b) == doctest::Approx(2.0).epsilon(1e-12));
  const MetricsReport r = evaluate(x, y);
  CHECK(r.n_real == 5000);
  CHECK(r.n_gen == 4000);
  CHECK(r.fid2d == doctest::Approx(fid_2d(x, y)));
}
