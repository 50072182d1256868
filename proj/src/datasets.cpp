// Copyright 2026 The bridgematch Authors
// SPDX-License-Identifier: Apache-2.0

#include "bridgematch/datasets.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace bm {

std::string_view to_string(DatasetKind kind) {
  switch (kind) {
    case DatasetKind::kGaussian: return "gaussian";
    case DatasetKind::kMoons: return "moons";
    case DatasetKind::kMixture: return "mixture";
    case DatasetKind::kCheckerboard: return "checkerboard";
  }
  return "unknown";
}

DatasetKind parse_dataset_kind(std::string_view name) {
  if (name == "gaussian") return DatasetKind::kGaussian;
  if (name == "moons") return DatasetKind::kMoons;
  if (name == "mixture") return DatasetKind::kMixture;
  if (name == "checkerboard") return DatasetKind::kCheckerboard;
  throw std::invalid_argument("unknown dataset '" + std::string(name) + "'");
}

void DatasetSpec::validate() const {
  switch (kind) {
    case DatasetKind::kGaussian:
      if (!(std[0] > 0.0) || !(std[1] > 0.0)) {
        throw std::invalid_argument("gaussian: standard deviations must be positive");
      }
      break;
    case DatasetKind::kMoons:
      if (!(noise >= 0.0)) throw std::invalid_argument("moons: noise must be >= 0");
      break;
    case DatasetKind::kMixture:
      if (component_means.empty()) throw std::invalid_argument("mixture: no components");
      if (!(component_std > 0.0)) throw std::invalid_argument("mixture: std must be positive");
      break;
    case DatasetKind::kCheckerboard:
      if (!(scale > 0.0)) throw std::invalid_argument("checkerboard: scale must be positive");
      break;
  }
}

const std::vector<std::array<double, 2>>& default_mixture_means() {
  static const std::vector<std::array<double, 2>> means{
      {0.0, -2.0}, {0.0, 0.0}, {2.0, 2.0}, {-2.0, 2.0}};
  return means;
}

Batch sample_gaussian(Rng& rng, std::size_t b, std::array<double, 2> mean,
                      std::array<double, 2> std) {
  if (b == 0) throw std::invalid_argument("sample_gaussian: b must be >= 1");
  if (!(std[0] > 0.0) || !(std[1] > 0.0)) {
    throw std::invalid_argument("sample_gaussian: standard deviations must be positive");
  }
  Batch out(b, 2);
  for (std::size_t r = 0; r < b; ++r) {
    out(r, 0) = mean[0] + std[0] * rng.normal();
    out(r, 1) = mean[1] + std[1] * rng.normal();
  }
  return out;
}

Batch sample_moons(Rng& rng, std::size_t b, double noise) {
  if (b == 0) throw std::invalid_argument("sample_moons: b must be >= 1");
  if (!(noise >= 0.0)) throw std::invalid_argument("sample_moons: noise must be >= 0");
  Batch out(b, 2);
  for (std::size_t r = 0; r < b; ++r) {
    const double psi = std::numbers::pi * rng.uniform();
    const bool upper = rng.bit() == 0;
    double x = upper ? std::cos(psi) : 1.0 - std::cos(psi);
    double y = upper ? std::sin(psi) : 0.5 - std::sin(psi);
    if (noise > 0.0) {
      x += noise * rng.normal();
      y += noise * rng.normal();
    }
    out(r, 0) = x;
    out(r, 1) = y;
  }
  return out;
}

Batch sample_mixture(Rng& rng, std::size_t b, std::span<const std::array<double, 2>> means,
                     double component_std) {
  if (b == 0) throw std::invalid_argument("sample_mixture: b must be >= 1");
  if (means.empty()) means = default_mixture_means();
  if (!(component_std > 0.0)) throw std::invalid_argument("sample_mixture: std must be > 0");
  const auto k = static_cast<std::uint64_t>(means.size());
  Batch out(b, 2);
  for (std::size_t r = 0; r < b; ++r) {
    const auto idx = std::min<std::size_t>(
        static_cast<std::size_t>(rng.uniform() * static_cast<double>(k)), k - 1);
    out(r, 0) = means[idx][0] + component_std * rng.normal();
    out(r, 1) = means[idx][1] + component_std * rng.normal();
  }
  return out;
}

Batch sample_checkerboard(Rng& rng, std::size_t b, double scale) {
  if (b == 0) throw std::invalid_argument("sample_checkerboard: b must be >= 1");
  if (!(scale > 0.0)) throw std::invalid_argument("sample_checkerboard: scale must be > 0");
  Batch out(b, 2);
  for (std::size_t r = 0; r < b; ++r) {
    const double z1 = rng.uniform(-2.0, 2.0);
    const double u = rng.uniform();
    const int k = rng.bit();
    // Floor semantics: floor(-0.5) = -1, and -1 mod 2 = 1.
    const auto cell = static_cast<long>(std::floor(z1));
    const long parity = ((cell % 2) + 2) % 2;
    const double z2 = u - 2.0 * k + static_cast<double>(parity);
    out(r, 0) = z1 / scale;
    out(r, 1) = z2 / scale;
  }
  return out;
}

Batch sample(const DatasetSpec& spec, Rng& rng, std::size_t b) {
  spec.validate();
  switch (spec.kind) {
    case DatasetKind::kGaussian: return sample_gaussian(rng, b, spec.mean, spec.std);
    case DatasetKind::kMoons: return sample_moons(rng, b, spec.noise);
    case DatasetKind::kMixture:
      return sample_mixture(rng, b, spec.component_means, spec.component_std);
    case DatasetKind::kCheckerboard: return sample_checkerboard(rng, b, spec.scale);
  }
  throw std::logic_error("sample: unhandled dataset kind");
}

std::pair<double, double> plot_range(std::span<const Batch> batches) {
  if (batches.empty()) throw std::invalid_argument("plot_range: no batches");
  double extent = 0.0;
  std::size_t points = 0;
  for (const Batch& b : batches) {
    points += b.rows();
    for (double v : b.values()) extent = std::max(extent, std::abs(v));
  }
  if (points == 0) throw std::invalid_argument("plot_range: batches are empty");
  const double r = extent > 0.0 ? 1.05 * extent : 1.0;
  return {-r, r};
}

}  // namespace bm
