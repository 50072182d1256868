// Copyright 2026 The bridgematch Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "bridgematch/numerics.hpp"

namespace bm {

enum class DatasetKind { kGaussian, kMoons, kMixture, kCheckerboard };

std::string_view to_string(DatasetKind kind);
DatasetKind parse_dataset_kind(std::string_view name);

/// Parameters for one of the four toy distributions. Only the fields relevant to
/// `kind` are read.
struct DatasetSpec {
  DatasetKind kind = DatasetKind::kGaussian;
  // gaussian
  std::array<double, 2> mean{0.0, 0.0};
  std::array<double, 2> std{1.0, 1.0};
  // moons
  double noise = 0.05;
  // mixture
  std::vector<std::array<double, 2>> component_means{{0.0, -2.0}, {0.0, 0.0}, {2.0, 2.0},
                                                     {-2.0, 2.0}};
  double component_std = 0.5;
  // checkerboard
  double scale = 0.45;

  static DatasetSpec of(DatasetKind kind) {
    DatasetSpec s;
    s.kind = kind;
    return s;
  }

  /// Throws std::invalid_argument on non-positive scales or an empty mixture.
  void validate() const;

  friend bool operator==(const DatasetSpec&, const DatasetSpec&) = default;
};

Batch sample_gaussian(Rng& rng, std::size_t b, std::array<double, 2> mean = {0.0, 0.0},
                      std::array<double, 2> std = {1.0, 1.0});
/// Upper arc (cos p, sin p), lower arc (1 - cos p, 0.5 - sin p), p ~ U[0, pi],
/// each arc with probability 1/2, plus isotropic N(0, noise^2).
Batch sample_moons(Rng& rng, std::size_t b, double noise = 0.05);
Batch sample_mixture(Rng& rng, std::size_t b,
                     std::span<const std::array<double, 2>> means = {},
                     double component_std = 0.5);
/// z1 ~ U[-2, 2], z2 = u - 2k + (floor(z1) mod 2), output (z1, z2) / scale.
Batch sample_checkerboard(Rng& rng, std::size_t b, double scale = 0.45);

Batch sample(const DatasetSpec& spec, Rng& rng, std::size_t b);

/// Default mixture component means.
const std::vector<std::array<double, 2>>& default_mixture_means();

/// Symmetric square plotting range [-r, r] covering every point with a 5% margin.
std::pair<double, double> plot_range(std::span<const Batch> batches);

}  // namespace bm
