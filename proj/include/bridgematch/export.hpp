// Copyright 2026 The bridgematch Authors
// SPDX-License-Identifier: Apache-2.0
//
// Text and SVG outputs. Numbers are written with 17 significant digits so
// every file parses back to the identical doubles.

#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "bridgematch/sampling.hpp"
#include "bridgematch/training.hpp"

namespace bm {

using PlotRange = std::pair<double, double>;

struct Table {
  std::vector<std::string> header;
  Batch values;
};

std::string format_exact(double v);

void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const Batch& values);
Table read_csv(const std::filesystem::path& path);

/// Header "x,y".
void write_samples(const std::filesystem::path& path, const Batch& samples);
Batch read_samples(const std::filesystem::path& path);

/// One row per particle; columns x@<t>,y@<t> for each recorded time.
void export_trajectory(const Trajectory& traj, const std::filesystem::path& path);
Trajectory read_trajectory(const std::filesystem::path& path);

struct ScatterStyle {
  int size_px = 512;
  double radius_px = 1.2;
  std::string color = "#1f4e79";
};

/// Square scatter over [lo, hi]^2; points outside the range are dropped.
/// Returns the number of markers written.
std::size_t render_scatter(const Batch& points, PlotRange range, const std::filesystem::path& path,
                           const ScatterStyle& style = {});

struct FieldGrid {
  double lo = -1.0;
  double hi = 1.0;
  std::size_t g = 45;
  std::vector<double> times;
  /// One G*G x 2 batch per time, node (i, j) at row j * G + i.
  std::vector<Batch> u;
  std::vector<Batch> d;

  [[nodiscard]] Batch nodes() const;
};

/// Evaluates both networks on a G x G lattice spanning [lo, hi]^2 at each time.
FieldGrid evaluate_field_grid(const Checkpoint& ckpt, PlotRange range, std::size_t g,
                              const std::vector<double>& times);

/// Writes u_<k>.csv, d_<k>.csv and matching SVG plots into `dir`; returns the
/// written paths.
std::vector<std::filesystem::path> write_field_grid(const FieldGrid& grid,
                                                    const std::filesystem::path& dir);

FieldGrid export_field_grid(const Checkpoint& ckpt, PlotRange range, std::size_t g,
                            const std::vector<double>& times, const std::filesystem::path& dir);

std::vector<double> default_field_times();

}  // namespace bm
