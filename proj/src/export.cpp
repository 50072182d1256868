// Copyright 2026 The bridgematch Authors
// SPDX-License-Identifier: Apache-2.0

#include "bridgematch/export.hpp"

#include <charconv>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace bm {

namespace fs = std::filesystem;

std::string format_exact(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

namespace {

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

std::vector<std::string> split_commas(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    out.push_back(line.substr(start, comma == std::string::npos ? std::string::npos : comma - start));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

double parse_cell(const std::string& cell, const fs::path& path, std::size_t line_no) {
  double v = 0.0;
  const char* begin = cell.data();
  const char* end = begin + cell.size();
  auto [ptr, ec] = std::from_chars(begin, end, v);
  if (ec != std::errc() || ptr != end) {
    throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": bad number '" + cell + "'");
  }
  return v;
}

// Fixed two-decimal coordinates keep SVG bytes stable and compact.
std::string px(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string svg_open(int size) {
  std::ostringstream s;
  s << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
    << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << size << "\" height=\""
    << size << "\" viewBox=\"0 0 " << size << ' ' << size << "\">\n"
    << "<rect x=\"0\" y=\"0\" width=\"" << size << "\" height=\"" << size << "\" fill=\"#ffffff\"/>\n";
  return s.str();
}

std::string grey(double level) {
  const int v = 255 - static_cast<int>(std::lround(std::clamp(level, 0.0, 1.0) * 180.0));
  char buf[8];
  std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", v, v, 255);
  return buf;
}

void write_field_svg(const FieldGrid& grid, const Batch& values, const fs::path& path) {
  constexpr int kSize = 540;
  const double cell = static_cast<double>(kSize) / static_cast<double>(grid.g);
  double vmax = 0.0;
  for (std::size_t k = 0; k < values.rows(); ++k) {
    vmax = std::max(vmax, std::hypot(values(k, 0), values(k, 1)));
  }
  const double gain = vmax > 0.0 ? 0.9 * cell / vmax : 0.0;
  std::ofstream out = open_out(path);
  out << svg_open(kSize);
  for (std::size_t j = 0; j < grid.g; ++j) {
    for (std::size_t i = 0; i < grid.g; ++i) {
      const std::size_t k = j * grid.g + i;
      const double mag = std::hypot(values(k, 0), values(k, 1));
      const double left = static_cast<double>(i) * cell;
      const double top = static_cast<double>(grid.g - 1 - j) * cell;
      out << "<rect x=\"" << px(left) << "\" y=\"" << px(top) << "\" width=\"" << px(cell)
          << "\" height=\"" << px(cell) << "\" fill=\"" << grey(vmax > 0.0 ? mag / vmax : 0.0)
          << "\"/>\n";
    }
  }
  for (std::size_t j = 0; j < grid.g; ++j) {
    for (std::size_t i = 0; i < grid.g; ++i) {
      const std::size_t k = j * grid.g + i;
      const double cx = (static_cast<double>(i) + 0.5) * cell;
      const double cy = (static_cast<double>(grid.g - 1 - j) + 0.5) * cell;
      const double ex = cx + gain * values(k, 0);
      const double ey = cy - gain * values(k, 1);
      out << "<line x1=\"" << px(cx) << "\" y1=\"" << px(cy) << "\" x2=\"" << px(ex) << "\" y2=\""
          << px(ey) << "\" stroke=\"#202020\" stroke-width=\"0.8\"/>\n";
    }
  }
  out << "</svg>\n";
}

}  // namespace

void write_csv(const fs::path& path, const std::vector<std::string>& header, const Batch& values) {
  if (header.size() != values.cols()) throw std::invalid_argument("write_csv: header/column mismatch");
  std::ofstream out = open_out(path);
  for (std::size_t c = 0; c < header.size(); ++c) out << (c ? "," : "") << header[c];
  out << '\n';
  for (std::size_t r = 0; r < values.rows(); ++r) {
    for (std::size_t c = 0; c < values.cols(); ++c) out << (c ? "," : "") << format_exact(values(r, c));
    out << '\n';
  }
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

Table read_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(path.string() + ": empty file");
  Table t;
  t.header = split_commas(line);
  std::vector<double> data;
  std::size_t rows = 0;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto cells = split_commas(line);
    if (cells.size() != t.header.size()) {
      throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": wrong column count");
    }
    for (const auto& c : cells) data.push_back(parse_cell(c, path, line_no));
    ++rows;
  }
  t.values = Batch(rows, t.header.size(), std::move(data));
  return t;
}

void write_samples(const fs::path& path, const Batch& samples) {
  write_csv(path, {"x", "y"}, samples);
}

Batch read_samples(const fs::path& path) {
  Table t = read_csv(path);
  if (t.values.cols() != 2) throw std::runtime_error(path.string() + ": expected two columns");
  return std::move(t.values);
}

void export_trajectory(const Trajectory& traj, const fs::path& path) {
  if (traj.states.empty() || traj.states.size() != traj.times.size()) {
    throw std::invalid_argument("export_trajectory: malformed trajectory");
  }
  const std::size_t n = traj.states.front().rows();
  const std::size_t k = traj.states.size();
  std::vector<std::string> header;
  Batch table(n, 2 * k);
  for (std::size_t j = 0; j < k; ++j) {
    const std::string tag = "@" + format_exact(traj.times[j]);
    header.push_back("x" + tag);
    header.push_back("y" + tag);
    for (std::size_t i = 0; i < n; ++i) {
      table(i, 2 * j) = traj.states[j](i, 0);
      table(i, 2 * j + 1) = traj.states[j](i, 1);
    }
  }
  write_csv(path, header, table);
}

Trajectory read_trajectory(const fs::path& path) {
  const Table t = read_csv(path);
  if (t.header.size() % 2 != 0) throw std::runtime_error(path.string() + ": odd column count");
  Trajectory traj;
  for (std::size_t j = 0; 2 * j < t.header.size(); ++j) {
    const std::string& h = t.header[2 * j];
    const std::size_t at = h.find('@');
    if (at == std::string::npos) throw std::runtime_error(path.string() + ": bad header " + h);
    traj.times.push_back(parse_cell(h.substr(at + 1), path, 1));
    Batch s(t.values.rows(), 2);
    for (std::size_t i = 0; i < s.rows(); ++i) {
      s(i, 0) = t.values(i, 2 * j);
      s(i, 1) = t.values(i, 2 * j + 1);
    }
    traj.states.push_back(std::move(s));
  }
  return traj;
}

std::size_t render_scatter(const Batch& points, PlotRange range, const fs::path& path,
                           const ScatterStyle& style) {
  if (points.rows() == 0) throw std::invalid_argument("render_scatter: empty batch");
  if (points.cols() != 2) throw std::invalid_argument("render_scatter: expected 2D points");
  if (!(range.second > range.first)) throw std::invalid_argument("render_scatter: empty range");
  const double size = style.size_px;
  const double scale = size / (range.second - range.first);
  std::ofstream out = open_out(path);
  out << svg_open(style.size_px);
  out << "<g fill=\"" << style.color << "\" fill-opacity=\"0.6\">\n";
  std::size_t written = 0;
  for (std::size_t i = 0; i < points.rows(); ++i) {
    const double x = points(i, 0);
    const double y = points(i, 1);
    if (!(x >= range.first && x <= range.second && y >= range.first && y <= range.second)) continue;
    out << "<circle cx=\"" << px((x - range.first) * scale) << "\" cy=\""
        << px(size - (y - range.first) * scale) << "\" r=\"" << px(style.radius_px) << "\"/>\n";
    ++written;
  }
  out << "</g>\n</svg>\n";
  if (!out) throw std::runtime_error("failed writing " + path.string());
  return written;
}

Batch FieldGrid::nodes() const {
  Batch out(g * g, 2);
  const double step = g > 1 ? (hi - lo) / static_cast<double>(g - 1) : 0.0;
  for (std::size_t j = 0; j < g; ++j) {
    for (std::size_t i = 0; i < g; ++i) {
      out(j * g + i, 0) = lo + static_cast<double>(i) * step;
      out(j * g + i, 1) = lo + static_cast<double>(j) * step;
    }
  }
  return out;
}

FieldGrid evaluate_field_grid(const Checkpoint& ckpt, PlotRange range, std::size_t g,
                              const std::vector<double>& times) {
  if (g < 2) throw std::invalid_argument("field grid: need g >= 2");
  if (!(range.second > range.first)) throw std::invalid_argument("field grid: empty range");
  FieldGrid grid;
  grid.lo = range.first;
  grid.hi = range.second;
  grid.g = g;
  grid.times = times;
  const Batch nodes = grid.nodes();
  for (const double t : times) {
    grid.u.push_back(mlp_forward(ckpt.u, nodes, t));
    grid.d.push_back(mlp_forward(ckpt.d, nodes, t));
  }
  return grid;
}

std::vector<fs::path> write_field_grid(const FieldGrid& grid, const fs::path& dir) {
  fs::create_directories(dir);
  std::vector<fs::path> written;
  const Batch nodes = grid.nodes();
  for (std::size_t k = 0; k < grid.times.size(); ++k) {
    for (const auto& [name, values] : {std::pair<const char*, const Batch*>{"u", &grid.u[k]},
                                      std::pair<const char*, const Batch*>{"d", &grid.d[k]}}) {
      Batch table(nodes.rows(), 4);
      for (std::size_t r = 0; r < nodes.rows(); ++r) {
        table(r, 0) = nodes(r, 0);
        table(r, 1) = nodes(r, 1);
        table(r, 2) = (*values)(r, 0);
        table(r, 3) = (*values)(r, 1);
      }
      const std::string stem = std::string(name) + "_" + std::to_string(k);
      const fs::path csv = dir / (stem + ".csv");
      write_csv(csv, {"x", "y", "vx", "vy"}, table);
      const fs::path svg = dir / (stem + ".svg");
      write_field_svg(grid, *values, svg);
      written.push_back(csv);
      written.push_back(svg);
    }
  }
  std::ofstream index = open_out(dir / "times.txt");
  for (std::size_t k = 0; k < grid.times.size(); ++k) index << k << ' ' << format_exact(grid.times[k]) << '\n';
  written.push_back(dir / "times.txt");
  return written;
}

FieldGrid export_field_grid(const Checkpoint& ckpt, PlotRange range, std::size_t g,
                            const std::vector<double>& times, const fs::path& dir) {
  FieldGrid grid = evaluate_field_grid(ckpt, range, g, times);
  write_field_grid(grid, dir);
  return grid;
}

std::vector<double> default_field_times() { return {0.0, 0.25, 0.5, 0.75, 1.0}; }

}  // namespace bm
