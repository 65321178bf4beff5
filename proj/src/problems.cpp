// Copyright (c) 2026 the cemint developers.
// SPDX-License-Identifier: Apache-2.0

#include "cemint/problems.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace cemint {

namespace {

double bubble(double x, double y) { return x * (1.0 - x) * y * (1.0 - y); }

Reaction cubic_reaction(double scale) {
  Reaction r;
  r.tag = scale == 1.0 ? "cubic" : "cubic/eps^2";
  r.f = [scale](double u) { return scale * (u - u * u * u); };
  return r;
}

}  // namespace

bool is_coupled_example(int id) { return id == 5; }

SemilinearProblem catalogue_single(int id, double contrast, double epsilon) {
  if (contrast < 1.0) throw std::invalid_argument("contrast must be >= 1");
  SemilinearProblem p;
  p.id = id;
  p.contrast = contrast;
  switch (id) {
    case 1:
      p.reaction = Reaction{};  // vanishing reaction
      p.initial = bubble;
      p.final_time = 0.2;
      break;
    case 2:
      p.reaction = cubic_reaction(1.0);
      p.initial = bubble;
      p.final_time = 0.2;
      break;
    case 3: {
      p.epsilon = epsilon > 0.0 ? epsilon : 0.1;
      p.reaction = cubic_reaction(1.0 / (p.epsilon * p.epsilon));
      const double eps = p.epsilon;
      p.initial = [eps](double x, double y) { return eps * bubble(x, y); };
      p.final_time = 0.016;
      break;
    }
    case 4: {
      p.epsilon = epsilon > 0.0 ? epsilon : 0.05;
      p.reaction = cubic_reaction(1.0 / (p.epsilon * p.epsilon));
      const double eps = p.epsilon;
      // Circular front of radius 1/4 around the domain centre.
      p.initial = [eps](double x, double y) {
        const double r = std::sqrt((x - 0.5) * (x - 0.5) + (y - 0.5) * (y - 0.5));
        return std::tanh((0.25 - r) / std::sqrt(eps));
      };
      p.final_time = 0.016;
      break;
    }
    default:
      throw std::invalid_argument("unknown example id " + std::to_string(id));
  }
  return p;
}

CoupledProblem catalogue_coupled(double contrast) {
  if (contrast < 1.0) throw std::invalid_argument("contrast must be >= 1");
  CoupledProblem p;
  p.contrast = contrast;
  p.reaction_u = [](double u, double v) { return u - u * u * u - v; };
  p.reaction_v = [](double u, double v) { return u - v; };
  p.initial_u = [](double x, double y) { return 0.05 * std::sin(x) * std::sin(y); };
  p.initial_v = [](double x, double y) {
    return std::sin(M_PI * (x - 0.25)) * std::cos(2.0 * M_PI * (y - 0.125));
  };
  p.final_time = 0.016;
  return p;
}

namespace {

struct SplitMix64 {
  std::uint64_t state;
  std::uint64_t next() {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }
  // uniform integer in [lo, hi]
  int range(int lo, int hi) {
    return lo + static_cast<int>(next() % static_cast<std::uint64_t>(hi - lo + 1));
  }
};

double marked_fraction(const CoefficientField& field) {
  std::size_t marked = 0;
  for (double v : field.values)
    if (v > 1.0) ++marked;
  return static_cast<double>(marked) / field.values.size();
}

// Thin full-span channel; crosses every coarse element along its direction.
void add_channel(CoefficientField& field, SplitMix64& rng, double value, bool horizontal) {
  const int n = field.nx;
  const int thickness = std::min(n, rng.range(1, std::max(1, n / 64)));
  const int position = rng.range(1, std::max(1, n - thickness - 1));
  for (int t = 0; t < thickness; ++t)
    for (int k = 0; k < n; ++k) {
      if (horizontal)
        field.values[(position + t) * n + k] = value;
      else
        field.values[k * n + position + t] = value;
    }
}

// Small inclusion, below the coarse-element scale.
void add_blob(CoefficientField& field, SplitMix64& rng, double value) {
  const int n = field.nx;
  const int w = rng.range(std::max(1, n / 32), std::max(2, n / 24));
  const int h = rng.range(std::max(1, n / 32), std::max(2, n / 24));
  const int x0 = rng.range(0, std::max(0, n - w - 1));
  const int y0 = rng.range(0, std::max(0, n - h - 1));
  for (int cy = y0; cy < y0 + h; ++cy)
    for (int cx = x0; cx < x0 + w; ++cx) field.values[cy * n + cx] = value;
}

}  // namespace

CoefficientField synth_field(std::uint64_t seed, double contrast, const std::string& style,
                             int n_cells) {
  if (contrast < 1.0) throw std::invalid_argument("contrast must be >= 1");
  if (style != "channels" && style != "blobs" && style != "mixed")
    throw std::invalid_argument("unknown field style '" + style + "'");
  CoefficientField field = uniform_field(n_cells, 1.0);
  if (contrast == 1.0) return field;

  // A few thin domain-spanning channels, or a scatter of sub-element
  // inclusions; the stop threshold keeps the marked fraction inside the
  // [0.05, 0.3] contract with room to spare.
  const double target = style == "channels" ? 0.055 : style == "blobs" ? 0.10 : 0.08;
  SplitMix64 rng{0x9d2c5680cafe0000ull ^ seed};
  bool horizontal = true;
  int guard = 0;
  while (marked_fraction(field) < target && guard++ < 1024) {
    if (style == "channels" || (style == "mixed" && (guard % 2 == 0))) {
      add_channel(field, rng, contrast, horizontal);
      horizontal = !horizontal;
    } else {
      add_blob(field, rng, contrast);
    }
  }
  return field;
}

CoefficientField read_raster(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open raster file: " + path);
  CoefficientField field;
  std::string header;
  if (!std::getline(in, header)) throw std::runtime_error("raster file is empty: " + path);
  std::istringstream head(header);
  if (!(head >> field.nx >> field.ny) || field.nx < 1 || field.ny < 1)
    throw std::runtime_error("malformed raster header '" + header + "' in " + path);
  std::string trailing;
  if (head >> trailing)
    throw std::runtime_error("malformed raster header '" + header + "' in " + path);

  field.values.resize(static_cast<std::size_t>(field.nx) * field.ny);
  for (std::size_t k = 0; k < field.values.size(); ++k) {
    if (!(in >> field.values[k]))
      throw std::runtime_error("raster file " + path + ": expected " +
                               std::to_string(field.values.size()) + " values, got " +
                               std::to_string(k));
    if (!(field.values[k] > 0.0) || !std::isfinite(field.values[k]))
      throw std::runtime_error("raster file " + path + ": non-positive value at cell (" +
                               std::to_string(k % field.nx) + "," +
                               std::to_string(k / field.nx) + ")");
  }
  double extra;
  if (in >> extra)
    throw std::runtime_error("raster file " + path + ": more values than the header declares");
  return field;
}

void write_raster(const std::string& path, const CoefficientField& field) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write raster file: " + path);
  out << field.nx << ' ' << field.ny << '\n';
  out.precision(17);
  for (int cy = 0; cy < field.ny; ++cy) {
    for (int cx = 0; cx < field.nx; ++cx) {
      out << field.at(cx, cy);
      out << (cx + 1 == field.nx ? '\n' : ' ');
    }
  }
  if (!out) throw std::runtime_error("write failure on raster file: " + path);
}

Vec interpolate_interior(const FineGrid& grid, const std::function<double(double, double)>& u0) {
  Vec values(grid.interior_count());
  for (int iy = 1; iy < grid.n; ++iy)
    for (int ix = 1; ix < grid.n; ++ix)
      values[grid.interior_dof(ix, iy)] = u0(grid.coord(ix), grid.coord(iy));
  return values;
}

}  // namespace cemint
