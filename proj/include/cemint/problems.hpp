// Copyright (c) 2026 the cemint developers.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <string>

#include "cemint/assembly.hpp"

namespace cemint {

struct Reaction {
  std::string tag = "zero";
  std::function<double(double)> f = [](double) { return 0.0; };

  bool is_zero() const { return tag == "zero"; }
  double operator()(double u) const { return f(u); }
};

struct SemilinearProblem {
  int id = 0;
  Reaction reaction;
  std::function<double(double, double)> initial;
  double final_time = 0.0;
  double epsilon = 0.0;  // interface thickness, 0 when unused
  double contrast = 1.0;
};

// Two diffusing species coupled through their reaction terms only.
struct CoupledProblem {
  int id = 5;
  std::function<double(double, double)> reaction_u;  // f_u(u, v)
  std::function<double(double, double)> reaction_v;  // f_v(u, v)
  std::function<double(double, double)> initial_u;
  std::function<double(double, double)> initial_v;
  double final_time = 0.0;
  double contrast = 1.0;
};

bool is_coupled_example(int id);
SemilinearProblem catalogue_single(int id, double contrast, double epsilon = -1.0);
CoupledProblem catalogue_coupled(double contrast);

// Deterministic synthetic high-contrast field: background 1, inclusions at
// the contrast value. Styles: "channels", "blobs", "mixed".
CoefficientField synth_field(std::uint64_t seed, double contrast, const std::string& style,
                             int n_cells);

CoefficientField read_raster(const std::string& path);
void write_raster(const std::string& path, const CoefficientField& field);

// Nodal interpolation of a closure at the interior dofs.
Vec interpolate_interior(const FineGrid& grid, const std::function<double(double, double)>& u0);

}  // namespace cemint
