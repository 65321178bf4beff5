// Copyright (c) 2026 the cemint developers.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <limits>
#include <string>
#include <vector>

#include "cemint/assembly.hpp"

namespace cemint {

// Relative errors at the final time: L2 (M-norm), energy (A-norm), nodal max.
struct ErrorTriple {
  double l2 = 0.0;
  double energy = 0.0;
  double max = 0.0;
};

ErrorTriple error_norms(const Vec& u_ref, const Vec& u_test, const SpMat& M, const SpMat& A);

// |log2 e_k - log2 e_{k-1}| between consecutive entries of a refinement sweep.
std::vector<double> convergence_rates(const std::vector<double>& errors);

struct ReportRow {
  std::string scheme;
  double H = 0.0;
  int layers = 0;
  int Nt = 0;
  int basis = 0;
  double eps_a = 0.0;
  double eps_0 = 0.0;
  double eps_inf = 0.0;
  double cr_a = std::numeric_limits<double>::quiet_NaN();
  double cr_0 = std::numeric_limits<double>::quiet_NaN();
  bool failed = false;
  std::string message;
};

// CSV with header scheme,H,m,Nt,basis,eps_a,eps_0,eps_inf,CR_a,CR_0; rows
// sorted by scheme, then descending H, then ascending Nt.
void emit_table(std::vector<ReportRow> rows, const std::string& path, bool timestamp);

// "nx ny" header then row-major values, same shape family as the rasters.
void write_field_dump(const std::string& path, int nx, int ny, const Vec& values);

// Interior-dof vector expanded to the full node grid with boundary zeros.
Vec expand_with_boundary(const FineGrid& grid, const Vec& interior);

}  // namespace cemint
