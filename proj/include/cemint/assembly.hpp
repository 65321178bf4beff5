// Copyright (c) 2026 the cemint developers.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <cstdint>
#include <functional>
#include <vector>

#include "cemint/grid.hpp"

namespace cemint {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using SpMat = Eigen::SparseMatrix<double>;

// Cellwise-constant coefficient raster.
struct CoefficientField {
  int nx = 0, ny = 0;
  std::vector<double> values;  // row-major, values[cy*nx + cx]

  double at(int cx, int cy) const { return values[cy * nx + cx]; }
  double min_value() const;
  double max_value() const;

  // Throws naming the offending cell if any value is not finite positive.
  void validate() const;

  std::uint64_t checksum() const;
};

CoefficientField uniform_field(int n_cells, double value = 1.0);

// Reference Q1 element matrices from 2x2 Gauss quadrature.
// Stiffness is independent of the cell size; mass scales with h^2.
const Eigen::Matrix4d& unit_stiffness();
const Eigen::Matrix4d& unit_mass();

// kappa * sum_i |grad chi_i|^2 per fine cell.
std::vector<double> spectral_weight(const CoefficientField& kappa,
                                    const PartitionOfUnity& pou);

SpMat assemble_stiffness(const FineGrid& grid, const CoefficientField& kappa,
                         const CellBox& cells, const NodeSet& dofs);
SpMat assemble_mass(const FineGrid& grid, const CellBox& cells, const NodeSet& dofs);
SpMat assemble_weighted_mass(const FineGrid& grid, const std::vector<double>& cell_weight,
                             const CellBox& cells, const NodeSet& dofs);

// Global operators on the interior (homogeneous Dirichlet) dofs.
SpMat assemble_stiffness(const FineGrid& grid, const CoefficientField& kappa);
SpMat assemble_mass(const FineGrid& grid);

// M * f(u) with f applied nodewise.
Vec nonlinear_load(const SpMat& M, const std::function<double(double)>& f, const Vec& u);

}  // namespace cemint
