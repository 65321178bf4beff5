// Copyright (c) 2026 the cemint developers.
// SPDX-License-Identifier: Apache-2.0

#include "cemint/assembly.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace cemint {

double CoefficientField::min_value() const {
  return *std::min_element(values.begin(), values.end());
}

double CoefficientField::max_value() const {
  return *std::max_element(values.begin(), values.end());
}

void CoefficientField::validate() const {
  if (static_cast<int>(values.size()) != nx * ny)
    throw std::invalid_argument("coefficient field: expected " + std::to_string(nx * ny) +
                                " cell values, got " + std::to_string(values.size()));
  for (int cy = 0; cy < ny; ++cy)
    for (int cx = 0; cx < nx; ++cx) {
      const double v = at(cx, cy);
      if (!(v > 0.0) || !std::isfinite(v))
        throw std::invalid_argument("coefficient field: non-positive value " +
                                    std::to_string(v) + " at cell (" + std::to_string(cx) +
                                    "," + std::to_string(cy) + ")");
    }
}

std::uint64_t CoefficientField::checksum() const {
  // FNV-1a over the raw cell bytes plus the dimensions.
  std::uint64_t hash = 1469598103934665603ull;
  auto mix = [&hash](const unsigned char* p, std::size_t len) {
    for (std::size_t i = 0; i < len; ++i) {
      hash ^= p[i];
      hash *= 1099511628211ull;
    }
  };
  mix(reinterpret_cast<const unsigned char*>(&nx), sizeof nx);
  mix(reinterpret_cast<const unsigned char*>(&ny), sizeof ny);
  mix(reinterpret_cast<const unsigned char*>(values.data()), values.size() * sizeof(double));
  return hash;
}

CoefficientField uniform_field(int n_cells, double value) {
  CoefficientField field;
  field.nx = field.ny = n_cells;
  field.values.assign(static_cast<std::size_t>(n_cells) * n_cells, value);
  return field;
}

namespace {

struct ReferenceMatrices {
  Eigen::Matrix4d stiffness;
  Eigen::Matrix4d mass;
};

// 2x2 Gauss on [-1,1]^2; exact for the Q1 integrands with cellwise kappa.
ReferenceMatrices compute_reference() {
  ReferenceMatrices ref;
  ref.stiffness.setZero();
  ref.mass.setZero();
  const double g = 1.0 / std::sqrt(3.0);
  const double pts[2] = {-g, g};
  for (double eta : pts)
    for (double xi : pts) {
      Eigen::Vector4d shape;
      shape << 0.25 * (1 - xi) * (1 - eta), 0.25 * (1 + xi) * (1 - eta),
          0.25 * (1 + xi) * (1 + eta), 0.25 * (1 - xi) * (1 + eta);
      Eigen::Matrix<double, 4, 2> grad;  // d/dxi, d/deta
      grad << -0.25 * (1 - eta), -0.25 * (1 - xi), 0.25 * (1 - eta), -0.25 * (1 + xi),
          0.25 * (1 + eta), 0.25 * (1 + xi), -0.25 * (1 + eta), 0.25 * (1 - xi);
      // On a physical cell of side h: d/dx = (2/h) d/dxi and dx dy = (h/2)^2,
      // so the Jacobian factors cancel for the stiffness and give h^2/4 for
      // the mass; the h^2 is applied by the caller.
      ref.stiffness += grad * grad.transpose();
      ref.mass += 0.25 * shape * shape.transpose();
    }
  return ref;
}

const ReferenceMatrices& reference() {
  static const ReferenceMatrices ref = compute_reference();
  return ref;
}

using Triplet = Eigen::Triplet<double>;

SpMat assemble_cellwise(const FineGrid& grid, const CellBox& cells, const NodeSet& dofs,
                        const Eigen::Matrix4d& element, const std::vector<double>* scale,
                        double uniform_scale) {
  std::vector<Triplet> triplets;
  triplets.reserve(static_cast<std::size_t>(cells.cell_count()) * 16);
  for (int cy = cells.cy0; cy < cells.cy1; ++cy)
    for (int cx = cells.cx0; cx < cells.cx1; ++cx) {
      const double factor = scale ? (*scale)[grid.cell_id(cx, cy)] : uniform_scale;
      const auto nodes = grid.cell_nodes(cx, cy);
      int local[4];
      for (int a = 0; a < 4; ++a) local[a] = dofs.local(nodes[a]);
      for (int a = 0; a < 4; ++a) {
        if (local[a] < 0) continue;
        for (int b = 0; b < 4; ++b) {
          if (local[b] < 0) continue;
          triplets.emplace_back(local[a], local[b], factor * element(a, b));
        }
      }
    }
  SpMat op(dofs.size(), dofs.size());
  op.setFromTriplets(triplets.begin(), triplets.end());
  op.makeCompressed();
  return op;
}

std::vector<double> kappa_cells(const FineGrid& grid, const CoefficientField& kappa,
                                const CellBox& cells) {
  if (kappa.nx != grid.n || kappa.ny != grid.n)
    throw std::invalid_argument("coefficient raster is " + std::to_string(kappa.nx) + "x" +
                                std::to_string(kappa.ny) + " but the grid has " +
                                std::to_string(grid.n) + " cells per side");
  std::vector<double> scale(grid.cell_count(), 0.0);
  for (int cy = cells.cy0; cy < cells.cy1; ++cy)
    for (int cx = cells.cx0; cx < cells.cx1; ++cx) {
      const double v = kappa.at(cx, cy);
      if (!(v > 0.0) || !std::isfinite(v))
        throw std::invalid_argument("invalid coefficient " + std::to_string(v) + " at cell (" +
                                    std::to_string(cx) + "," + std::to_string(cy) + ")");
      scale[grid.cell_id(cx, cy)] = v;
    }
  return scale;
}

}  // namespace

const Eigen::Matrix4d& unit_stiffness() { return reference().stiffness; }
const Eigen::Matrix4d& unit_mass() { return reference().mass; }

std::vector<double> spectral_weight(const CoefficientField& kappa,
                                    const PartitionOfUnity& pou) {
  std::vector<double> weight(pou.sum_grad_sq.size());
  for (std::size_t c = 0; c < weight.size(); ++c)
    weight[c] = kappa.values[c] * pou.sum_grad_sq[c];
  return weight;
}

SpMat assemble_stiffness(const FineGrid& grid, const CoefficientField& kappa,
                         const CellBox& cells, const NodeSet& dofs) {
  const auto scale = kappa_cells(grid, kappa, cells);
  return assemble_cellwise(grid, cells, dofs, unit_stiffness(), &scale, 1.0);
}

SpMat assemble_mass(const FineGrid& grid, const CellBox& cells, const NodeSet& dofs) {
  return assemble_cellwise(grid, cells, dofs, unit_mass(), nullptr, grid.h * grid.h);
}

SpMat assemble_weighted_mass(const FineGrid& grid, const std::vector<double>& cell_weight,
                             const CellBox& cells, const NodeSet& dofs) {
  std::vector<double> scale(cell_weight.size());
  const double h2 = grid.h * grid.h;
  for (std::size_t c = 0; c < scale.size(); ++c) scale[c] = h2 * cell_weight[c];
  return assemble_cellwise(grid, cells, dofs, unit_mass(), &scale, 1.0);
}

SpMat assemble_stiffness(const FineGrid& grid, const CoefficientField& kappa) {
  return assemble_stiffness(grid, kappa, {0, 0, grid.n, grid.n}, NodeSet::interior(grid));
}

SpMat assemble_mass(const FineGrid& grid) {
  return assemble_mass(grid, {0, 0, grid.n, grid.n}, NodeSet::interior(grid));
}

Vec nonlinear_load(const SpMat& M, const std::function<double(double)>& f, const Vec& u) {
  Vec fu(u.size());
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    fu[i] = f(u[i]);
    if (!std::isfinite(fu[i]))
      throw std::runtime_error("nonlinear load: non-finite reaction value at node " +
                               std::to_string(i));
  }
  return M * fu;
}

}  // namespace cemint
