// Copyright (c) 2026 the cemint developers.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <vector>

namespace cemint {

// Uniform Q1 grid on the unit square with n cells per side.
// Nodes are numbered row-major; homogeneous Dirichlet dofs are the
// interior nodes, likewise row-major.
struct FineGrid {
  int n = 0;
  double h = 0.0;

  explicit FineGrid(int n_cells_per_side);

  int node_count() const { return (n + 1) * (n + 1); }
  int cell_count() const { return n * n; }
  int interior_count() const { return (n - 1) * (n - 1); }

  int node_id(int ix, int iy) const { return iy * (n + 1) + ix; }
  int cell_id(int cx, int cy) const { return cy * n + cx; }
  bool is_boundary_node(int ix, int iy) const {
    return ix == 0 || iy == 0 || ix == n || iy == n;
  }

  // Interior dof index of node (ix, iy), or -1 on the boundary.
  int interior_dof(int ix, int iy) const {
    if (is_boundary_node(ix, iy)) return -1;
    return (iy - 1) * (n - 1) + (ix - 1);
  }
  int interior_dof_of_node(int node) const {
    return interior_dof(node % (n + 1), node / (n + 1));
  }

  // Corner nodes of cell (cx, cy), counterclockwise from the lower left.
  std::array<int, 4> cell_nodes(int cx, int cy) const {
    const int p = node_id(cx, cy);
    return {p, p + 1, p + n + 2, p + n + 1};
  }

  double coord(int index) const { return index * h; }
};

// Half-open box of fine-cell indices.
struct CellBox {
  int cx0 = 0, cy0 = 0, cx1 = 0, cy1 = 0;

  bool contains(int cx, int cy) const {
    return cx >= cx0 && cx < cx1 && cy >= cy0 && cy < cy1;
  }
  int cell_count() const { return (cx1 - cx0) * (cy1 - cy0); }
  bool operator==(const CellBox&) const = default;
};

// Conforming coarse partition; every coarse element is a square block of
// fine cells.
struct CoarseGrid {
  int N = 0;
  int ratio = 0;  // fine cells per coarse cell side
  double H = 0.0;

  CoarseGrid(int n_fine, int N_coarse);

  int element_count() const { return N * N; }
  int vertex_count() const { return (N + 1) * (N + 1); }
  int element_id(int ex, int ey) const { return ey * N + ex; }
  int element_x(int e) const { return e % N; }
  int element_y(int e) const { return e / N; }

  CellBox element_cells(int e) const {
    const int ex = element_x(e), ey = element_y(e);
    return {ex * ratio, ey * ratio, (ex + 1) * ratio, (ey + 1) * ratio};
  }
};

// Ordered node subset carrying a local dof numbering.
struct NodeSet {
  std::vector<int> nodes;          // global node ids in local order
  std::vector<int> local_of_node;  // node id -> local dof, -1 if absent

  int size() const { return static_cast<int>(nodes.size()); }
  int local(int node) const { return local_of_node[node]; }

  // All interior nodes; local numbering coincides with interior dofs.
  static NodeSet interior(const FineGrid& grid);
  // All nodes of the box except those on the domain boundary.
  static NodeSet box_natural(const FineGrid& grid, const CellBox& box);
  // Nodes strictly inside the box (zero trace on the box boundary).
  static NodeSet box_zero_trace(const FineGrid& grid, const CellBox& box);
};

// K_{i,m}: coarse element i grown by m coarse layers, clipped to the domain.
struct OversampleRegion {
  int element = 0;
  int layers = 0;
  int ex0 = 0, ey0 = 0, ex1 = 0, ey1 = 0;  // half-open coarse-element box
  CellBox cells;
  NodeSet dofs;  // zero trace on the region boundary

  bool covers_domain(const CoarseGrid& coarse) const {
    return ex0 == 0 && ey0 == 0 && ex1 == coarse.N && ey1 == coarse.N;
  }
};

// Bilinear hats on the coarse vertices. chi is evaluated analytically;
// sum_grad_sq holds sum_i |grad chi_i|^2 at fine-cell midpoints.
struct PartitionOfUnity {
  int N = 0;
  double H = 0.0;
  std::vector<double> sum_grad_sq;  // per fine cell

  double chi(int vx, int vy, double x, double y) const;
};

struct Grids {
  FineGrid fine;
  CoarseGrid coarse;
  PartitionOfUnity pou;
};

Grids build_grids(int n_fine, int N_coarse);

OversampleRegion oversample(const FineGrid& fine, const CoarseGrid& coarse,
                            int element, int layers);

// Oversampling layer count for a given coarse size and contrast,
// m = max(1, floor(c * ln(kappa_max / H))) with c defaulting to 1/ln(10).
int default_layers(double H, double kappa_max,
                   double coefficient = 0.43429448190325176);

}  // namespace cemint
