// Copyright (c) 2026 the cemint developers.
// SPDX-License-Identifier: Apache-2.0

#include "cemint/grid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace cemint {

FineGrid::FineGrid(int n_cells_per_side) : n(n_cells_per_side) {
  if (n < 2)
    throw std::invalid_argument("fine grid needs at least 2 cells per side, got " +
                                std::to_string(n));
  h = 1.0 / n;
}

CoarseGrid::CoarseGrid(int n_fine, int N_coarse) : N(N_coarse) {
  if (N < 2)
    throw std::invalid_argument("coarse grid needs at least 2 elements per side, got " +
                                std::to_string(N));
  if (n_fine % N != 0)
    throw std::invalid_argument("n_fine=" + std::to_string(n_fine) +
                                " not divisible by N_coarse=" + std::to_string(N));
  ratio = n_fine / N;
  H = 1.0 / N;
}

NodeSet NodeSet::interior(const FineGrid& grid) {
  NodeSet set;
  set.local_of_node.assign(grid.node_count(), -1);
  set.nodes.reserve(grid.interior_count());
  for (int iy = 1; iy < grid.n; ++iy)
    for (int ix = 1; ix < grid.n; ++ix) {
      set.local_of_node[grid.node_id(ix, iy)] = set.size();
      set.nodes.push_back(grid.node_id(ix, iy));
    }
  return set;
}

NodeSet NodeSet::box_natural(const FineGrid& grid, const CellBox& box) {
  NodeSet set;
  set.local_of_node.assign(grid.node_count(), -1);
  for (int iy = box.cy0; iy <= box.cy1; ++iy)
    for (int ix = box.cx0; ix <= box.cx1; ++ix) {
      if (grid.is_boundary_node(ix, iy)) continue;
      set.local_of_node[grid.node_id(ix, iy)] = set.size();
      set.nodes.push_back(grid.node_id(ix, iy));
    }
  return set;
}

NodeSet NodeSet::box_zero_trace(const FineGrid& grid, const CellBox& box) {
  NodeSet set;
  set.local_of_node.assign(grid.node_count(), -1);
  for (int iy = box.cy0 + 1; iy <= box.cy1 - 1; ++iy)
    for (int ix = box.cx0 + 1; ix <= box.cx1 - 1; ++ix) {
      set.local_of_node[grid.node_id(ix, iy)] = set.size();
      set.nodes.push_back(grid.node_id(ix, iy));
    }
  return set;
}

namespace {

// 1D hat centered at c with support radius H.
double hat(double x, double c, double H) {
  const double t = 1.0 - std::abs(x - c) / H;
  return t > 0.0 ? t : 0.0;
}

}  // namespace

double PartitionOfUnity::chi(int vx, int vy, double x, double y) const {
  return hat(x, vx * H, H) * hat(y, vy * H, H);
}

Grids build_grids(int n_fine, int N_coarse) {
  FineGrid fine(n_fine);
  CoarseGrid coarse(n_fine, N_coarse);

  PartitionOfUnity pou;
  pou.N = coarse.N;
  pou.H = coarse.H;
  pou.sum_grad_sq.assign(fine.cell_count(), 0.0);

  // Midpoint evaluation; only the four hats of the ambient coarse cell are
  // active there.
  for (int cy = 0; cy < fine.n; ++cy)
    for (int cx = 0; cx < fine.n; ++cx) {
      const double xm = (cx + 0.5) * fine.h;
      const double ym = (cy + 0.5) * fine.h;
      const int ex = cx / coarse.ratio;
      const int ey = cy / coarse.ratio;
      double total = 0.0;
      for (int b = ey; b <= ey + 1; ++b)
        for (int a = ex; a <= ex + 1; ++a) {
          const double tx = hat(xm, a * coarse.H, coarse.H);
          const double ty = hat(ym, b * coarse.H, coarse.H);
          const double dtx = (xm < a * coarse.H ? 1.0 : -1.0) / coarse.H;
          const double dty = (ym < b * coarse.H ? 1.0 : -1.0) / coarse.H;
          total += dtx * ty * dtx * ty + tx * dty * tx * dty;
        }
      pou.sum_grad_sq[fine.cell_id(cx, cy)] = total;
    }

  return {fine, coarse, pou};
}

OversampleRegion oversample(const FineGrid& fine, const CoarseGrid& coarse,
                            int element, int layers) {
  if (layers < 1) throw std::invalid_argument("oversampling needs layers >= 1");
  OversampleRegion region;
  region.element = element;
  region.layers = layers;
  const int ex = coarse.element_x(element);
  const int ey = coarse.element_y(element);
  region.ex0 = std::max(0, ex - layers);
  region.ey0 = std::max(0, ey - layers);
  region.ex1 = std::min(coarse.N, ex + layers + 1);
  region.ey1 = std::min(coarse.N, ey + layers + 1);
  region.cells = {region.ex0 * coarse.ratio, region.ey0 * coarse.ratio,
                  region.ex1 * coarse.ratio, region.ey1 * coarse.ratio};
  region.dofs = NodeSet::box_zero_trace(fine, region.cells);
  return region;
}

int default_layers(double H, double kappa_max, double coefficient) {
  if (H <= 0.0 || H >= 1.0) throw std::invalid_argument("default_layers: H must lie in (0,1)");
  if (kappa_max < 1.0) throw std::invalid_argument("default_layers: contrast must be >= 1");
  const int m = static_cast<int>(std::floor(coefficient * std::log(kappa_max / H)));
  return std::max(1, m);
}

}  // namespace cemint
