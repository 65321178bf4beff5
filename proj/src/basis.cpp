// Copyright (c) 2026 the cemint developers.
// SPDX-License-Identifier: Apache-2.0

#include "cemint/basis.hpp"

#include <Eigen/SparseLU>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <thread>
#include <tuple>

namespace cemint {

namespace {

struct Constraint {
  int element = 0;
  int eig = 0;
};

// One factorized saddle system per distinct (clipped) patch box; saturated
// patches share it across base elements.
struct PatchContext {
  CellBox box;
  NodeSet dofs;
  std::vector<Constraint> constraints;
  std::vector<int> constraint_index;  // aux column -> row in B, -1 if absent
  Eigen::SparseLU<SpMat> solver;
  bool ok = false;
};

void build_patch(const FineGrid& fine, const CoarseGrid& coarse, const CoefficientField& kappa,
                 const AuxiliarySpace& aux, const OversampleRegion& region, PatchContext& ctx) {
  ctx.box = region.cells;
  ctx.dofs = region.dofs;
  const int ndof = ctx.dofs.size();

  ctx.constraint_index.assign(aux.total_columns(), -1);
  for (int ey = region.ey0; ey < region.ey1; ++ey)
    for (int ex = region.ex0; ex < region.ex1; ++ex) {
      const int e = coarse.element_id(ex, ey);
      for (int j = 0; j < aux.basis_per_element; ++j) {
        ctx.constraint_index[aux.column_index(e, j)] = static_cast<int>(ctx.constraints.size());
        ctx.constraints.push_back({e, j});
      }
    }
  const int ncon = static_cast<int>(ctx.constraints.size());

  const SpMat A = assemble_stiffness(fine, kappa, ctx.box, ctx.dofs);
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(A.nonZeros() + 2 * static_cast<std::size_t>(ncon) * 64);
  for (int k = 0; k < A.outerSize(); ++k)
    for (SpMat::InnerIterator it(A, k); it; ++it)
      triplets.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());

  for (int c = 0; c < ncon; ++c) {
    const ElementBasis& basis = aux.elements[ctx.constraints[c].element];
    const auto weights = basis.svectors.col(ctx.constraints[c].eig);
    for (int k = 0; k < basis.nodes.size(); ++k) {
      const int dof = ctx.dofs.local(basis.nodes.nodes[k]);
      if (dof < 0) continue;  // node on the patch boundary, psi vanishes there
      triplets.emplace_back(ndof + c, dof, weights[k]);
      triplets.emplace_back(dof, ndof + c, weights[k]);
    }
  }

  SpMat kkt(ndof + ncon, ndof + ncon);
  kkt.setFromTriplets(triplets.begin(), triplets.end());
  kkt.makeCompressed();
  ctx.solver.compute(kkt);
  ctx.ok = ctx.solver.info() == Eigen::Success;
}

int constraint_rank(const AuxiliarySpace& aux, const PatchContext& ctx) {
  const int ncon = static_cast<int>(ctx.constraints.size());
  Mat B = Mat::Zero(ncon, ctx.dofs.size());
  for (int c = 0; c < ncon; ++c) {
    const ElementBasis& basis = aux.elements[ctx.constraints[c].element];
    const auto weights = basis.svectors.col(ctx.constraints[c].eig);
    for (int k = 0; k < basis.nodes.size(); ++k) {
      const int dof = ctx.dofs.local(basis.nodes.nodes[k]);
      if (dof >= 0) B(c, dof) = weights[k];
    }
  }
  return static_cast<int>(Eigen::ColPivHouseholderQR<Mat>(B * B.transpose()).rank());
}

Vec solve_column(const PatchContext& ctx, int target_element, int target_eig,
                 const AuxiliarySpace& aux) {
  const int ndof = ctx.dofs.size();
  const int ncon = static_cast<int>(ctx.constraints.size());
  Vec rhs = Vec::Zero(ndof + ncon);
  const int row = ctx.constraint_index[aux.column_index(target_element, target_eig)];
  rhs[ndof + row] = 1.0;
  Vec solution = ctx.solver.solve(rhs);
  return solution.head(ndof);
}

// Number of coarse layers K_i must grow before fine-cell index c falls
// inside; [lo, hi) is the element's fine-cell range along this axis.
int layer_distance(int c, int lo, int hi, int r) {
  if (c < lo) return (lo - c + r - 1) / r;
  if (c >= hi) return (c - hi) / r + 1;
  return 0;
}

// Stiffness-energy fractions of a patch-supported column outside the grown
// element boxes K_{i,l}, l = 0..layers.
Vec decay_profile(const FineGrid& fine, const CoarseGrid& coarse, const CoefficientField& kappa,
                  const PatchContext& ctx, const Vec& patch_values, int element, int layers) {
  const int ex = coarse.element_x(element);
  const int ey = coarse.element_y(element);
  const int r = coarse.ratio;
  const Eigen::Matrix4d& K = unit_stiffness();

  Vec outside = Vec::Zero(layers + 1);
  double total = 0.0;
  for (int cy = ctx.box.cy0; cy < ctx.box.cy1; ++cy)
    for (int cx = ctx.box.cx0; cx < ctx.box.cx1; ++cx) {
      Eigen::Vector4d local = Eigen::Vector4d::Zero();
      const auto nodes = fine.cell_nodes(cx, cy);
      for (int a = 0; a < 4; ++a) {
        const int dof = ctx.dofs.local(nodes[a]);
        if (dof >= 0) local[a] = patch_values[dof];
      }
      const double energy = kappa.at(cx, cy) * local.dot(K * local);
      total += energy;
      const int distance = std::max(layer_distance(cx, ex * r, (ex + 1) * r, r),
                                    layer_distance(cy, ey * r, (ey + 1) * r, r));
      for (int l = 0; l <= layers && l < distance; ++l) outside[l] += energy;
    }
  return total > 0.0 ? Vec(outside / total) : outside;
}

using BoxKey = std::tuple<int, int, int, int>;

}  // namespace

Vec solve_local_minimizer(const FineGrid& fine, const CoarseGrid& coarse,
                          const OversampleRegion& region, const AuxiliarySpace& aux,
                          const CoefficientField& kappa, int target_element, int target_eig) {
  PatchContext ctx;
  build_patch(fine, coarse, kappa, aux, region, ctx);
  if (!ctx.ok)
    throw std::runtime_error(
        "singular saddle system: element " + std::to_string(target_element) + ", layers " +
        std::to_string(region.layers) + ", constraint rank " +
        std::to_string(constraint_rank(aux, ctx)) + " of " +
        std::to_string(ctx.constraints.size()));
  const Vec patch_values = solve_column(ctx, target_element, target_eig, aux);
  Vec extended = Vec::Zero(fine.interior_count());
  for (int k = 0; k < ctx.dofs.size(); ++k)
    extended[fine.interior_dof_of_node(ctx.dofs.nodes[k])] = patch_values[k];
  return extended;
}

MultiscaleBasis build_basis(const FineGrid& fine, const CoarseGrid& coarse,
                            const CoefficientField& kappa, const AuxiliarySpace& aux,
                            int layers, int threads) {
  const int L = aux.basis_per_element;
  const int n_elements = coarse.element_count();

  MultiscaleBasis basis;
  basis.layers = layers;
  basis.spectral_gap = aux.spectral_gap;
  basis.columns.resize(static_cast<std::size_t>(n_elements) * L);
  basis.decay = Mat::Zero(n_elements * L, layers + 1);
  for (int e = 0; e < n_elements; ++e)
    for (int j = 0; j < L; ++j) basis.columns[aux.column_index(e, j)] = {e, j};

  // Group base elements by their clipped patch box so saturated patches are
  // factorized once.
  std::map<BoxKey, std::vector<int>> groups;
  std::vector<OversampleRegion> regions(n_elements);
  for (int e = 0; e < n_elements; ++e) {
    regions[e] = oversample(fine, coarse, e, layers);
    groups[{regions[e].ex0, regions[e].ey0, regions[e].ex1, regions[e].ey1}].push_back(e);
  }
  std::vector<const std::vector<int>*> work;
  work.reserve(groups.size());
  for (const auto& [key, elements] : groups) work.push_back(&elements);

  struct ColumnData {
    std::vector<std::pair<int, double>> entries;  // (interior dof, value)
  };
  std::vector<ColumnData> columns(basis.columns.size());
  std::atomic<std::size_t> cursor{0};
  std::atomic<bool> failed{false};
  std::string failure;
  std::mutex failure_mutex;

  auto worker = [&]() {
    for (;;) {
      const std::size_t w = cursor.fetch_add(1);
      if (w >= work.size() || failed.load()) return;
      const std::vector<int>& elements = *work[w];
      try {
        PatchContext ctx;
        build_patch(fine, coarse, kappa, aux, regions[elements.front()], ctx);
        if (!ctx.ok)
          throw std::runtime_error(
              "singular saddle system: element " + std::to_string(elements.front()) +
              ", layers " + std::to_string(layers) + ", constraint rank " +
              std::to_string(constraint_rank(aux, ctx)) + " of " +
              std::to_string(ctx.constraints.size()));
        for (int e : elements)
          for (int j = 0; j < L; ++j) {
            const Vec patch_values = solve_column(ctx, e, j, aux);
            const int col = aux.column_index(e, j);
            ColumnData& data = columns[col];
            data.entries.reserve(ctx.dofs.size());
            for (int k = 0; k < ctx.dofs.size(); ++k)
              if (patch_values[k] != 0.0)
                data.entries.emplace_back(fine.interior_dof_of_node(ctx.dofs.nodes[k]),
                                          patch_values[k]);
            basis.decay.row(col) =
                decay_profile(fine, coarse, kappa, ctx, patch_values, e, layers).transpose();
          }
      } catch (const std::exception& err) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        failed.store(true);
        if (failure.empty()) failure = err.what();
        return;
      }
    }
  };

  const int n_workers = std::max(1, std::min<int>(threads, static_cast<int>(work.size())));
  if (n_workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(n_workers);
    for (int t = 0; t < n_workers; ++t) pool.emplace_back(worker);
    for (auto& thread : pool) thread.join();
  }
  if (failed.load()) throw std::runtime_error(failure);

  std::vector<Eigen::Triplet<double>> triplets;
  std::size_t nnz = 0;
  for (const auto& data : columns) nnz += data.entries.size();
  triplets.reserve(nnz);
  for (std::size_t col = 0; col < columns.size(); ++col)
    for (const auto& [row, value] : columns[col].entries)
      triplets.emplace_back(row, static_cast<int>(col), value);
  basis.R0.resize(fine.interior_count(), static_cast<int>(basis.columns.size()));
  basis.R0.setFromTriplets(triplets.begin(), triplets.end());
  basis.R0.makeCompressed();
  return basis;
}

namespace {

constexpr char kCacheMagic[8] = {'C', 'E', 'M', 'B', 'C', '0', '1', '\n'};

template <typename T>
void put(std::ostream& out, const T& value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof value);
}

template <typename T>
bool get(std::istream& in, T& value) {
  in.read(reinterpret_cast<char*>(&value), sizeof value);
  return static_cast<bool>(in);
}

}  // namespace

void save_basis_cache(const std::string& path, const MultiscaleBasis& basis, int n_fine,
                      int N_coarse, std::uint64_t kappa_checksum) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write basis cache: " + path);
  out.write(kCacheMagic, sizeof kCacheMagic);
  const int L = basis.column_count() / std::max(1, N_coarse * N_coarse);
  put(out, static_cast<std::int32_t>(n_fine));
  put(out, static_cast<std::int32_t>(N_coarse));
  put(out, static_cast<std::int32_t>(basis.layers));
  put(out, static_cast<std::int32_t>(L));
  put(out, kappa_checksum);
  put(out, static_cast<std::int32_t>(basis.column_count()));
  put(out, basis.spectral_gap);
  for (int col = 0; col < basis.column_count(); ++col)
    for (int l = 0; l <= basis.layers; ++l) put(out, basis.decay(col, l));
  for (int col = 0; col < basis.column_count(); ++col) {
    std::int32_t nnz = 0;
    for (SpMat::InnerIterator it(basis.R0, col); it; ++it) ++nnz;
    put(out, nnz);
    for (SpMat::InnerIterator it(basis.R0, col); it; ++it) {
      put(out, static_cast<std::int32_t>(it.row()));
      put(out, it.value());
    }
  }
  if (!out) throw std::runtime_error("write failure on basis cache: " + path);
}

bool load_basis_cache(const std::string& path, int n_fine, int N_coarse, int layers,
                      int basis_per_element, std::uint64_t kappa_checksum,
                      MultiscaleBasis* out) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return false;
  char magic[8];
  in.read(magic, sizeof magic);
  if (!in || std::memcmp(magic, kCacheMagic, sizeof magic) != 0) return false;
  std::int32_t file_n, file_N, file_layers, file_L, ncols;
  std::uint64_t file_sum;
  double gap;
  if (!get(in, file_n) || !get(in, file_N) || !get(in, file_layers) || !get(in, file_L) ||
      !get(in, file_sum) || !get(in, ncols) || !get(in, gap))
    return false;
  if (file_n != n_fine || file_N != N_coarse || file_layers != layers ||
      file_L != basis_per_element || file_sum != kappa_checksum)
    return false;

  MultiscaleBasis basis;
  basis.layers = layers;
  basis.spectral_gap = gap;
  basis.columns.resize(ncols);
  for (int col = 0; col < ncols; ++col)
    basis.columns[col] = {col / basis_per_element, col % basis_per_element};
  basis.decay = Mat::Zero(ncols, layers + 1);
  for (int col = 0; col < ncols; ++col)
    for (int l = 0; l <= layers; ++l)
      if (!get(in, basis.decay(col, l))) return false;

  const int n_interior = (n_fine - 1) * (n_fine - 1);
  std::vector<Eigen::Triplet<double>> triplets;
  for (int col = 0; col < ncols; ++col) {
    std::int32_t nnz;
    if (!get(in, nnz)) return false;
    for (std::int32_t k = 0; k < nnz; ++k) {
      std::int32_t row;
      double value;
      if (!get(in, row) || !get(in, value)) return false;
      triplets.emplace_back(row, col, value);
    }
  }
  basis.R0.resize(n_interior, ncols);
  basis.R0.setFromTriplets(triplets.begin(), triplets.end());
  basis.R0.makeCompressed();
  *out = std::move(basis);
  return true;
}

}  // namespace cemint
