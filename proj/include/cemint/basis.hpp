// Copyright (c) 2026 the cemint developers.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include "cemint/assembly.hpp"
#include "cemint/grid.hpp"
#include "cemint/spectral.hpp"

namespace cemint {

struct BasisColumn {
  int element = 0;
  int eig = 0;
};

// Localized multiscale basis: R0 maps coarse coefficients to interior fine
// dofs. Columns are ordered element-major, eigenindex-minor.
struct MultiscaleBasis {
  SpMat R0;
  std::vector<BasisColumn> columns;
  int layers = 0;
  double spectral_gap = 0.0;
  // Per column, the stiffness-energy fraction outside K_{i,l}, l = 0..layers.
  Mat decay;

  int column_count() const { return static_cast<int>(columns.size()); }
};

// Energy minimizer over the oversampled patch with the s-orthogonality
// constraints of every auxiliary function living inside it. Returns the
// zero-extended interior-dof vector.
Vec solve_local_minimizer(const FineGrid& fine, const CoarseGrid& coarse,
                          const OversampleRegion& region, const AuxiliarySpace& aux,
                          const CoefficientField& kappa, int target_element, int target_eig);

MultiscaleBasis build_basis(const FineGrid& fine, const CoarseGrid& coarse,
                            const CoefficientField& kappa, const AuxiliarySpace& aux,
                            int layers, int threads = 1);

// Binary column cache keyed by grid sizes, layers, basis count and the
// coefficient checksum. load returns false on any mismatch.
void save_basis_cache(const std::string& path, const MultiscaleBasis& basis, int n_fine,
                      int N_coarse, std::uint64_t kappa_checksum);
bool load_basis_cache(const std::string& path, int n_fine, int N_coarse, int layers,
                      int basis_per_element, std::uint64_t kappa_checksum,
                      MultiscaleBasis* out);

}  // namespace cemint
