// Copyright (c) 2026 the cemint developers.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include "cemint/assembly.hpp"
#include "cemint/grid.hpp"

namespace cemint {

struct SpectralOptions {
  // Patch dof count above which the shift-invert subspace iteration
  // replaces the dense generalized eigensolver.
  int dense_limit = 600;
  double mass_shift = 1e-14;  // relative diagonal shift of S_i
  double iteration_tol = 1e-11;
  int max_iterations = 500;
};

// Generalized eigenpairs of (A, S) with the smallest eigenvalues first;
// eigenvectors are S-orthonormal.
struct EigenPairs {
  Vec values;
  Mat vectors;
};

EigenPairs smallest_eigenpairs(const SpMat& A, const SpMat& S, int count,
                               const SpectralOptions& options = {});

// Per-element slice of the auxiliary space.
struct ElementBasis {
  int element = 0;
  NodeSet nodes;      // element nodes minus the domain boundary
  SpMat S;            // weighted mass on the element, for s-inner products
  Mat vectors;        // dofs x L, s-orthonormal
  Mat svectors;       // S * vectors (projection and constraint weights)
  Vec eigenvalues;    // L+1 ascending values; [L] is the first discarded
};

struct AuxiliarySpace {
  int basis_per_element = 0;
  double spectral_gap = 0.0;  // min over elements of eigenvalues[L]
  std::vector<ElementBasis> elements;

  int total_columns() const {
    return static_cast<int>(elements.size()) * basis_per_element;
  }
  int column_index(int element, int eig) const {
    return element * basis_per_element + eig;
  }
};

AuxiliarySpace build_auxiliary_space(const FineGrid& fine, const CoarseGrid& coarse,
                                     const CoefficientField& kappa,
                                     const std::vector<double>& weight, int basis_per_element,
                                     const SpectralOptions& options = {});

// Fields in the broken (per-element) representation; blocks follow the
// element NodeSets. Values on shared element boundaries may differ between
// neighbouring blocks.
struct BrokenField {
  std::vector<Vec> blocks;
};

// s-orthogonal projection onto the auxiliary space.
BrokenField aux_project(const AuxiliarySpace& aux, const FineGrid& fine, const Vec& interior);
BrokenField aux_project(const AuxiliarySpace& aux, const BrokenField& field);

double s_inner(const AuxiliarySpace& aux, const BrokenField& a, const BrokenField& b);

// Restriction of an interior-dof vector to the broken representation.
BrokenField break_fine(const AuxiliarySpace& aux, const FineGrid& fine, const Vec& interior);

}  // namespace cemint
