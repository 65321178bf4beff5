// Copyright (c) 2026 the cemint developers.
// SPDX-License-Identifier: Apache-2.0

#include "cemint/spectral.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/SparseCholesky>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace cemint {

namespace {

// Deterministic generator for the subspace start block.
struct SplitMix64 {
  std::uint64_t state;
  std::uint64_t next() {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }
  double uniform() { return (next() >> 11) * 0x1.0p-53; }
};

void fix_signs(Mat& vectors) {
  for (Eigen::Index j = 0; j < vectors.cols(); ++j) {
    Eigen::Index at = 0;
    vectors.col(j).cwiseAbs().maxCoeff(&at);
    if (vectors(at, j) < 0.0) vectors.col(j) = -vectors.col(j);
  }
}

// One Gram-Cholesky pass restores S-orthonormality lost to the conditioning
// of a high-contrast weight.
void tighten_orthonormality(Mat& vectors, const SpMat& S) {
  const Mat gram = vectors.transpose() * (S * vectors);
  Eigen::LLT<Mat> llt(gram);
  if (llt.info() == Eigen::Success)
    vectors = llt.matrixU().solve<Eigen::OnTheRight>(vectors);
}

EigenPairs dense_eigenpairs(const SpMat& A, const SpMat& S, int count, double mass_shift) {
  Mat Ad = Mat(A);
  Mat Sd = Mat(S);
  Sd.diagonal().array() += mass_shift * Sd.trace();
  Eigen::GeneralizedSelfAdjointEigenSolver<Mat> solver(Ad, Sd, Eigen::Ax_lBx | Eigen::ComputeEigenvectors);
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("dense generalized eigensolver failed on a patch of dimension " +
                             std::to_string(A.rows()));
  EigenPairs pairs;
  pairs.values = solver.eigenvalues().head(count);
  pairs.vectors = solver.eigenvectors().leftCols(count);
  tighten_orthonormality(pairs.vectors, S);
  fix_signs(pairs.vectors);
  return pairs;
}

// Shift-invert block subspace iteration with Rayleigh-Ritz extraction.
// Used for patches too large for the dense path; the spectral gap after the
// wanted eigenvalues makes it converge in a handful of sweeps.
EigenPairs iterative_eigenpairs(const SpMat& A, const SpMat& S, int count,
                                const SpectralOptions& options) {
  const int dim = static_cast<int>(A.rows());
  const int block = std::min(dim, count + std::max(6, count));

  const double trace_ratio = Mat(A).trace() / std::max(Mat(S).trace(), 1e-300);
  const double sigma = std::max(1e-10, 1e-8 * trace_ratio);
  SpMat shifted = A + sigma * S;
  Eigen::SimplicialLDLT<SpMat> factor(shifted);
  if (factor.info() != Eigen::Success)
    throw std::runtime_error("shift-invert factorization failed on a patch of dimension " +
                             std::to_string(dim));

  SplitMix64 rng{0x5eed0000ull + static_cast<std::uint64_t>(dim) * 31 + count};
  Mat Y(dim, block);
  for (int j = 0; j < block; ++j)
    for (int i = 0; i < dim; ++i) Y(i, j) = rng.uniform() - 0.5;

  const double anorm = Mat(A).cwiseAbs().rowwise().sum().maxCoeff();
  Mat vectors;
  Vec values;
  for (int sweep = 0; sweep < options.max_iterations; ++sweep) {
    Y = factor.solve(S * Y);
    // Rayleigh-Ritz on the current block.
    Mat Ar = Y.transpose() * (A * Y).eval();
    Mat Sr = Y.transpose() * (S * Y).eval();
    Ar = 0.5 * (Ar + Ar.transpose()).eval();
    Sr = 0.5 * (Sr + Sr.transpose()).eval();
    Eigen::GeneralizedSelfAdjointEigenSolver<Mat> small(Ar, Sr,
                                                        Eigen::Ax_lBx | Eigen::ComputeEigenvectors);
    if (small.info() != Eigen::Success) {
      // Restart with a fresh block if the iterate degenerated.
      for (int j = 0; j < block; ++j)
        for (int i = 0; i < dim; ++i) Y(i, j) = rng.uniform() - 0.5;
      continue;
    }
    Y = (Y * small.eigenvectors()).eval();
    values = small.eigenvalues();

    double worst = 0.0;
    for (int j = 0; j < count; ++j) {
      const Vec residual = A * Y.col(j) - values[j] * (S * Y.col(j));
      worst = std::max(worst, residual.norm() / anorm);
    }
    if (worst <= options.iteration_tol) {
      vectors = Y.leftCols(count);
      values = values.head(count).eval();
      break;
    }
  }
  if (vectors.size() == 0)
    throw std::runtime_error("subspace iteration did not converge on a patch of dimension " +
                             std::to_string(dim));

  tighten_orthonormality(vectors, S);
  fix_signs(vectors);
  return {values, vectors};
}

}  // namespace

EigenPairs smallest_eigenpairs(const SpMat& A, const SpMat& S, int count,
                               const SpectralOptions& options) {
  if (count > A.rows())
    throw std::invalid_argument("requested " + std::to_string(count) +
                                " eigenpairs from a patch with " + std::to_string(A.rows()) +
                                " dofs");
  if (A.rows() <= options.dense_limit) return dense_eigenpairs(A, S, count, options.mass_shift);
  return iterative_eigenpairs(A, S, count, options);
}

AuxiliarySpace build_auxiliary_space(const FineGrid& fine, const CoarseGrid& coarse,
                                     const CoefficientField& kappa,
                                     const std::vector<double>& weight, int basis_per_element,
                                     const SpectralOptions& options) {
  if (basis_per_element < 1)
    throw std::invalid_argument("basis_per_element must be >= 1");
  AuxiliarySpace aux;
  aux.basis_per_element = basis_per_element;
  aux.spectral_gap = std::numeric_limits<double>::infinity();
  aux.elements.resize(coarse.element_count());

  for (int e = 0; e < coarse.element_count(); ++e) {
    ElementBasis& basis = aux.elements[e];
    basis.element = e;
    const CellBox cells = coarse.element_cells(e);
    basis.nodes = NodeSet::box_natural(fine, cells);
    if (basis_per_element + 1 > basis.nodes.size())
      throw std::invalid_argument("element " + std::to_string(e) + " has only " +
                                  std::to_string(basis.nodes.size()) + " dofs; cannot extract " +
                                  std::to_string(basis_per_element + 1) + " eigenpairs");
    const SpMat A = assemble_stiffness(fine, kappa, cells, basis.nodes);
    basis.S = assemble_weighted_mass(fine, weight, cells, basis.nodes);

    EigenPairs pairs = smallest_eigenpairs(A, basis.S, basis_per_element + 1, options);
    basis.eigenvalues = pairs.values;
    basis.vectors = pairs.vectors.leftCols(basis_per_element);
    basis.svectors = basis.S * basis.vectors;
    aux.spectral_gap = std::min(aux.spectral_gap, basis.eigenvalues[basis_per_element]);
  }
  return aux;
}

BrokenField break_fine(const AuxiliarySpace& aux, const FineGrid& fine, const Vec& interior) {
  BrokenField field;
  field.blocks.resize(aux.elements.size());
  for (std::size_t e = 0; e < aux.elements.size(); ++e) {
    const NodeSet& nodes = aux.elements[e].nodes;
    Vec block(nodes.size());
    for (int k = 0; k < nodes.size(); ++k)
      block[k] = interior[fine.interior_dof_of_node(nodes.nodes[k])];
    field.blocks[e] = std::move(block);
  }
  return field;
}

namespace {

BrokenField project_blocks(const AuxiliarySpace& aux, const BrokenField& field) {
  BrokenField out;
  out.blocks.resize(aux.elements.size());
  for (std::size_t e = 0; e < aux.elements.size(); ++e) {
    const ElementBasis& basis = aux.elements[e];
    const Vec coeff = basis.svectors.transpose() * field.blocks[e];
    out.blocks[e] = basis.vectors * coeff;
  }
  return out;
}

}  // namespace

BrokenField aux_project(const AuxiliarySpace& aux, const FineGrid& fine, const Vec& interior) {
  return project_blocks(aux, break_fine(aux, fine, interior));
}

BrokenField aux_project(const AuxiliarySpace& aux, const BrokenField& field) {
  return project_blocks(aux, field);
}

double s_inner(const AuxiliarySpace& aux, const BrokenField& a, const BrokenField& b) {
  double total = 0.0;
  for (std::size_t e = 0; e < aux.elements.size(); ++e)
    total += a.blocks[e].dot(aux.elements[e].S * b.blocks[e]);
  return total;
}

}  // namespace cemint
