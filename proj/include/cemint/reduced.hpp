// Copyright (c) 2026 the cemint developers.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Cholesky>

#include "cemint/assembly.hpp"
#include "cemint/basis.hpp"

namespace cemint {

// Coarse operators plus the symmetrized generator used for exponential
// stepping. G = C^{-1} A0 C^{-T} with M0 = C C^T is similar to M0^{-1} A0,
// so it carries the same (real, nonnegative) spectrum.
//
// The factorization is carried out on the Jacobi-equilibrated operators
// D M0 D, D A0 D with D = diag(M0)^{-1/2}; D^{-1} chol(D M0 D) is exactly
// the Cholesky factor of M0, so every quantity below is the unequilibrated
// one, just evaluated with a well-conditioned factor. Coarse coefficient
// vectors always refer to the columns of R0 as stored.
struct ReducedSystem {
  Mat M0;
  Mat A0;
  Mat G;
  Vec scale;                   // D
  Eigen::LLT<Mat> M0s_llt;     // factor of D M0 D
  SpMat R0;
  SpMat M;
  SpMat A;

  int dim() const { return static_cast<int>(M0.rows()); }

  Vec lift(const Vec& coarse) const { return R0 * coarse; }
  Vec restrict_load(const Vec& fine_load) const { return R0.transpose() * fine_load; }

  // M0^{-1} rhs through the equilibrated factor.
  Vec solve_mass(const Vec& rhs) const {
    return scale.asDiagonal() * M0s_llt.solve(scale.asDiagonal() * rhs);
  }
  // Coefficients of the M-orthogonal projection onto the coarse space.
  Vec project_fine(const Vec& fine) const { return solve_mass(R0.transpose() * (M * fine)); }
  Vec apply_generator(const Vec& coarse) const { return solve_mass(A0 * coarse); }

  // Change of variables y = C^T c under which the generator becomes G.
  Vec to_spectral(const Vec& coarse) const {
    return M0s_llt.matrixU() * (coarse.cwiseQuotient(scale));
  }
  Vec from_spectral(const Vec& y) const {
    return scale.asDiagonal() * M0s_llt.matrixU().solve(y);
  }
};

ReducedSystem reduce(const SpMat& R0, const SpMat& M, const SpMat& A);
ReducedSystem reduce(const MultiscaleBasis& basis, const SpMat& M, const SpMat& A);

}  // namespace cemint
