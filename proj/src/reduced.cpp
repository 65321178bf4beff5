// Copyright (c) 2026 the cemint developers.
// SPDX-License-Identifier: Apache-2.0

#include "cemint/reduced.hpp"

#include <Eigen/Eigenvalues>
#include <stdexcept>
#include <string>

namespace cemint {

ReducedSystem reduce(const SpMat& R0, const SpMat& M, const SpMat& A) {
  if (M.rows() != R0.rows() || A.rows() != R0.rows())
    throw std::invalid_argument("reduce: fine operators of dimension " + std::to_string(M.rows()) +
                                "/" + std::to_string(A.rows()) + " do not match basis rows " +
                                std::to_string(R0.rows()));
  ReducedSystem sys;
  sys.R0 = R0;
  sys.M = M;
  sys.A = A;
  sys.M0 = Mat(SpMat(R0.transpose() * (M * R0).eval()));
  sys.A0 = Mat(SpMat(R0.transpose() * (A * R0).eval()));
  sys.M0 = 0.5 * (sys.M0 + sys.M0.transpose()).eval();
  sys.A0 = 0.5 * (sys.A0 + sys.A0.transpose()).eval();

  if (sys.M0.diagonal().minCoeff() <= 0.0)
    throw std::runtime_error("coarse mass matrix is not positive definite (basis rank loss); "
                             "smallest eigenvalue " +
                             std::to_string(Eigen::SelfAdjointEigenSolver<Mat>(
                                                sys.M0, Eigen::EigenvaluesOnly)
                                                .eigenvalues()
                                                .minCoeff()));
  sys.scale = sys.M0.diagonal().cwiseSqrt().cwiseInverse();
  const Mat M0s = sys.scale.asDiagonal() * sys.M0 * sys.scale.asDiagonal();
  const Mat A0s = sys.scale.asDiagonal() * sys.A0 * sys.scale.asDiagonal();

  sys.M0s_llt.compute(M0s);
  if (sys.M0s_llt.info() != Eigen::Success) {
    const double smallest = Eigen::SelfAdjointEigenSolver<Mat>(sys.M0, Eigen::EigenvaluesOnly)
                                .eigenvalues()
                                .minCoeff();
    throw std::runtime_error("coarse mass matrix is not positive definite (basis rank loss); "
                             "smallest eigenvalue " +
                             std::to_string(smallest));
  }

  // G = C^{-1} A0 C^{-T} evaluated through the equilibrated factor.
  const Mat C = sys.M0s_llt.matrixL();
  Mat X = C.triangularView<Eigen::Lower>().solve(A0s);
  sys.G = C.triangularView<Eigen::Lower>().solve(X.transpose());
  sys.G = 0.5 * (sys.G + sys.G.transpose()).eval();
  return sys;
}

ReducedSystem reduce(const MultiscaleBasis& basis, const SpMat& M, const SpMat& A) {
  return reduce(basis.R0, M, A);
}

}  // namespace cemint
