// Copyright (c) 2026 the cemint developers.
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <cmath>

#include "cemint/basis.hpp"
#include "cemint/problems.hpp"
#include "cemint/reduced.hpp"
#include "oracles.hpp"

using namespace cemint;

namespace {

SpMat sparse_identity(int n) {
  SpMat I(n, n);
  I.setIdentity();
  return I;
}

struct Small {
  FineGrid grid{8};
  CoefficientField kappa = synth_field(5, 20.0, "channels", 8);
  SpMat M = assemble_mass(grid);
  SpMat A = assemble_stiffness(grid, kappa);
};

}  // namespace

TEST_CASE("identity reduction reproduces the fine operators") {
  Small s;
  const ReducedSystem sys = reduce(sparse_identity(s.grid.interior_count()), s.M, s.A);
  CHECK((sys.M0 - Mat(s.M)).cwiseAbs().maxCoeff() <= 1e-15);
  CHECK((sys.A0 - Mat(s.A)).cwiseAbs().maxCoeff() <= 1e-15);
}

TEST_CASE("congruence preserves symmetry") {
  Small s;
  oracles::TestRng rng;
  SpMat R0 = SpMat(s.grid.interior_count(), 7);
  std::vector<Eigen::Triplet<double>> triplets;
  for (int col = 0; col < 7; ++col)
    for (int row = 0; row < s.grid.interior_count(); ++row)
      if (std::abs(rng.next()) > 0.3) triplets.emplace_back(row, col, rng.next());
  R0.setFromTriplets(triplets.begin(), triplets.end());
  const ReducedSystem sys = reduce(R0, s.M, s.A);
  CHECK((sys.M0 - sys.M0.transpose()).cwiseAbs().maxCoeff() == 0.0);
  CHECK((sys.A0 - sys.A0.transpose()).cwiseAbs().maxCoeff() <=
        1e-12 * sys.A0.cwiseAbs().maxCoeff());
}

TEST_CASE("two-column reduction matches hand triple products") {
  Small s;
  oracles::TestRng rng;
  const Vec r1 = rng.vector(s.grid.interior_count());
  const Vec r2 = rng.vector(s.grid.interior_count());
  SpMat R0(s.grid.interior_count(), 2);
  std::vector<Eigen::Triplet<double>> triplets;
  for (int row = 0; row < s.grid.interior_count(); ++row) {
    triplets.emplace_back(row, 0, r1[row]);
    triplets.emplace_back(row, 1, r2[row]);
  }
  R0.setFromTriplets(triplets.begin(), triplets.end());
  const ReducedSystem sys = reduce(R0, s.M, s.A);

  Mat M0_oracle(2, 2), A0_oracle(2, 2);
  M0_oracle << r1.dot(s.M * r1), r1.dot(s.M * r2), r2.dot(s.M * r1), r2.dot(s.M * r2);
  A0_oracle << r1.dot(s.A * r1), r1.dot(s.A * r2), r2.dot(s.A * r1), r2.dot(s.A * r2);
  CHECK((sys.M0 - M0_oracle).cwiseAbs().maxCoeff() <= 1e-12 * M0_oracle.cwiseAbs().maxCoeff());
  CHECK((sys.A0 - A0_oracle).cwiseAbs().maxCoeff() <= 1e-12 * A0_oracle.cwiseAbs().maxCoeff());
}

TEST_CASE("rank-deficient bases are rejected with the smallest eigenvalue") {
  Small s;
  SpMat R0(s.grid.interior_count(), 2);  // second column left empty
  std::vector<Eigen::Triplet<double>> triplets;
  for (int row = 0; row < s.grid.interior_count(); ++row) triplets.emplace_back(row, 0, 1.0);
  R0.setFromTriplets(triplets.begin(), triplets.end());
  CHECK_THROWS_WITH_AS(reduce(R0, s.M, s.A), doctest::Contains("smallest eigenvalue"),
                       std::runtime_error);
}

TEST_CASE("restriction and lifting") {
  const Grids grids = build_grids(16, 4);
  const CoefficientField kappa = synth_field(7, 50.0, "mixed", 16);
  const auto weight = spectral_weight(kappa, grids.pou);
  const AuxiliarySpace aux = build_auxiliary_space(grids.fine, grids.coarse, kappa, weight, 3);
  const MultiscaleBasis basis = build_basis(grids.fine, grids.coarse, kappa, aux, 2);
  const SpMat M = assemble_mass(grids.fine);
  const SpMat A = assemble_stiffness(grids.fine, kappa);
  const ReducedSystem sys = reduce(basis, M, A);
  oracles::TestRng rng;

  SUBCASE("zero maps to zero") {
    CHECK(sys.restrict_load(Vec::Zero(sys.R0.rows())).cwiseAbs().maxCoeff() == 0.0);
    CHECK(sys.lift(Vec::Zero(sys.dim())).cwiseAbs().maxCoeff() == 0.0);
  }

  SUBCASE("lifting a unit coordinate extracts a basis column") {
    Vec e = Vec::Zero(sys.dim());
    e[5] = 1.0;
    CHECK((sys.lift(e) - Vec(basis.R0.col(5))).cwiseAbs().maxCoeff() == 0.0);
  }

  SUBCASE("projection fixes coarse functions") {
    const Vec c = rng.vector(sys.dim());
    const Vec back = sys.project_fine(sys.lift(c));
    CHECK((back - c).cwiseAbs().maxCoeff() <= 1e-9 * c.cwiseAbs().maxCoeff());
  }

  SUBCASE("projection solves the M-norm least squares problem") {
    const Vec v = rng.vector(static_cast<int>(sys.R0.rows()));
    const Vec c = sys.project_fine(v);
    // dense normal equations oracle
    const Mat R = Mat(sys.R0);
    const Mat Md = Mat(M);
    const Vec oracle = (R.transpose() * Md * R).ldlt().solve(R.transpose() * (Md * v));
    CHECK((c - oracle).cwiseAbs().maxCoeff() <= 1e-10 * oracle.cwiseAbs().maxCoeff());
  }

  SUBCASE("lift-project is idempotent on fine vectors") {
    const Vec v = rng.vector(static_cast<int>(sys.R0.rows()));
    const Vec once = sys.lift(sys.project_fine(v));
    const Vec twice = sys.lift(sys.project_fine(once));
    CHECK((twice - once).cwiseAbs().maxCoeff() <= 1e-10 * once.cwiseAbs().maxCoeff());
  }

  SUBCASE("generator eigenvalues match the pencil eigenvalues") {
    const Eigen::SelfAdjointEigenSolver<Mat> eig_G(sys.G);
    const Eigen::GeneralizedSelfAdjointEigenSolver<Mat> eig_pencil(sys.A0, sys.M0);
    const double scale = std::max(1.0, eig_pencil.eigenvalues().cwiseAbs().maxCoeff());
    CHECK((eig_G.eigenvalues() - eig_pencil.eigenvalues()).cwiseAbs().maxCoeff() <=
          1e-10 * scale);
    CHECK(eig_G.eigenvalues().minCoeff() >= -1e-10 * scale);
  }

  SUBCASE("coarse energy equals lifted fine energy") {
    const Vec c = rng.vector(sys.dim());
    const Vec lifted = sys.lift(c);
    CHECK(c.dot(sys.A0 * c) ==
          doctest::Approx(lifted.dot(A * lifted)).epsilon(1e-12));
  }
}
