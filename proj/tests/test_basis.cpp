// Copyright (c) 2026 the cemint developers.
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "cemint/basis.hpp"
#include "cemint/problems.hpp"
#include "cemint/reduced.hpp"
#include "oracles.hpp"

using namespace cemint;

namespace {

struct Setup {
  Grids grids;
  CoefficientField kappa;
  std::vector<double> weight;
  AuxiliarySpace aux;

  Setup(int n, int N, int L, double contrast = 1.0, std::uint64_t seed = 11)
      : grids(build_grids(n, N)),
        kappa(contrast > 1.0 ? synth_field(seed, contrast, "channels", n)
                             : uniform_field(n, 1.0)),
        weight(spectral_weight(kappa, grids.pou)),
        aux(build_auxiliary_space(grids.fine, grids.coarse, kappa, weight, L)) {}
};

// Constraint values s(psi, phi_j^(i)) over all auxiliary columns.
Vec constraint_values(const Setup& setup, const Vec& psi) {
  const BrokenField broken = break_fine(setup.aux, setup.grids.fine, psi);
  Vec values(setup.aux.total_columns());
  for (std::size_t e = 0; e < setup.aux.elements.size(); ++e) {
    const ElementBasis& element = setup.aux.elements[e];
    values.segment(setup.aux.column_index(static_cast<int>(e), 0), setup.aux.basis_per_element) =
        element.svectors.transpose() * broken.blocks[e];
  }
  return values;
}

}  // namespace

TEST_CASE("saturated patch equals the global minimizer") {
  Setup setup(16, 4, 2, 10.0);
  const int element = setup.grids.coarse.element_id(1, 2);

  // m large enough that the patch is the whole domain
  const OversampleRegion region = oversample(setup.grids.fine, setup.grids.coarse, element, 5);
  REQUIRE(region.covers_domain(setup.grids.coarse));
  const Vec psi = solve_local_minimizer(setup.grids.fine, setup.grids.coarse, region, setup.aux,
                                        setup.kappa, element, 1);

  // Oracle: dense KKT on the whole domain with explicitly gathered blocks.
  const SpMat A = assemble_stiffness(setup.grids.fine, setup.kappa);
  const int ndof = setup.grids.fine.interior_count();
  const int ncon = setup.aux.total_columns();
  Mat B = Mat::Zero(ncon, ndof);
  for (std::size_t e = 0; e < setup.aux.elements.size(); ++e) {
    const ElementBasis& eb = setup.aux.elements[e];
    for (int j = 0; j < setup.aux.basis_per_element; ++j)
      for (int k = 0; k < eb.nodes.size(); ++k)
        B(setup.aux.column_index(static_cast<int>(e), j),
          setup.grids.fine.interior_dof_of_node(eb.nodes.nodes[k])) += eb.svectors(k, j);
  }
  Vec rhs = Vec::Zero(ncon);
  rhs[setup.aux.column_index(element, 1)] = 1.0;
  const Vec oracle = oracles::dense_kkt_solve(Mat(A), B, rhs);

  const double energy_psi = psi.dot(A * psi);
  const double energy_oracle = oracle.dot(A * oracle);
  CHECK(std::abs(energy_psi - energy_oracle) <= 1e-10 * energy_oracle);
  CHECK((psi - oracle).cwiseAbs().maxCoeff() <= 1e-8 * oracle.cwiseAbs().maxCoeff());
}

TEST_CASE("minimizer satisfies its constraints") {
  Setup setup(16, 4, 3, 100.0);
  const int element = setup.grids.coarse.element_id(2, 1);
  const OversampleRegion region = oversample(setup.grids.fine, setup.grids.coarse, element, 2);
  const Vec psi = solve_local_minimizer(setup.grids.fine, setup.grids.coarse, region, setup.aux,
                                        setup.kappa, element, 0);
  const Vec values = constraint_values(setup, psi);
  for (int c = 0; c < values.size(); ++c) {
    const double expected = c == setup.aux.column_index(element, 0) ? 1.0 : 0.0;
    CHECK(std::abs(values[c] - expected) <= 1e-8);
  }
}

TEST_CASE("kappa=1 single-constraint minimizer matches a dense KKT solve") {
  // L = 1: the auxiliary space of each element is spanned by the (nearly)
  // constant first eigenfunction.
  Setup setup(8, 2, 1);
  const int element = 3;
  const OversampleRegion region = oversample(setup.grids.fine, setup.grids.coarse, element, 1);
  REQUIRE(region.covers_domain(setup.grids.coarse));
  const Vec psi = solve_local_minimizer(setup.grids.fine, setup.grids.coarse, region, setup.aux,
                                        setup.kappa, element, 0);

  const SpMat A = assemble_stiffness(setup.grids.fine, setup.kappa);
  const int ndof = setup.grids.fine.interior_count();
  Mat B = Mat::Zero(setup.aux.total_columns(), ndof);
  for (std::size_t e = 0; e < setup.aux.elements.size(); ++e) {
    const ElementBasis& eb = setup.aux.elements[e];
    for (int k = 0; k < eb.nodes.size(); ++k)
      B(static_cast<int>(e), setup.grids.fine.interior_dof_of_node(eb.nodes.nodes[k])) +=
          eb.svectors(k, 0);
  }
  Vec rhs = Vec::Zero(setup.aux.total_columns());
  rhs[element] = 1.0;
  const Vec oracle = oracles::dense_kkt_solve(Mat(A), B, rhs);
  CHECK((psi - oracle).cwiseAbs().maxCoeff() <= 1e-9 * oracle.cwiseAbs().maxCoeff());

  // unit s-weighted average over its own element
  const Vec values = constraint_values(setup, psi);
  CHECK(values[element] == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("basis columns, support and decay") {
  Setup setup(32, 8, 4, 100.0);
  const MultiscaleBasis basis =
      build_basis(setup.grids.fine, setup.grids.coarse, setup.kappa, setup.aux, 2);

  SUBCASE("column count is elements times basis size") {
    CHECK(basis.column_count() == 64 * 4);
    CHECK(basis.R0.cols() == 256);
    CHECK(basis.R0.rows() == setup.grids.fine.interior_count());
  }

  SUBCASE("columns vanish outside their oversampled patch") {
    for (int col : {0, 37, 255}) {
      const OversampleRegion region =
          oversample(setup.grids.fine, setup.grids.coarse, basis.columns[col].element, 2);
      for (SpMat::InnerIterator it(basis.R0, col); it; ++it) {
        // recover node coordinates of this interior dof
        const int iy = static_cast<int>(it.row()) / (setup.grids.fine.n - 1) + 1;
        const int ix = static_cast<int>(it.row()) % (setup.grids.fine.n - 1) + 1;
        CHECK(region.dofs.local(setup.grids.fine.node_id(ix, iy)) >= 0);
      }
    }
  }

  SUBCASE("decay profiles are nonincreasing in the layer index") {
    for (int col = 0; col < basis.column_count(); ++col)
      for (int l = 0; l + 1 <= basis.layers; ++l)
        CHECK(basis.decay(col, l + 1) <= basis.decay(col, l) + 1e-14);
  }

  SUBCASE("full column rank through the coarse mass matrix") {
    const SpMat M = assemble_mass(setup.grids.fine);
    const ReducedSystem sys = reduce(basis, M, assemble_stiffness(setup.grids.fine, setup.kappa));
    // normalized Gram: D^{-1/2} M0 D^{-1/2}
    const Vec d = sys.M0.diagonal().cwiseSqrt().cwiseInverse();
    const Mat gram = d.asDiagonal() * sys.M0 * d.asDiagonal();
    const Vec singular = gram.jacobiSvd().singularValues();
    CHECK(singular.minCoeff() > 1e-10);
  }

  SUBCASE("projection of each column onto the auxiliary space recovers its eigenfunction") {
    for (int col : {5, 100, 201}) {
      const int element = basis.columns[col].element;
      const int eig = basis.columns[col].eig;
      const Vec psi = basis.R0.col(col);
      const BrokenField projected = aux_project(setup.aux, setup.grids.fine, psi);
      // s-norm distance to phi on the element itself
      const ElementBasis& eb = setup.aux.elements[element];
      const Vec diff = projected.blocks[element] - eb.vectors.col(eig);
      CHECK(std::sqrt(diff.dot(eb.S * diff)) <= 1e-8);
    }
  }
}

TEST_CASE("high-contrast decay drops below 1e-2 outside three layers") {
  Setup setup(64, 8, 4, 1e4, 19);
  const MultiscaleBasis basis =
      build_basis(setup.grids.fine, setup.grids.coarse, setup.kappa, setup.aux, 4, 2);
  for (int col = 0; col < basis.column_count(); ++col)
    CHECK(basis.decay(col, 3) < 1e-2);
}

TEST_CASE("threaded and sequential builds agree") {
  Setup setup(16, 4, 2, 50.0);
  const MultiscaleBasis one =
      build_basis(setup.grids.fine, setup.grids.coarse, setup.kappa, setup.aux, 2, 1);
  const MultiscaleBasis two =
      build_basis(setup.grids.fine, setup.grids.coarse, setup.kappa, setup.aux, 2, 2);
  CHECK((Mat(one.R0) - Mat(two.R0)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("basis cache round trip") {
  Setup setup(16, 4, 2, 25.0);
  const MultiscaleBasis fresh =
      build_basis(setup.grids.fine, setup.grids.coarse, setup.kappa, setup.aux, 2);
  const std::string path =
      (std::filesystem::temp_directory_path() / "cemint_basis_cache_test.bc").string();
  save_basis_cache(path, fresh, 16, 4, setup.kappa.checksum());

  MultiscaleBasis loaded;
  REQUIRE(load_basis_cache(path, 16, 4, 2, 2, setup.kappa.checksum(), &loaded));
  CHECK((Mat(loaded.R0) - Mat(fresh.R0)).cwiseAbs().maxCoeff() <= 1e-15);
  CHECK((loaded.decay - fresh.decay).cwiseAbs().maxCoeff() <= 1e-15);

  // any header mismatch invalidates the cache
  CHECK_FALSE(load_basis_cache(path, 16, 4, 3, 2, setup.kappa.checksum(), &loaded));
  CHECK_FALSE(load_basis_cache(path, 16, 4, 2, 2, setup.kappa.checksum() + 1, &loaded));
  std::filesystem::remove(path);
}
